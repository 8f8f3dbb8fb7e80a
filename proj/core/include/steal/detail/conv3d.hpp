#pragma once

// 3-D convolution primitives: per-sample im2col + GEMM, with the transposed
// convolution expressed through a mirror geometry. Column buffers are chunked
// so the paper-scale preset stays within a bounded working set.

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <vector>

namespace steal::detail {

struct Dim3i {
  int t = 1, h = 1, w = 1;
};

// Geometry of a direct convolution: out = (in + 2p - k)/s + 1 per dim.
// Schedules are constructed so the division is exact.
struct ConvGeom {
  int in_ch = 0, out_ch = 0;
  Dim3i in_sz, out_sz;
  Dim3i k, s, p;

  long positions() const {
    return static_cast<long>(out_sz.t) * out_sz.h * out_sz.w;
  }
  long col_rows() const { return static_cast<long>(in_ch) * k.t * k.h * k.w; }
  long in_elems() const {
    return static_cast<long>(in_ch) * in_sz.t * in_sz.h * in_sz.w;
  }
  long out_elems() const { return static_cast<long>(out_ch) * positions(); }
};

inline int conv_out_dim(int in, int k, int s, int p) {
  return (in + 2 * p - k) / s + 1;
}

// Chunk size targeting a ~32 MB column buffer.
template <typename S>
long col_chunk(const ConvGeom& g) {
  const long budget = (32L << 20) / (g.col_rows() * static_cast<long>(sizeof(S)));
  return std::clamp(budget, 256L, g.positions());
}

template <typename S>
using MatRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using MatCM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;

// col is column-major [col_rows x (q1-q0)]; position q enumerates
// (to, ho, wo) row-major over the output volume.
template <typename S>
void im2col_chunk(const ConvGeom& g, const S* x, long q0, long q1, S* col) {
  const long rows = g.col_rows();
  const long HW = static_cast<long>(g.in_sz.h) * g.in_sz.w;
  const long THW = static_cast<long>(g.in_sz.t) * HW;
  for (long q = q0; q < q1; ++q) {
    S* column = col + (q - q0) * rows;
    const int wo = static_cast<int>(q % g.out_sz.w);
    const int ho = static_cast<int>((q / g.out_sz.w) % g.out_sz.h);
    const int to = static_cast<int>(q / (static_cast<long>(g.out_sz.w) * g.out_sz.h));
    const int ti = to * g.s.t - g.p.t;
    const int hi = ho * g.s.h - g.p.h;
    const int wi = wo * g.s.w - g.p.w;
    long r = 0;
    for (int c = 0; c < g.in_ch; ++c) {
      const S* xc = x + c * THW;
      for (int dt = 0; dt < g.k.t; ++dt) {
        const int t = ti + dt;
        const bool t_ok = t >= 0 && t < g.in_sz.t;
        for (int dh = 0; dh < g.k.h; ++dh) {
          const int h = hi + dh;
          const bool h_ok = t_ok && h >= 0 && h < g.in_sz.h;
          const S* xrow = xc + static_cast<long>(t) * HW + static_cast<long>(h) * g.in_sz.w;
          for (int dw = 0; dw < g.k.w; ++dw, ++r) {
            const int w = wi + dw;
            column[r] = (h_ok && w >= 0 && w < g.in_sz.w) ? xrow[w] : S(0);
          }
        }
      }
    }
  }
}

// Scatter-add transpose of im2col_chunk; dx must be zero-initialized by the
// caller before the first chunk.
template <typename S>
void col2im_chunk(const ConvGeom& g, const S* col, long q0, long q1, S* dx) {
  const long rows = g.col_rows();
  const long HW = static_cast<long>(g.in_sz.h) * g.in_sz.w;
  const long THW = static_cast<long>(g.in_sz.t) * HW;
  for (long q = q0; q < q1; ++q) {
    const S* column = col + (q - q0) * rows;
    const int wo = static_cast<int>(q % g.out_sz.w);
    const int ho = static_cast<int>((q / g.out_sz.w) % g.out_sz.h);
    const int to = static_cast<int>(q / (static_cast<long>(g.out_sz.w) * g.out_sz.h));
    const int ti = to * g.s.t - g.p.t;
    const int hi = ho * g.s.h - g.p.h;
    const int wi = wo * g.s.w - g.p.w;
    long r = 0;
    for (int c = 0; c < g.in_ch; ++c) {
      S* xc = dx + c * THW;
      for (int dt = 0; dt < g.k.t; ++dt) {
        const int t = ti + dt;
        const bool t_ok = t >= 0 && t < g.in_sz.t;
        for (int dh = 0; dh < g.k.h; ++dh) {
          const int h = hi + dh;
          const bool h_ok = t_ok && h >= 0 && h < g.in_sz.h;
          S* xrow = xc + static_cast<long>(t) * HW + static_cast<long>(h) * g.in_sz.w;
          for (int dw = 0; dw < g.k.w; ++dw, ++r) {
            const int w = wi + dw;
            if (h_ok && w >= 0 && w < g.in_sz.w) xrow[w] += column[r];
          }
        }
      }
    }
  }
}

// y[out_ch][positions] = W[out_ch][col_rows] * col;  y overwritten.
template <typename S>
void conv_fwd_sample(const ConvGeom& g, const S* w, const S* x, S* y,
                     std::vector<S>& colbuf) {
  const long P = g.positions(), R = g.col_rows();
  const long chunk = col_chunk<S>(g);
  colbuf.resize(static_cast<std::size_t>(R * chunk));
  Eigen::Map<const MatRM<S>> Wm(w, g.out_ch, R);
  for (long q0 = 0; q0 < P; q0 += chunk) {
    const long q1 = std::min(P, q0 + chunk);
    im2col_chunk(g, x, q0, q1, colbuf.data());
    Eigen::Map<const MatCM<S>> Cm(colbuf.data(), R, q1 - q0);
    Eigen::Map<MatRM<S>, 0, Eigen::OuterStride<>> Ym(y + q0, g.out_ch, q1 - q0,
                                                     Eigen::OuterStride<>(P));
    Ym.noalias() = Wm * Cm;
  }
}

// dx[in_ch][in_elems] = col2im(W^T * dy);  dx overwritten.
template <typename S>
void conv_bwd_data_sample(const ConvGeom& g, const S* w, const S* dy, S* dx,
                          std::vector<S>& colbuf) {
  const long P = g.positions(), R = g.col_rows();
  const long chunk = col_chunk<S>(g);
  colbuf.resize(static_cast<std::size_t>(R * chunk));
  std::fill(dx, dx + g.in_elems(), S(0));
  Eigen::Map<const MatRM<S>> Wm(w, g.out_ch, R);
  for (long q0 = 0; q0 < P; q0 += chunk) {
    const long q1 = std::min(P, q0 + chunk);
    Eigen::Map<const MatRM<S>, 0, Eigen::OuterStride<>> dYm(
        dy + q0, g.out_ch, q1 - q0, Eigen::OuterStride<>(P));
    Eigen::Map<MatCM<S>> Cm(colbuf.data(), R, q1 - q0);
    Cm.noalias() = Wm.transpose() * dYm;
    col2im_chunk(g, colbuf.data(), q0, q1, dx);
  }
}

// dw[out_ch][col_rows] += dy * im2col(x)^T.
template <typename S>
void conv_bwd_weight_sample(const ConvGeom& g, const S* x, const S* dy, S* dw,
                            std::vector<S>& colbuf) {
  const long P = g.positions(), R = g.col_rows();
  const long chunk = col_chunk<S>(g);
  colbuf.resize(static_cast<std::size_t>(R * chunk));
  Eigen::Map<MatRM<S>> dWm(dw, g.out_ch, R);
  for (long q0 = 0; q0 < P; q0 += chunk) {
    const long q1 = std::min(P, q0 + chunk);
    im2col_chunk(g, x, q0, q1, colbuf.data());
    Eigen::Map<const MatCM<S>> Cm(colbuf.data(), R, q1 - q0);
    Eigen::Map<const MatRM<S>, 0, Eigen::OuterStride<>> dYm(
        dy + q0, g.out_ch, q1 - q0, Eigen::OuterStride<>(P));
    dWm.noalias() += dYm * Cm.transpose();
  }
}

}  // namespace steal::detail
