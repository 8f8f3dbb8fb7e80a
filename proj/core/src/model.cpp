#include "steal/model.hpp"

#include <cmath>
#include <cstring>

#include "steal/detail/conv3d.hpp"
#include "steal/errors.hpp"
#include "steal/rng.hpp"

namespace steal {

using detail::ConvGeom;
using detail::conv_out_dim;

Preset preset_from_string(const std::string& name) {
  if (name == "paper") return Preset::paper;
  if (name == "desk") return Preset::desk;
  throw DataError("unknown model preset: '" + name + "' (expected 'paper' or 'desk')");
}

std::string preset_to_string(Preset preset) {
  return preset == Preset::paper ? "paper" : "desk";
}

ModelShape preset_input_shape(Preset preset) {
  if (preset == Preset::paper) return {16, 1, 256, 256};
  return {8, 1, 64, 64};
}

namespace {

struct ScheduleBuilder {
  Shape3 cur;
  int ch;
  std::vector<LayerSpec> out;

  ScheduleBuilder(ModelShape in) : cur{in.T, in.H, in.W}, ch(in.C) {}

  void conv(const std::string& name, int out_ch, Shape3 stride) {
    LayerSpec spec;
    spec.name = name;
    spec.kind = LayerKind::conv3d;
    spec.in_channels = ch;
    spec.out_channels = out_ch;
    spec.kernel = {3, 3, 3};
    spec.stride = stride;
    spec.pad = {1, 1, 1};
    spec.norm = NormKind::batch;
    spec.act = ActKind::leaky_relu;
    spec.in_size = cur;
    spec.out_size = {conv_out_dim(cur.t, 3, stride.t, 1),
                     conv_out_dim(cur.h, 3, stride.h, 1),
                     conv_out_dim(cur.w, 3, stride.w, 1)};
    cur = spec.out_size;
    ch = out_ch;
    out.push_back(spec);
  }

  void deconv(const std::string& name, int out_ch, Shape3 stride, Shape3 target,
              NormKind norm, ActKind act) {
    LayerSpec spec;
    spec.name = name;
    spec.kind = LayerKind::deconv3d;
    spec.in_channels = ch;
    spec.out_channels = out_ch;
    spec.kernel = {3, 3, 3};
    spec.stride = stride;
    spec.pad = {1, 1, 1};
    spec.norm = norm;
    spec.act = act;
    spec.in_size = cur;
    auto op = [](int in, int k, int s, int p, int target_dim) {
      const int base = (in - 1) * s - 2 * p + k;
      const int pad = target_dim - base;
      if (pad < 0 || pad >= s) {
        throw DataError("deconv cannot reach target size " + std::to_string(target_dim) +
                        " from " + std::to_string(in));
      }
      return pad;
    };
    spec.output_pad = {op(cur.t, 3, stride.t, 1, target.t),
                       op(cur.h, 3, stride.h, 1, target.h),
                       op(cur.w, 3, stride.w, 1, target.w)};
    spec.out_size = target;
    cur = target;
    ch = out_ch;
    out.push_back(spec);
  }
};

}  // namespace

std::vector<LayerSpec> preset_schedule(Preset preset) {
  const ModelShape in = preset_input_shape(preset);
  ScheduleBuilder b(in);
  if (preset == Preset::paper) {
    b.conv("enc1", 96, {1, 2, 2});
    b.conv("enc2", 128, {2, 2, 2});
    b.conv("enc3", 256, {2, 2, 2});
    b.conv("enc4", 256, {2, 2, 2});
    const Shape3 s3 = b.out[2].out_size, s2 = b.out[1].out_size, s1 = b.out[0].out_size;
    b.deconv("dec4", 256, {2, 2, 2}, s3, NormKind::batch, ActKind::leaky_relu);
    b.deconv("dec3", 128, {2, 2, 2}, s2, NormKind::batch, ActKind::leaky_relu);
    b.deconv("dec2", 96, {2, 2, 2}, s1, NormKind::batch, ActKind::leaky_relu);
    b.deconv("dec1", 1, {1, 2, 2}, {in.T, in.H, in.W}, NormKind::none, ActKind::tanh);
  } else {
    b.conv("enc1", 32, {1, 2, 2});
    b.conv("enc2", 48, {2, 2, 2});
    b.conv("enc3", 64, {2, 2, 2});
    const Shape3 s2 = b.out[1].out_size, s1 = b.out[0].out_size;
    b.deconv("dec3", 48, {2, 2, 2}, s2, NormKind::batch, ActKind::leaky_relu);
    b.deconv("dec2", 32, {2, 2, 2}, s1, NormKind::batch, ActKind::leaky_relu);
    b.deconv("dec1", 1, {1, 2, 2}, {in.T, in.H, in.W}, NormKind::none, ActKind::tanh);
  }
  return b.out;
}

namespace {

// Direct-conv geometry; for deconv layers this is the mirror convolution
// (maps the deconv OUTPUT volume back to its INPUT volume).
ConvGeom geom_of(const LayerSpec& spec) {
  ConvGeom g;
  g.k = {spec.kernel.t, spec.kernel.h, spec.kernel.w};
  g.s = {spec.stride.t, spec.stride.h, spec.stride.w};
  g.p = {spec.pad.t, spec.pad.h, spec.pad.w};
  if (spec.kind == LayerKind::conv3d) {
    g.in_ch = spec.in_channels;
    g.out_ch = spec.out_channels;
    g.in_sz = {spec.in_size.t, spec.in_size.h, spec.in_size.w};
    g.out_sz = {spec.out_size.t, spec.out_size.h, spec.out_size.w};
  } else {
    g.in_ch = spec.out_channels;
    g.out_ch = spec.in_channels;
    g.in_sz = {spec.out_size.t, spec.out_size.h, spec.out_size.w};
    g.out_sz = {spec.in_size.t, spec.in_size.h, spec.in_size.w};
  }
  return g;
}

long weight_numel(const LayerSpec& spec) {
  return static_cast<long>(spec.in_channels) * spec.out_channels * spec.kernel.t *
         spec.kernel.h * spec.kernel.w;
}

template <typename S>
void add_bias(TensorT<S>& z, const TensorT<S>& bias) {
  const int N = z.dim(0), C = z.dim(1);
  const long vol = static_cast<long>(z.dim(2)) * z.dim(3) * z.dim(4);
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      S* p = z.data() + (static_cast<long>(n) * C + c) * vol;
      const S b = bias[static_cast<std::size_t>(c)];
      for (long i = 0; i < vol; ++i) p[i] += b;
    }
  }
}

// Per-channel moments over (N, T, H, W); double accumulation, sequential
// within a channel so results do not depend on the thread count.
template <typename S>
void channel_moments(const TensorT<S>& z, std::vector<double>& mean,
                     std::vector<double>& var) {
  const int N = z.dim(0), C = z.dim(1);
  const long vol = static_cast<long>(z.dim(2)) * z.dim(3) * z.dim(4);
  const double count = static_cast<double>(N) * static_cast<double>(vol);
  mean.assign(C, 0.0);
  var.assign(C, 0.0);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < C; ++c) {
    double sum = 0.0;
    for (int n = 0; n < N; ++n) {
      const S* p = z.data() + (static_cast<long>(n) * C + c) * vol;
      for (long i = 0; i < vol; ++i) sum += static_cast<double>(p[i]);
    }
    const double mu = sum / count;
    double ss = 0.0;
    for (int n = 0; n < N; ++n) {
      const S* p = z.data() + (static_cast<long>(n) * C + c) * vol;
      for (long i = 0; i < vol; ++i) {
        const double d = static_cast<double>(p[i]) - mu;
        ss += d * d;
      }
    }
    mean[c] = mu;
    var[c] = ss / count;
  }
}

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;

template <typename S>
void bn_apply(const TensorT<S>& z, TensorT<S>& y, const std::vector<double>& mean,
              const std::vector<double>& var, const TensorT<S>& gamma,
              const TensorT<S>& beta) {
  const int N = z.dim(0), C = z.dim(1);
  const long vol = static_cast<long>(z.dim(2)) * z.dim(3) * z.dim(4);
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      const double inv = 1.0 / std::sqrt(var[c] + kBnEps);
      const double g = static_cast<double>(gamma[static_cast<std::size_t>(c)]);
      const double b = static_cast<double>(beta[static_cast<std::size_t>(c)]);
      const double mu = mean[c];
      const S* src = z.data() + (static_cast<long>(n) * C + c) * vol;
      S* dst = y.data() + (static_cast<long>(n) * C + c) * vol;
      for (long i = 0; i < vol; ++i) {
        dst[i] = static_cast<S>((static_cast<double>(src[i]) - mu) * inv * g + b);
      }
    }
  }
}

template <typename S>
void act_forward(ActKind act, TensorT<S>& y) {
  const long n = static_cast<long>(y.numel());
  S* p = y.data();
  switch (act) {
    case ActKind::leaky_relu:
#pragma omp parallel for schedule(static)
      for (long i = 0; i < n; ++i) {
        if (p[i] < S(0)) p[i] *= S(0.2);
      }
      break;
    case ActKind::tanh:
#pragma omp parallel for schedule(static)
      for (long i = 0; i < n; ++i) p[i] = std::tanh(p[i]);
      break;
    case ActKind::none:
      break;
  }
}

// In place: dy (grad wrt activation output) -> grad wrt activation input,
// recovered from the cached output y (both activations are invertible enough:
// sign(y) = sign(u) for leaky relu; tanh' = 1 - y^2).
template <typename S>
void act_backward(ActKind act, const TensorT<S>& y, TensorT<S>& dy) {
  const long n = static_cast<long>(y.numel());
  const S* yp = y.data();
  S* dp = dy.data();
  switch (act) {
    case ActKind::leaky_relu:
#pragma omp parallel for schedule(static)
      for (long i = 0; i < n; ++i) {
        if (yp[i] < S(0)) dp[i] *= S(0.2);
      }
      break;
    case ActKind::tanh:
#pragma omp parallel for schedule(static)
      for (long i = 0; i < n; ++i) dp[i] *= (S(1) - yp[i] * yp[i]);
      break;
    case ActKind::none:
      break;
  }
}

}  // namespace

template <typename S>
void LayerGrads<S>::zero() {
  weight.zero();
  bias.zero();
  gamma.zero();
  beta.zero();
}

template <typename S>
Autoencoder<S>::Autoencoder(Preset preset, std::uint64_t seed)
    : preset_(preset), in_shape_(preset_input_shape(preset)),
      schedule_(preset_schedule(preset)) {
  Rng rng(seed);
  params_.reserve(schedule_.size());
  for (const auto& spec : schedule_) {
    LayerParams<S> p;
    const int kvol = spec.kernel.t * spec.kernel.h * spec.kernel.w;
    if (spec.kind == LayerKind::conv3d) {
      p.weight = TensorT<S>({spec.out_channels, spec.in_channels, spec.kernel.t,
                             spec.kernel.h, spec.kernel.w});
    } else {
      p.weight = TensorT<S>({spec.in_channels, spec.out_channels, spec.kernel.t,
                             spec.kernel.h, spec.kernel.w});
    }
    // Fan-in uniform init with the leaky-relu gain; fan-in counts the
    // kernel taps feeding one output channel.
    const int fan_ch = spec.kind == LayerKind::conv3d ? spec.in_channels : spec.out_channels;
    const double fan_in = static_cast<double>(fan_ch) * kvol;
    const double slope = 0.2;
    const double bound = std::sqrt(6.0 / ((1.0 + slope * slope) * fan_in));
    for (std::size_t i = 0; i < p.weight.numel(); ++i) {
      p.weight[i] = static_cast<S>(rng.uniform_real(-bound, bound));
    }
    p.bias = TensorT<S>({spec.out_channels});
    if (spec.norm == NormKind::batch) {
      p.gamma = TensorT<S>::full({spec.out_channels}, S(1));
      p.beta = TensorT<S>({spec.out_channels});
      p.running_mean = TensorT<S>({spec.out_channels});
      p.running_var = TensorT<S>::full({spec.out_channels}, S(1));
    }
    params_.push_back(std::move(p));
  }
}

template <typename S>
void Autoencoder<S>::check_input(const TensorT<S>& x) const {
  if (x.rank() != 5 || x.dim(0) < 1 || x.dim(1) != in_shape_.C ||
      x.dim(2) != in_shape_.T || x.dim(3) != in_shape_.H || x.dim(4) != in_shape_.W) {
    throw DataError("model input shape mismatch: got " + x.shape_str() +
                    ", preset expects {N," + std::to_string(in_shape_.C) + "," +
                    std::to_string(in_shape_.T) + "," + std::to_string(in_shape_.H) +
                    "," + std::to_string(in_shape_.W) + "}");
  }
}

template <typename S>
TensorT<S> Autoencoder<S>::forward(const TensorT<S>& x, Mode mode,
                                   ForwardCache<S>* cache, bool update_running) {
  check_input(x);
  const int N = x.dim(0);
  const std::size_t L = schedule_.size();
  if (cache) {
    cache->acts.assign(1, x);
    cache->pre_norm.assign(L, TensorT<S>());
    cache->bn_mean.assign(L, {});
    cache->bn_var.assign(L, {});
  }
  TensorT<S> cur = x;
  for (std::size_t l = 0; l < L; ++l) {
    const LayerSpec& spec = schedule_[l];
    LayerParams<S>& par = params_[l];
    const ConvGeom g = geom_of(spec);
    TensorT<S> z({N, spec.out_channels, spec.out_size.t, spec.out_size.h, spec.out_size.w});
    const TensorT<S>& input = cache ? cache->acts[l] : cur;
    const long in_vol = g.in_elems();
    const long out_vol = static_cast<long>(spec.out_channels) * spec.out_size.t *
                         spec.out_size.h * spec.out_size.w;
#pragma omp parallel for schedule(static)
    for (int n = 0; n < N; ++n) {
      std::vector<S> colbuf;
      const S* xin = input.data() + static_cast<long>(n) * in_vol;
      S* zout = z.data() + static_cast<long>(n) * out_vol;
      if (spec.kind == LayerKind::conv3d) {
        detail::conv_fwd_sample(g, par.weight.data(), xin, zout, colbuf);
      } else {
        detail::conv_bwd_data_sample(g, par.weight.data(), xin, zout, colbuf);
      }
    }
    add_bias(z, par.bias);

    TensorT<S> y;
    if (spec.norm == NormKind::batch) {
      std::vector<double> mean, var;
      if (mode == Mode::train) {
        channel_moments(z, mean, var);
        if (update_running) {
          for (int c = 0; c < spec.out_channels; ++c) {
            auto& rm = par.running_mean[static_cast<std::size_t>(c)];
            auto& rv = par.running_var[static_cast<std::size_t>(c)];
            rm = static_cast<S>((1.0 - kBnMomentum) * static_cast<double>(rm) +
                                kBnMomentum * mean[c]);
            rv = static_cast<S>((1.0 - kBnMomentum) * static_cast<double>(rv) +
                                kBnMomentum * var[c]);
          }
        }
      } else {
        mean.resize(spec.out_channels);
        var.resize(spec.out_channels);
        for (int c = 0; c < spec.out_channels; ++c) {
          mean[c] = static_cast<double>(par.running_mean[static_cast<std::size_t>(c)]);
          var[c] = static_cast<double>(par.running_var[static_cast<std::size_t>(c)]);
        }
      }
      y = TensorT<S>(z.shape());
      bn_apply(z, y, mean, var, par.gamma, par.beta);
      if (cache) {
        cache->pre_norm[l] = std::move(z);
        cache->bn_mean[l] = std::move(mean);
        cache->bn_var[l] = std::move(var);
      }
    } else {
      y = std::move(z);
    }
    act_forward(spec.act, y);
    if (cache) {
      cache->acts.push_back(std::move(y));
    } else {
      cur = std::move(y);
    }
  }
  return cache ? cache->acts.back() : cur;
}

template <typename S>
TensorT<S> Autoencoder<S>::reconstruct(const TensorT<S>& x) const {
  // Eval mode only reads parameters, so the const_cast cannot mutate state.
  auto* self = const_cast<Autoencoder<S>*>(this);
  return self->forward(x, Mode::eval, nullptr, false);
}

template <typename S>
TensorT<S> Autoencoder<S>::reconstruct_clip(const TensorT<S>& clip) const {
  if (clip.rank() != 4) throw DataError("reconstruct_clip expects {T,C,H,W}");
  const int T = clip.dim(0), C = clip.dim(1), H = clip.dim(2), W = clip.dim(3);
  TensorT<S> batch({1, C, T, H, W});
  for (int t = 0; t < T; ++t) {
    for (int c = 0; c < C; ++c) {
      const S* src = clip.data() + (static_cast<long>(t) * C + c) * H * W;
      S* dst = batch.data() + (static_cast<long>(c) * T + t) * H * W;
      std::memcpy(dst, src, sizeof(S) * static_cast<std::size_t>(H) * W);
    }
  }
  TensorT<S> out = reconstruct(batch);
  TensorT<S> recon({T, C, H, W});
  for (int t = 0; t < T; ++t) {
    for (int c = 0; c < C; ++c) {
      const S* src = out.data() + (static_cast<long>(c) * T + t) * H * W;
      S* dst = recon.data() + (static_cast<long>(t) * C + c) * H * W;
      std::memcpy(dst, src, sizeof(S) * static_cast<std::size_t>(H) * W);
    }
  }
  return recon;
}

template <typename S>
std::vector<LayerGrads<S>> Autoencoder<S>::make_grads() const {
  std::vector<LayerGrads<S>> grads;
  grads.reserve(params_.size());
  for (const auto& p : params_) {
    LayerGrads<S> g;
    g.weight = TensorT<S>(p.weight.shape());
    g.bias = TensorT<S>(p.bias.shape());
    if (!p.gamma.empty()) {
      g.gamma = TensorT<S>(p.gamma.shape());
      g.beta = TensorT<S>(p.beta.shape());
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

template <typename S>
void Autoencoder<S>::backward(const TensorT<S>& grad_out, const ForwardCache<S>& cache,
                              std::vector<LayerGrads<S>>& grads) const {
  const std::size_t L = schedule_.size();
  if (cache.acts.size() != L + 1) throw DataError("backward: stale forward cache");
  if (!grad_out.same_shape(cache.acts.back())) {
    throw DataError("backward: grad shape mismatch");
  }
  const int N = grad_out.dim(0);
  TensorT<S> cur = grad_out;
  for (std::size_t li = L; li-- > 0;) {
    const LayerSpec& spec = schedule_[li];
    const LayerParams<S>& par = params_[li];
    LayerGrads<S>& g = grads[li];
    const ConvGeom geo = geom_of(spec);

    act_backward(spec.act, cache.acts[li + 1], cur);

    if (spec.norm == NormKind::batch) {
      // Standard batch-norm backward through the batch statistics.
      const TensorT<S>& z = cache.pre_norm[li];
      const auto& mean = cache.bn_mean[li];
      const auto& var = cache.bn_var[li];
      const int C = spec.out_channels;
      const long vol = static_cast<long>(spec.out_size.t) * spec.out_size.h * spec.out_size.w;
      const double m = static_cast<double>(N) * static_cast<double>(vol);
#pragma omp parallel for schedule(static)
      for (int c = 0; c < C; ++c) {
        const double inv = 1.0 / std::sqrt(var[c] + kBnEps);
        const double mu = mean[c];
        double sum_du = 0.0, sum_du_zhat = 0.0;
        for (int n = 0; n < N; ++n) {
          const long base = (static_cast<long>(n) * C + c) * vol;
          const S* zp = z.data() + base;
          const S* dp = cur.data() + base;
          for (long i = 0; i < vol; ++i) {
            const double zhat = (static_cast<double>(zp[i]) - mu) * inv;
            const double du = static_cast<double>(dp[i]);
            sum_du += du;
            sum_du_zhat += du * zhat;
          }
        }
        g.gamma[static_cast<std::size_t>(c)] += static_cast<S>(sum_du_zhat);
        g.beta[static_cast<std::size_t>(c)] += static_cast<S>(sum_du);
        const double gam = static_cast<double>(par.gamma[static_cast<std::size_t>(c)]);
        const double k1 = gam * inv;
        for (int n = 0; n < N; ++n) {
          const long base = (static_cast<long>(n) * C + c) * vol;
          const S* zp = z.data() + base;
          S* dp = cur.data() + base;
          for (long i = 0; i < vol; ++i) {
            const double zhat = (static_cast<double>(zp[i]) - mu) * inv;
            const double du = static_cast<double>(dp[i]);
            dp[i] = static_cast<S>(k1 * (du - sum_du / m - zhat * sum_du_zhat / m));
          }
        }
      }
    }

    // Bias gradient: sum of dz over batch and positions per output channel.
    {
      const int C = spec.out_channels;
      const long vol = static_cast<long>(spec.out_size.t) * spec.out_size.h * spec.out_size.w;
#pragma omp parallel for schedule(static)
      for (int c = 0; c < C; ++c) {
        double sum = 0.0;
        for (int n = 0; n < N; ++n) {
          const S* dp = cur.data() + (static_cast<long>(n) * C + c) * vol;
          for (long i = 0; i < vol; ++i) sum += static_cast<double>(dp[i]);
        }
        g.bias[static_cast<std::size_t>(c)] += static_cast<S>(sum);
      }
    }

    // Weight gradient: per-sample partials reduced in sample order.
    const TensorT<S>& input = cache.acts[li];
    const long wnum = weight_numel(spec);
    const long in_vol = static_cast<long>(spec.in_channels) * spec.in_size.t *
                        spec.in_size.h * spec.in_size.w;
    const long out_vol = static_cast<long>(spec.out_channels) * spec.out_size.t *
                         spec.out_size.h * spec.out_size.w;
    std::vector<std::vector<S>> dw_samples(static_cast<std::size_t>(N));
#pragma omp parallel for schedule(static)
    for (int n = 0; n < N; ++n) {
      auto& dw = dw_samples[static_cast<std::size_t>(n)];
      dw.assign(static_cast<std::size_t>(wnum), S(0));
      std::vector<S> colbuf;
      const S* xin = input.data() + static_cast<long>(n) * in_vol;
      const S* dz = cur.data() + static_cast<long>(n) * out_vol;
      if (spec.kind == LayerKind::conv3d) {
        detail::conv_bwd_weight_sample(geo, xin, dz, dw.data(), colbuf);
      } else {
        // Transposed conv: swap the roles of activation and gradient.
        detail::conv_bwd_weight_sample(geo, dz, xin, dw.data(), colbuf);
      }
    }
    for (int n = 0; n < N; ++n) {
      const auto& dw = dw_samples[static_cast<std::size_t>(n)];
      for (long i = 0; i < wnum; ++i) g.weight[static_cast<std::size_t>(i)] += dw[static_cast<std::size_t>(i)];
    }

    if (li == 0) break;  // input gradient unused

    TensorT<S> dx({N, spec.in_channels, spec.in_size.t, spec.in_size.h, spec.in_size.w});
#pragma omp parallel for schedule(static)
    for (int n = 0; n < N; ++n) {
      std::vector<S> colbuf;
      const S* dz = cur.data() + static_cast<long>(n) * out_vol;
      S* dxp = dx.data() + static_cast<long>(n) * in_vol;
      if (spec.kind == LayerKind::conv3d) {
        detail::conv_bwd_data_sample(geo, par.weight.data(), dz, dxp, colbuf);
      } else {
        detail::conv_fwd_sample(geo, par.weight.data(), dz, dxp, colbuf);
      }
    }
    cur = std::move(dx);
  }
}

template <typename S>
std::vector<TensorT<S>*> Autoencoder<S>::trainable_tensors() {
  std::vector<TensorT<S>*> out;
  for (auto& p : params_) {
    out.push_back(&p.weight);
    out.push_back(&p.bias);
    if (!p.gamma.empty()) {
      out.push_back(&p.gamma);
      out.push_back(&p.beta);
    }
  }
  return out;
}

template <typename S>
std::vector<TensorT<S>*> Autoencoder<S>::grad_tensors(std::vector<LayerGrads<S>>& grads) {
  std::vector<TensorT<S>*> out;
  for (auto& g : grads) {
    out.push_back(&g.weight);
    out.push_back(&g.bias);
    if (!g.gamma.empty()) {
      out.push_back(&g.gamma);
      out.push_back(&g.beta);
    }
  }
  return out;
}

template <typename S>
std::size_t Autoencoder<S>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    n += p.weight.numel() + p.bias.numel() + p.gamma.numel() + p.beta.numel();
  }
  return n;
}

Tensor stack_clips(std::span<const Clip> clips) {
  if (clips.empty()) throw DataError("stack_clips: empty batch");
  const auto& shape = clips[0].data.shape();
  const int T = shape[0], C = shape[1], H = shape[2], W = shape[3];
  Tensor batch({static_cast<int>(clips.size()), C, T, H, W});
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (clips[i].data.shape() != shape) {
      throw DataError("stack_clips: mixed clip shapes in batch");
    }
    for (int t = 0; t < T; ++t) {
      for (int c = 0; c < C; ++c) {
        const float* src = clips[i].data.data() + (static_cast<long>(t) * C + c) * H * W;
        float* dst = batch.data() +
                     ((static_cast<long>(i) * C + c) * T + t) * static_cast<long>(H) * W;
        std::memcpy(dst, src, sizeof(float) * static_cast<std::size_t>(H) * W);
      }
    }
  }
  return batch;
}

template <typename S>
TensorT<S> clip_frame(const TensorT<S>& clip, int t) {
  if (clip.rank() != 4 || clip.dim(1) != 1) {
    throw DataError("clip_frame expects a {T,1,H,W} clip");
  }
  if (t < 0 || t >= clip.dim(0)) throw DataError("clip_frame: index out of range");
  const int H = clip.dim(2), W = clip.dim(3);
  TensorT<S> out({H, W});
  std::memcpy(out.data(), clip.data() + static_cast<long>(t) * H * W,
              sizeof(S) * static_cast<std::size_t>(H) * W);
  return out;
}

template class Autoencoder<float>;
template class Autoencoder<double>;
template struct LayerGrads<float>;
template struct LayerGrads<double>;
template TensorT<float> clip_frame<float>(const TensorT<float>&, int);
template TensorT<double> clip_frame<double>(const TensorT<double>&, int);

}  // namespace steal
