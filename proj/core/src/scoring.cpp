#include "steal/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "steal/errors.hpp"

namespace steal {

int PsnrConfig::resolve_offset(int T) const {
  const int off = target_frame_offset < 0 ? T / 2 : target_frame_offset;
  if (off < 0 || off >= T) {
    throw DataError("score offset " + std::to_string(off) +
                    " outside window of length " + std::to_string(T));
  }
  return off;
}

double psnr(const Tensor& frame, const Tensor& reconstruction, const PsnrConfig& cfg) {
  if (!frame.same_shape(reconstruction)) {
    throw DataError("psnr: shape mismatch " + frame.shape_str() + " vs " +
                    reconstruction.shape_str());
  }
  if (frame.numel() == 0) throw DataError("psnr: empty frame");
  const std::size_t n = frame.numel();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // [-1,1] -> [0,1]
    const double a = (static_cast<double>(frame[i]) + 1.0) * 0.5;
    const double b = (static_cast<double>(reconstruction[i]) + 1.0) * 0.5;
    const double d = b - a;
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(n);
  return 10.0 * std::log10(cfg.peak * cfg.peak / (mse + cfg.eps));
}

std::vector<double> minmax_normalize(const std::vector<double>& values) {
  if (values.empty()) throw DataError("minmax_normalize: empty series");
  const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  const double mn = *mn_it, mx = *mx_it;
  std::vector<double> out(values.size());
  if (mx == mn) {
    std::fill(out.begin(), out.end(), 0.5);  // constant series: neutral score
    return out;
  }
  const double inv = 1.0 / (mx - mn);
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mn) * inv;
  return out;
}

std::vector<double> anomaly_scores(const std::vector<double>& quality) {
  std::vector<double> out(quality.size());
  for (std::size_t i = 0; i < quality.size(); ++i) {
    if (quality[i] < 0.0 || quality[i] > 1.0) {
      throw DataError("anomaly_scores: quality value outside [0,1]: " +
                      std::to_string(quality[i]));
    }
    out[i] = 1.0 - quality[i];
  }
  return out;
}

ScoreSeries score_video(const Autoencoder<float>& model, FrameProvider& frames,
                        const VideoMeta& meta, const PsnrConfig& cfg) {
  const ModelShape shape = model.input_shape();
  const int T = shape.T;
  const int K = meta.frame_count;
  if (K < T) {
    throw DataError("video '" + meta.video_id + "' shorter than the scoring window: K=" +
                    std::to_string(K) + " < T=" + std::to_string(T));
  }
  const int offset = cfg.resolve_offset(T);
  const int num_windows = K - T + 1;
  const int first_scored = 1 + offset;                // window 1 scores this frame
  const int last_scored = num_windows + offset;       // last window's target

  ScoreSeries series;
  series.video_id = meta.video_id;
  series.psnr.assign(static_cast<std::size_t>(K), 0.0);
  series.direct.assign(static_cast<std::size_t>(K), 0);

  // Decode sequentially (the provider cache is shared), score windows in
  // parallel; each window is an independent single-clip eval forward.
  std::vector<Tensor> decoded(static_cast<std::size_t>(K));
  for (int i = 0; i < K; ++i) decoded[static_cast<std::size_t>(i)] = frames.frame(meta, i + 1);

  const int H = frames.height(), W = frames.width();
#pragma omp parallel for schedule(dynamic)
  for (int w = 1; w <= num_windows; ++w) {
    Tensor clip({T, 1, H, W});
    for (int t = 0; t < T; ++t) {
      const Tensor& px = decoded[static_cast<std::size_t>(w + t - 1)];
      std::copy(px.data(), px.data() + px.numel(),
                clip.data() + static_cast<std::size_t>(t) * H * W);
    }
    const Tensor recon = model.reconstruct_clip(clip);
    const Tensor target = clip_frame(clip, offset);
    const Tensor rhat = clip_frame(recon, offset);
    const int fidx = w + offset;  // 1-based frame receiving this score
    series.psnr[static_cast<std::size_t>(fidx - 1)] = psnr(target, rhat, cfg);
    series.direct[static_cast<std::size_t>(fidx - 1)] = 1;
  }

  // Boundary frames copy the nearest scored value.
  for (int f = 1; f < first_scored; ++f) {
    series.psnr[static_cast<std::size_t>(f - 1)] =
        series.psnr[static_cast<std::size_t>(first_scored - 1)];
  }
  for (int f = last_scored + 1; f <= K; ++f) {
    series.psnr[static_cast<std::size_t>(f - 1)] =
        series.psnr[static_cast<std::size_t>(last_scored - 1)];
  }

  series.quality = minmax_normalize(series.psnr);
  series.anomaly = anomaly_scores(series.quality);
  return series;
}

Tensor error_heatmap(const Tensor& frame, const Tensor& reconstruction) {
  if (!frame.same_shape(reconstruction)) {
    throw DataError("error_heatmap: shape mismatch");
  }
  const std::size_t n = frame.numel();
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(reconstruction[i]) - static_cast<double>(frame[i]);
    sq[i] = d * d;
  }
  const std::vector<double> norm = minmax_normalize(sq);
  Tensor out(frame.shape());
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(norm[i]);
  return out;
}

void write_score_csv(const std::filesystem::path& file, const ScoreSeries& series) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write score csv: " + file.string());
  out << "frame,psnr,quality,anomaly,direct\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < series.psnr.size(); ++i) {
    out << (i + 1) << ',' << series.psnr[i] << ',' << series.quality[i] << ','
        << series.anomaly[i] << ',' << static_cast<int>(series.direct[i]) << '\n';
  }
}

}  // namespace steal
