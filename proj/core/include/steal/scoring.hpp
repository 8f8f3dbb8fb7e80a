#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "steal/dataset.hpp"
#include "steal/model.hpp"
#include "steal/tensor.hpp"

namespace steal {

// PSNR-based per-frame anomaly scores. Frames are rescaled from [-1,1] to
// [0,1] before the PSNR, so peak = 1 covers the full dynamic range; eps keeps
// perfect reconstructions finite (100 dB).
struct PsnrConfig {
  double peak = 1.0;
  double eps = 1e-10;
  // 0-based frame offset scored within each sliding window; -1 = T/2
  // (the 9th frame of a 16-frame window).
  int target_frame_offset = -1;

  int resolve_offset(int T) const;
};

// 10*log10(peak^2 / (mse + eps)) in dB; inputs are {H,W} frames in [-1,1].
double psnr(const Tensor& frame, const Tensor& reconstruction, const PsnrConfig& cfg);

// Per-video min-max to [0,1]; a constant series maps to all 0.5.
std::vector<double> minmax_normalize(const std::vector<double>& values);

// Elementwise 1 - q; inputs must lie in [0,1].
std::vector<double> anomaly_scores(const std::vector<double>& quality);

struct ScoreSeries {
  std::string video_id;
  std::vector<double> psnr;     // dB, length K
  std::vector<double> quality;  // [0,1]
  std::vector<double> anomaly;  // [0,1]
  std::vector<std::uint8_t> direct;  // 1 = scored by its own window
};

// Slide a T-frame stride-1 window over the original frames; each window
// scores its (offset+1)-th frame. Boundary frames copy the nearest scored
// PSNR (recorded in the coverage mask) so the series spans all K frames.
ScoreSeries score_video(const Autoencoder<float>& model, FrameProvider& frames,
                        const VideoMeta& meta, const PsnrConfig& cfg);

// Per-pixel squared error min-max normalized to [0,1] (constant -> 0.5).
Tensor error_heatmap(const Tensor& frame, const Tensor& reconstruction);

void write_score_csv(const std::filesystem::path& file, const ScoreSeries& series);

}  // namespace steal
