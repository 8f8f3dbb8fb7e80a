#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "steal/dataset.hpp"
#include "steal/model.hpp"
#include "steal/scoring.hpp"

namespace steal {

// Frame-level ROC AUC over the concatenated test set (each video's scores
// are min-max normalized per video before concatenation).

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct VideoAuc {
  std::string video_id;
  bool defined = false;  // false when the video has a single label class
  double auc = 0.0;
};

struct EvalReport {
  double auc = 0.0;
  std::vector<RocPoint> roc;       // staircase from (0,0) to (1,1)
  std::vector<VideoAuc> per_video;  // diagnostics
};

struct LabeledScores {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  std::vector<std::string> video_ids;
  std::vector<int> frame_idx;  // 1-based within its video

  std::size_t size() const { return scores.size(); }
};

// Threshold sweep over distinct score values with trapezoidal integration;
// ties earn half credit, matching the pairwise-comparison statistic.
EvalReport roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Score every test video, concatenate, and sweep. Per-video AUCs are
// attached as diagnostics; collected pairs are exposed via `out`.
EvalReport evaluate(const Autoencoder<float>& model, const DatasetIndex& test,
                    FrameProvider& frames, const PsnrConfig& cfg,
                    LabeledScores* out = nullptr);

struct Comparison {
  double auc_a = 0.0, auc_b = 0.0;
  std::vector<VideoAuc> per_video_a, per_video_b;

  double delta() const { return auc_b - auc_a; }
};

Comparison compare_models(const Autoencoder<float>& model_a,
                          const Autoencoder<float>& model_b, const DatasetIndex& test,
                          FrameProvider& frames, const PsnrConfig& cfg);

void write_report_json(const std::filesystem::path& file, const EvalReport& report);
void write_roc_csv(const std::filesystem::path& file, const EvalReport& report);
void write_comparison_csv(const std::filesystem::path& file, const Comparison& cmp);
std::string comparison_table(const Comparison& cmp);

}  // namespace steal
