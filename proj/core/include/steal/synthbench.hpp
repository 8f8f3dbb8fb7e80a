#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "steal/config.hpp"

namespace steal {

// Procedural desk-scale video benchmark: high-contrast sprites bouncing on a
// black background. Normal videos move at `speed` px/frame; each test video
// contains one contiguous interval where everything moves at
// `anomaly_multiplier * speed`. Randomness is confined to planning; rendering
// is a pure function of the manifest, so regeneration is byte-identical.

struct SpriteSpec {
  enum class Shape { rect = 0, disc = 1 };
  Shape shape = Shape::rect;
  int half_w = 4, half_h = 4;
  int intensity = 255;  // u8 value on black
  int x0 = 0, y0 = 0;   // initial center
  int vx = 1, vy = 1;   // direction, each +-1
};

struct VideoPlan {
  std::string video_id;
  std::uint64_t seed = 0;  // stream the plan was drawn from (informational)
  std::vector<SpriteSpec> sprites;
  int anomaly_begin = 0, anomaly_end = 0;  // 1-based inclusive; 0,0 = none

  bool has_anomaly() const { return anomaly_begin >= 1; }
};

struct BenchConfig {
  int frame_size = 64;
  int sprites_min = 1, sprites_max = 3;
  int speed = 1;               // pixels per frame (L-inf), normal regime
  int anomaly_multiplier = 4;  // must be >= 2
  int train_videos = 10;
  int test_videos = 6;
  int frames_per_video = 512;
  int anomaly_len = 96;
  std::uint64_t seed = 77;

  static BenchConfig from_run_config(const RunConfig& cfg);
  void validate() const;
};

struct BenchManifest {
  BenchConfig config;
  std::vector<VideoPlan> train;
  std::vector<VideoPlan> test;
};

// All random draws happen here.
BenchManifest plan_benchmark(const BenchConfig& cfg);

// Per-frame sprite centers (1-based frame f at index f-1); pure function of
// the plan, reused by tests to cross-check rendered content.
std::vector<std::pair<int, int>> sprite_trajectory(const SpriteSpec& sprite,
                                                   const VideoPlan& plan,
                                                   const BenchConfig& cfg);

// Render frames (and labels for anomalous plans) into the dataset layout:
// <root>/<split>/<video_id>/<%06d>.png, <root>/test_labels/<video_id>.txt.
void render_benchmark(const BenchManifest& manifest, const std::filesystem::path& root);

// plan + render + manifest.json under root.
BenchManifest build_benchmark(const BenchConfig& cfg, const std::filesystem::path& root);

void save_manifest(const std::filesystem::path& file, const BenchManifest& manifest);
BenchManifest load_manifest(const std::filesystem::path& file);

}  // namespace steal
