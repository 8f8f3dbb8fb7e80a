#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "steal/rng.hpp"
#include "steal/tensor.hpp"

namespace steal {

// One video: a directory of numbered frame images. Frame indices are 1-based
// and contiguous at every interface; frames[i] backs index i+1.
struct VideoMeta {
  std::string video_id;
  std::filesystem::path frame_dir;
  int frame_count = 0;
  std::vector<std::filesystem::path> frames;
};

// Per-frame binary ground truth for a test video (1 = anomalous).
struct LabelTrack {
  std::string video_id;
  std::vector<std::uint8_t> labels;
};

enum class Split { train, test };

struct DatasetIndex {
  std::filesystem::path root;
  Split split = Split::train;
  std::vector<VideoMeta> videos;       // sorted by video_id
  std::vector<LabelTrack> labels;      // parallel to videos (test split only)

  const VideoMeta& video(const std::string& id) const;
  const LabelTrack& label_track(const std::string& id) const;
};

// Decoded single-channel frame in [-1,1] plus its 1-based source index.
struct Frame {
  Tensor pixels;  // {H, W}
  int source_index = 0;
};

// (video id, start n, stride s, length T); stride 1 = normal clip,
// stride > 1 = skip-frame pseudo anomaly.
struct ClipSpec {
  std::string video_id;
  int start = 1;
  int stride = 1;
  int length = 0;
};

struct Clip {
  Tensor data;  // {T, C, H, W}, values in [-1,1]
  ClipSpec spec;
  bool is_pseudo = false;
};

// Dataset layout: <root>/<split>/<video_id>/<numbered>.png|jpg, labels at
// <root>/test_labels/<video_id>.txt (one 0/1 per line).
DatasetIndex load_dataset(const std::filesystem::path& root, Split split);

// Pure decode: luminance, bilinear resize to H x W, [0,255] -> [-1,1].
Frame decode_frame(const VideoMeta& meta, int idx, int height, int width);

// Decode-through cache. Insert-until-full policy bounded by cache_mb; safe
// for concurrent readers.
class FrameProvider {
 public:
  FrameProvider(int height, int width, std::size_t cache_mb = 2048);

  int height() const { return height_; }
  int width() const { return width_; }

  // Cached equivalent of decode_frame(meta, idx, height, width).pixels.
  Tensor frame(const VideoMeta& meta, int idx);

 private:
  int height_, width_;
  std::size_t cache_limit_bytes_;
  std::size_t cache_bytes_ = 0;
  std::map<std::pair<std::string, int>, Tensor> cache_;
  std::mutex mu_;
};

// Stride-1 clip (I_n, ..., I_{n+T-1}); requires n + T - 1 <= frame_count.
Clip sample_normal_clip(FrameProvider& frames, const VideoMeta& meta, int n, int T);

// Uniform start index on [1, K - (T-1)*s]; errors if the video is too short.
int sample_start_index(const VideoMeta& meta, int T, int s, Rng& rng);

}  // namespace steal
