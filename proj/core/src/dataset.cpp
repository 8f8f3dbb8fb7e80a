#include "steal/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "steal/errors.hpp"
#include "steal/image.hpp"

namespace steal {

namespace fs = std::filesystem;

namespace {

bool is_frame_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

// Numeric stem ("000123" -> 123); nullopt for non-numeric names.
std::optional<long> numeric_stem(const fs::path& p) {
  const std::string stem = p.stem().string();
  if (stem.empty()) return std::nullopt;
  for (char c : stem) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
  }
  try {
    return std::stol(stem);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

VideoMeta scan_video_dir(const fs::path& dir) {
  VideoMeta meta;
  meta.video_id = dir.filename().string();
  meta.frame_dir = dir;
  std::vector<std::pair<long, fs::path>> numbered;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || !is_frame_file(entry.path())) continue;
    const auto num = numeric_stem(entry.path());
    if (!num) {
      throw DataError("non-numeric frame file name in video '" + meta.video_id +
                      "': " + entry.path().filename().string());
    }
    numbered.emplace_back(*num, entry.path());
  }
  if (numbered.empty()) {
    throw DataError("empty video: '" + meta.video_id + "' has no frame files");
  }
  std::sort(numbered.begin(), numbered.end());
  for (std::size_t i = 1; i < numbered.size(); ++i) {
    if (numbered[i].first != numbered[i - 1].first + 1) {
      throw DataError("non-contiguous frame numbering in video '" + meta.video_id +
                      "' around index " + std::to_string(numbered[i - 1].first));
    }
  }
  meta.frames.reserve(numbered.size());
  for (auto& [num, path] : numbered) meta.frames.push_back(std::move(path));
  meta.frame_count = static_cast<int>(meta.frames.size());
  return meta;
}

LabelTrack read_label_track(const fs::path& file, const VideoMeta& meta) {
  std::ifstream in(file);
  if (!in) {
    throw DataError("missing labels file for video '" + meta.video_id +
                    "': " + file.string());
  }
  LabelTrack track;
  track.video_id = meta.video_id;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // tolerate trailing whitespace / blank last line
    std::string t = line;
    t.erase(t.find_last_not_of(" \t\r") + 1);
    if (t.empty()) continue;
    if (t != "0" && t != "1") {
      throw DataError("bad label at " + file.string() + ":" + std::to_string(lineno) +
                      " (expected 0 or 1, got '" + t + "')");
    }
    track.labels.push_back(t == "1" ? 1 : 0);
  }
  if (static_cast<int>(track.labels.size()) != meta.frame_count) {
    throw DataError("label length mismatch for video '" + meta.video_id + "': " +
                    std::to_string(track.labels.size()) + " labels vs " +
                    std::to_string(meta.frame_count) + " frames");
  }
  return track;
}

}  // namespace

const VideoMeta& DatasetIndex::video(const std::string& id) const {
  for (const auto& v : videos) {
    if (v.video_id == id) return v;
  }
  throw DataError("unknown video id: '" + id + "'");
}

const LabelTrack& DatasetIndex::label_track(const std::string& id) const {
  for (const auto& t : labels) {
    if (t.video_id == id) return t;
  }
  throw DataError("no label track for video id: '" + id + "'");
}

DatasetIndex load_dataset(const fs::path& root, Split split) {
  DatasetIndex index;
  index.root = root;
  index.split = split;
  const fs::path split_dir = root / (split == Split::train ? "train" : "test");
  if (!fs::is_directory(split_dir)) {
    throw DataError("missing dataset directory: " + split_dir.string());
  }
  std::vector<fs::path> video_dirs;
  for (const auto& entry : fs::directory_iterator(split_dir)) {
    if (entry.is_directory()) video_dirs.push_back(entry.path());
  }
  if (video_dirs.empty()) {
    throw DataError("no videos found under " + split_dir.string());
  }
  std::sort(video_dirs.begin(), video_dirs.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.filename().string() < b.filename().string();
            });
  for (const auto& dir : video_dirs) index.videos.push_back(scan_video_dir(dir));

  if (split == Split::test) {
    const fs::path label_dir = root / "test_labels";
    for (const auto& meta : index.videos) {
      index.labels.push_back(
          read_label_track(label_dir / (meta.video_id + ".txt"), meta));
    }
  }
  return index;
}

Frame decode_frame(const VideoMeta& meta, int idx, int height, int width) {
  if (idx < 1 || idx > meta.frame_count) {
    throw DataError("frame index " + std::to_string(idx) + " out of range [1, " +
                    std::to_string(meta.frame_count) + "] for video '" +
                    meta.video_id + "'");
  }
  Frame f;
  f.pixels = decode_gray(meta.frames[static_cast<std::size_t>(idx - 1)], height, width);
  f.source_index = idx;
  return f;
}

FrameProvider::FrameProvider(int height, int width, std::size_t cache_mb)
    : height_(height), width_(width), cache_limit_bytes_(cache_mb * 1024 * 1024) {}

Tensor FrameProvider::frame(const VideoMeta& meta, int idx) {
  const auto key = std::make_pair(meta.video_id, idx);
  {
    std::lock_guard<std::mutex> lock(mu_);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  Tensor px = decode_frame(meta, idx, height_, width_).pixels;
  {
    std::lock_guard<std::mutex> lock(mu_);
    const std::size_t bytes = px.numel() * sizeof(float);
    if (cache_bytes_ + bytes <= cache_limit_bytes_) {
      const auto [it, inserted] = cache_.emplace(key, px);
      if (inserted) cache_bytes_ += bytes;
    }
  }
  return px;
}

Clip sample_normal_clip(FrameProvider& frames, const VideoMeta& meta, int n, int T) {
  if (n < 1 || n + T - 1 > meta.frame_count) {
    throw DataError("normal clip out of bounds for video '" + meta.video_id +
                    "': n=" + std::to_string(n) + ", T=" + std::to_string(T) +
                    ", K=" + std::to_string(meta.frame_count));
  }
  const int H = frames.height(), W = frames.width();
  Clip clip;
  clip.data = Tensor({T, 1, H, W});
  for (int t = 0; t < T; ++t) {
    const Tensor px = frames.frame(meta, n + t);
    std::copy(px.data(), px.data() + px.numel(),
              clip.data.data() + static_cast<std::size_t>(t) * H * W);
  }
  clip.spec = ClipSpec{meta.video_id, n, 1, T};
  clip.is_pseudo = false;
  return clip;
}

int sample_start_index(const VideoMeta& meta, int T, int s, Rng& rng) {
  const int span = (T - 1) * s + 1;
  if (meta.frame_count < span) {
    throw DataError("video '" + meta.video_id + "' too short: K=" +
                    std::to_string(meta.frame_count) + " < required " +
                    std::to_string(span) + " for T=" + std::to_string(T) +
                    ", s=" + std::to_string(s));
  }
  return static_cast<int>(rng.uniform_int(1, meta.frame_count - (T - 1) * s));
}

}  // namespace steal
