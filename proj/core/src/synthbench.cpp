#include "steal/synthbench.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>

#include "steal/errors.hpp"
#include "steal/image.hpp"
#include "steal/rng.hpp"

namespace steal {

using json = nlohmann::json;
namespace fs = std::filesystem;

BenchConfig BenchConfig::from_run_config(const RunConfig& cfg) {
  BenchConfig bc;
  bc.frame_size = static_cast<int>(cfg.get_int("bench.frame_size"));
  bc.sprites_min = static_cast<int>(cfg.get_int("bench.sprites_min"));
  bc.sprites_max = static_cast<int>(cfg.get_int("bench.sprites_max"));
  bc.speed = static_cast<int>(cfg.get_int("bench.speed"));
  bc.anomaly_multiplier = static_cast<int>(cfg.get_int("bench.anomaly_multiplier"));
  bc.train_videos = static_cast<int>(cfg.get_int("bench.train_videos"));
  bc.test_videos = static_cast<int>(cfg.get_int("bench.test_videos"));
  bc.frames_per_video = static_cast<int>(cfg.get_int("bench.frames_per_video"));
  bc.anomaly_len = static_cast<int>(cfg.get_int("bench.anomaly_len"));
  bc.seed = cfg.seed();
  bc.validate();
  return bc;
}

void BenchConfig::validate() const {
  if (frame_size < 16) throw DataError("bench.frame_size must be >= 16");
  if (sprites_min < 1 || sprites_max < sprites_min) {
    throw DataError("bench sprite count range invalid");
  }
  if (speed < 1) throw DataError("bench.speed must be >= 1");
  if (anomaly_multiplier < 2) {
    throw DataError("bench.anomaly_multiplier must be >= 2 (anomalies must leave the "
                    "normal-motion regime)");
  }
  if (train_videos < 1 || test_videos < 1) throw DataError("bench video counts must be >= 1");
  if (frames_per_video < 8) throw DataError("bench.frames_per_video must be >= 8");
  if (anomaly_len < 1 || anomaly_len >= frames_per_video) {
    throw DataError("bench.anomaly_len must fit inside the video");
  }
  // Keep the fastest sprite inside the frame: the largest sprite plus one
  // anomaly step must fit.
  const int max_half = 7;
  if (frame_size - 2 * max_half - 2 * speed * anomaly_multiplier <= 0) {
    throw DataError("bench.frame_size too small for the configured speeds");
  }
}

namespace {

SpriteSpec draw_sprite(const BenchConfig& cfg, Rng& rng) {
  SpriteSpec s;
  s.shape = rng.uniform_int(0, 1) == 0 ? SpriteSpec::Shape::rect : SpriteSpec::Shape::disc;
  s.half_w = static_cast<int>(rng.uniform_int(3, 7));
  s.half_h = static_cast<int>(rng.uniform_int(3, 7));
  s.intensity = static_cast<int>(rng.uniform_int(140, 255));
  const int lo_x = s.half_w, hi_x = cfg.frame_size - 1 - s.half_w;
  const int lo_y = s.half_h, hi_y = cfg.frame_size - 1 - s.half_h;
  s.x0 = static_cast<int>(rng.uniform_int(lo_x, hi_x));
  s.y0 = static_cast<int>(rng.uniform_int(lo_y, hi_y));
  s.vx = rng.uniform_int(0, 1) == 0 ? -1 : 1;
  s.vy = rng.uniform_int(0, 1) == 0 ? -1 : 1;
  return s;
}

VideoPlan draw_plan(const BenchConfig& cfg, std::uint64_t stream, const std::string& id,
                    bool anomalous) {
  Rng rng(Rng::derive_seed(cfg.seed, stream));
  VideoPlan plan;
  plan.video_id = id;
  plan.seed = Rng::derive_seed(cfg.seed, stream);
  const int count = static_cast<int>(rng.uniform_int(cfg.sprites_min, cfg.sprites_max));
  for (int i = 0; i < count; ++i) plan.sprites.push_back(draw_sprite(cfg, rng));
  if (anomalous) {
    if (cfg.anomaly_len >= cfg.frames_per_video) {
      throw DataError("anomaly interval exceeds video length");
    }
    // Keep a margin so scoring windows around the interval stay in-video.
    const int margin = std::min(32, (cfg.frames_per_video - cfg.anomaly_len) / 2);
    const int lo = 1 + margin;
    const int hi = cfg.frames_per_video - cfg.anomaly_len + 1 - margin;
    plan.anomaly_begin = static_cast<int>(rng.uniform_int(lo, std::max(lo, hi)));
    plan.anomaly_end = plan.anomaly_begin + cfg.anomaly_len - 1;
  }
  return plan;
}

}  // namespace

BenchManifest plan_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  BenchManifest manifest;
  manifest.config = cfg;
  char buf[32];
  for (int i = 0; i < cfg.train_videos; ++i) {
    std::snprintf(buf, sizeof(buf), "v%02d", i);
    manifest.train.push_back(
        draw_plan(cfg, static_cast<std::uint64_t>(i), buf, false));
  }
  for (int i = 0; i < cfg.test_videos; ++i) {
    std::snprintf(buf, sizeof(buf), "v%02d", i);
    manifest.test.push_back(
        draw_plan(cfg, 1000 + static_cast<std::uint64_t>(i), buf, true));
  }
  return manifest;
}

std::vector<std::pair<int, int>> sprite_trajectory(const SpriteSpec& sprite,
                                                   const VideoPlan& plan,
                                                   const BenchConfig& cfg) {
  std::vector<std::pair<int, int>> centers;
  centers.reserve(static_cast<std::size_t>(cfg.frames_per_video));
  int x = sprite.x0, y = sprite.y0;
  int vx = sprite.vx, vy = sprite.vy;
  const int lo_x = sprite.half_w, hi_x = cfg.frame_size - 1 - sprite.half_w;
  const int lo_y = sprite.half_h, hi_y = cfg.frame_size - 1 - sprite.half_h;
  centers.emplace_back(x, y);
  for (int f = 2; f <= cfg.frames_per_video; ++f) {
    const bool fast = plan.has_anomaly() && f >= plan.anomaly_begin && f <= plan.anomaly_end;
    const int substeps = cfg.speed * (fast ? cfg.anomaly_multiplier : 1);
    for (int s = 0; s < substeps; ++s) {
      int nx = x + vx;
      if (nx < lo_x || nx > hi_x) {
        vx = -vx;
        nx = x + vx;
      }
      x = nx;
      int ny = y + vy;
      if (ny < lo_y || ny > hi_y) {
        vy = -vy;
        ny = y + vy;
      }
      y = ny;
    }
    centers.emplace_back(x, y);
  }
  return centers;
}

namespace {

void render_video(const VideoPlan& plan, const BenchConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  const int size = cfg.frame_size;
  std::vector<std::vector<std::pair<int, int>>> tracks;
  for (const auto& sprite : plan.sprites) {
    tracks.push_back(sprite_trajectory(sprite, plan, cfg));
  }
  std::vector<unsigned char> canvas(static_cast<std::size_t>(size) * size);
  char name[32];
  for (int f = 1; f <= cfg.frames_per_video; ++f) {
    std::fill(canvas.begin(), canvas.end(), static_cast<unsigned char>(0));
    for (std::size_t si = 0; si < plan.sprites.size(); ++si) {
      const SpriteSpec& sp = plan.sprites[si];
      const auto [cx, cy] = tracks[si][static_cast<std::size_t>(f - 1)];
      const auto val = static_cast<unsigned char>(sp.intensity);
      for (int dy = -sp.half_h; dy <= sp.half_h; ++dy) {
        for (int dx = -sp.half_w; dx <= sp.half_w; ++dx) {
          if (sp.shape == SpriteSpec::Shape::disc) {
            const double rx = static_cast<double>(dx) / sp.half_w;
            const double ry = static_cast<double>(dy) / sp.half_h;
            if (rx * rx + ry * ry > 1.0) continue;
          }
          const int px = cx + dx, py = cy + dy;
          if (px < 0 || px >= size || py < 0 || py >= size) continue;
          auto& cell = canvas[static_cast<std::size_t>(py) * size + px];
          cell = std::max(cell, val);
        }
      }
    }
    std::snprintf(name, sizeof(name), "%06d.png", f);
    write_gray_u8_png(dir / name, size, size, canvas.data());
  }
}

void write_labels(const VideoPlan& plan, const BenchConfig& cfg, const fs::path& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write labels: " + file.string());
  for (int f = 1; f <= cfg.frames_per_video; ++f) {
    const bool anomalous =
        plan.has_anomaly() && f >= plan.anomaly_begin && f <= plan.anomaly_end;
    out << (anomalous ? 1 : 0) << "\n";
  }
}

json sprite_to_json(const SpriteSpec& s) {
  return json{{"shape", s.shape == SpriteSpec::Shape::rect ? "rect" : "disc"},
              {"half_w", s.half_w},
              {"half_h", s.half_h},
              {"intensity", s.intensity},
              {"x0", s.x0},
              {"y0", s.y0},
              {"vx", s.vx},
              {"vy", s.vy}};
}

SpriteSpec sprite_from_json(const json& j) {
  SpriteSpec s;
  s.shape = j.at("shape").get<std::string>() == "disc" ? SpriteSpec::Shape::disc
                                                       : SpriteSpec::Shape::rect;
  s.half_w = j.at("half_w").get<int>();
  s.half_h = j.at("half_h").get<int>();
  s.intensity = j.at("intensity").get<int>();
  s.x0 = j.at("x0").get<int>();
  s.y0 = j.at("y0").get<int>();
  s.vx = j.at("vx").get<int>();
  s.vy = j.at("vy").get<int>();
  return s;
}

json plan_to_json(const VideoPlan& plan) {
  json sprites = json::array();
  for (const auto& s : plan.sprites) sprites.push_back(sprite_to_json(s));
  return json{{"video_id", plan.video_id},
              {"seed", plan.seed},
              {"sprites", sprites},
              {"anomaly_begin", plan.anomaly_begin},
              {"anomaly_end", plan.anomaly_end}};
}

VideoPlan plan_from_json(const json& j) {
  VideoPlan plan;
  plan.video_id = j.at("video_id").get<std::string>();
  plan.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& s : j.at("sprites")) plan.sprites.push_back(sprite_from_json(s));
  plan.anomaly_begin = j.at("anomaly_begin").get<int>();
  plan.anomaly_end = j.at("anomaly_end").get<int>();
  return plan;
}

}  // namespace

void render_benchmark(const BenchManifest& manifest, const fs::path& root) {
  const BenchConfig& cfg = manifest.config;
  fs::create_directories(root / "train");
  fs::create_directories(root / "test");
  fs::create_directories(root / "test_labels");
  for (const auto& plan : manifest.train) {
    if (plan.has_anomaly()) {
      // One-class protocol: the train split must stay anomaly-free.
      throw DataError("train plan '" + plan.video_id + "' carries an anomaly interval");
    }
    render_video(plan, cfg, root / "train" / plan.video_id);
  }
  for (const auto& plan : manifest.test) {
    render_video(plan, cfg, root / "test" / plan.video_id);
    write_labels(plan, cfg, root / "test_labels" / (plan.video_id + ".txt"));
  }
}

BenchManifest build_benchmark(const BenchConfig& cfg, const fs::path& root) {
  BenchManifest manifest = plan_benchmark(cfg);
  render_benchmark(manifest, root);
  save_manifest(root / "manifest.json", manifest);
  return manifest;
}

void save_manifest(const fs::path& file, const BenchManifest& manifest) {
  const BenchConfig& c = manifest.config;
  json j;
  j["config"] = {{"frame_size", c.frame_size},
                 {"sprites_min", c.sprites_min},
                 {"sprites_max", c.sprites_max},
                 {"speed", c.speed},
                 {"anomaly_multiplier", c.anomaly_multiplier},
                 {"train_videos", c.train_videos},
                 {"test_videos", c.test_videos},
                 {"frames_per_video", c.frames_per_video},
                 {"anomaly_len", c.anomaly_len},
                 {"seed", c.seed}};
  json train = json::array(), test = json::array();
  for (const auto& p : manifest.train) train.push_back(plan_to_json(p));
  for (const auto& p : manifest.test) test.push_back(plan_to_json(p));
  j["train"] = train;
  j["test"] = test;
  std::ofstream out(file);
  if (!out) throw DataError("cannot write manifest: " + file.string());
  out << j.dump(2) << "\n";
}

BenchManifest load_manifest(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open manifest: " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("malformed manifest: " + std::string(e.what()));
  }
  BenchManifest manifest;
  const json& c = j.at("config");
  manifest.config.frame_size = c.at("frame_size").get<int>();
  manifest.config.sprites_min = c.at("sprites_min").get<int>();
  manifest.config.sprites_max = c.at("sprites_max").get<int>();
  manifest.config.speed = c.at("speed").get<int>();
  manifest.config.anomaly_multiplier = c.at("anomaly_multiplier").get<int>();
  manifest.config.train_videos = c.at("train_videos").get<int>();
  manifest.config.test_videos = c.at("test_videos").get<int>();
  manifest.config.frames_per_video = c.at("frames_per_video").get<int>();
  manifest.config.anomaly_len = c.at("anomaly_len").get<int>();
  manifest.config.seed = c.at("seed").get<std::uint64_t>();
  for (const auto& p : j.at("train")) manifest.train.push_back(plan_from_json(p));
  for (const auto& p : j.at("test")) manifest.test.push_back(plan_from_json(p));
  return manifest;
}

}  // namespace steal
