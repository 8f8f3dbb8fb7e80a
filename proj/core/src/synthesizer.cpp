#include "steal/synthesizer.hpp"

#include <algorithm>

#include "steal/errors.hpp"

namespace steal {

void SynthConfig::validate() const {
  if (skip_set.empty()) throw DataError("synth.skip_set must be non-empty");
  for (int s : skip_set) {
    if (s <= 1) {
      throw DataError("synth.skip_set values must be > 1, got " + std::to_string(s));
    }
  }
  if (p < 0.0 || p > 1.0) {
    throw DataError("synth.p must lie in [0,1], got " + std::to_string(p));
  }
}

namespace {

int draw_from(const std::vector<int>& values, Rng& rng) {
  return values[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(values.size()) - 1))];
}

}  // namespace

int draw_skip(const SynthConfig& cfg, Rng& rng) {
  if (cfg.skip_set.empty()) throw DataError("draw_skip: empty skip set");
  return draw_from(cfg.skip_set, rng);
}

Clip sample_pseudo_clip(FrameProvider& frames, const VideoMeta& meta, int n, int s,
                        int T) {
  if (s <= 1) {
    throw DataError("pseudo clip requires s>1, got s=" + std::to_string(s));
  }
  if (n < 1 || n + (T - 1) * s > meta.frame_count) {
    throw DataError("pseudo clip out of bounds for video '" + meta.video_id +
                    "': n=" + std::to_string(n) + ", s=" + std::to_string(s) +
                    ", T=" + std::to_string(T) +
                    ", K=" + std::to_string(meta.frame_count));
  }
  const int H = frames.height(), W = frames.width();
  Clip clip;
  clip.data = Tensor({T, 1, H, W});
  for (int t = 0; t < T; ++t) {
    const Tensor px = frames.frame(meta, n + t * s);
    std::copy(px.data(), px.data() + px.numel(),
              clip.data.data() + static_cast<std::size_t>(t) * H * W);
  }
  clip.spec = ClipSpec{meta.video_id, n, s, T};
  clip.is_pseudo = true;
  return clip;
}

Clip select_input(FrameProvider& frames, const VideoMeta& meta, const SynthConfig& cfg,
                  int T, Rng& rng, SelectStats* stats) {
  cfg.validate();
  // p == 0 consumes no branch entropy: the baseline sample stream matches a
  // build with the synthesizer absent.
  if (cfg.p > 0.0 && rng.bernoulli(cfg.p)) {
    std::vector<int> feasible;
    for (int s : cfg.skip_set) {
      if ((T - 1) * s + 1 <= meta.frame_count) feasible.push_back(s);
    }
    std::sort(feasible.begin(), feasible.end());
    if (!feasible.empty()) {
      const int s = draw_from(feasible, rng);
      const int n = sample_start_index(meta, T, s, rng);
      if (stats) ++stats->pseudo;
      return sample_pseudo_clip(frames, meta, n, s, T);
    }
    if (stats) ++stats->fallback;
  }
  const int n = sample_start_index(meta, T, 1, rng);
  if (stats) ++stats->normal;
  return sample_normal_clip(frames, meta, n, T);
}

}  // namespace steal
