#pragma once

#include <cstdint>
#include <vector>

#include "steal/dataset.hpp"
#include "steal/rng.hpp"

namespace steal {

// Skip-frame pseudo-anomaly synthesis: with probability p a training input
// is a stride-s clip (s drawn from skip_set), otherwise a stride-1 clip.
struct SynthConfig {
  std::vector<int> skip_set{2, 3, 4, 5};  // every value must be > 1
  double p = 0.01;                        // pseudo-anomaly probability

  void validate() const;
};

// Uniform draw from skip_set.
int draw_skip(const SynthConfig& cfg, Rng& rng);

// (I_n, I_{n+s}, ..., I_{n+(T-1)s}) with s > 1; is_pseudo = true.
Clip sample_pseudo_clip(FrameProvider& frames, const VideoMeta& meta, int n, int s,
                        int T);

struct SelectStats {
  long long normal = 0;
  long long pseudo = 0;
  long long fallback = 0;  // pseudo branch taken but no feasible skip
};

// Per-sample input selection: Bernoulli(p) chooses the pseudo branch, which
// draws s uniformly from the skips feasible for this video, then a start
// index. When p == 0 the branch draw is skipped entirely so the sample
// stream is identical to a pipeline without the synthesizer. If no skip is
// feasible the sample falls back to a normal clip (counted in stats).
Clip select_input(FrameProvider& frames, const VideoMeta& meta, const SynthConfig& cfg,
                  int T, Rng& rng, SelectStats* stats = nullptr);

}  // namespace steal
