#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "steal/model.hpp"
#include "steal/tensor.hpp"

namespace steal {

// Single-file checkpoint: magic + JSON header (format tag, preset, step,
// config snapshot, rng state, tensor directory) + raw float32 payload.
inline constexpr const char* kCheckpointFormat = "steal.ckpt.v1";

struct Checkpoint {
  Preset preset = Preset::desk;
  long long step = 0;
  std::map<std::string, std::string> config;
  std::string rng_state;
  // Model tensors (weights, biases, norm params and running stats).
  Autoencoder<float> model{Preset::desk, 0};
  // Optimizer state, parallel to model.trainable_tensors(); empty when the
  // checkpoint was saved without an optimizer.
  std::vector<Tensor> adam_m, adam_v;
  long long adam_t = 0;
};

void save_checkpoint(const std::filesystem::path& file, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace steal
