#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "steal/config.hpp"
#include "steal/dataset.hpp"
#include "steal/model.hpp"
#include "steal/rng.hpp"
#include "steal/synthesizer.hpp"
#include "steal/tensor.hpp"

namespace steal {

// Objective: minimize reconstruction MSE on normal clips, maximize it on
// skip-frame pseudo clips (the loss sign flips with the clip flag).

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 4;
  long long steps = 2000;
  std::uint64_t seed = 1;
  SynthConfig synth;
  Preset preset = Preset::desk;
  long long checkpoint_every = 1000;
  // Optional floor max(-L_N, -margin) on the pseudo branch; 0 keeps the
  // unbounded objective.
  double pseudo_loss_margin = 0.0;
  double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-8;

  static TrainConfig from_run_config(const RunConfig& cfg);
  void validate() const;
};

enum class LossKind { normal, pseudo };

struct LossValue {
  double value = 0.0;
  LossKind kind = LossKind::normal;
};

// Mean squared error over all T*C*H*W elements, 64-bit accumulation.
template <typename S>
double loss_normal(const TensorT<S>& x, const TensorT<S>& xhat);

// Exactly -loss_normal evaluated on the pseudo clip's frames.
template <typename S>
double loss_pseudo(const TensorT<S>& x, const TensorT<S>& xhat);

// Dispatch on the clip's is_pseudo flag.
template <typename S>
LossValue compute_loss(const Clip& clip, const TensorT<S>& xhat);

extern template double loss_normal<float>(const Tensor&, const Tensor&);
extern template double loss_normal<double>(const TensorD&, const TensorD&);
extern template double loss_pseudo<float>(const Tensor&, const Tensor&);
extern template double loss_pseudo<double>(const TensorD&, const TensorD&);
extern template LossValue compute_loss<float>(const Clip&, const Tensor&);
extern template LossValue compute_loss<double>(const Clip&, const TensorD&);

// Adaptive-moment gradient descent with bias correction.
class Adam {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void init(const std::vector<Tensor*>& params);
  bool initialized() const { return !m_.empty(); }
  void step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads,
            double lr);

  long long t() const { return t_; }
  std::vector<Tensor>& moments1() { return m_; }
  std::vector<Tensor>& moments2() { return v_; }
  void restore(std::vector<Tensor> m, std::vector<Tensor> v, long long t);
  double beta1() const { return beta1_; }
  double beta2() const { return beta2_; }
  double eps() const { return eps_; }

 private:
  double beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<Tensor> m_, v_;
};

struct StepRecord {
  long long step = 0;
  double loss = 0.0;
  int normal_count = 0;
  int pseudo_count = 0;
  std::vector<ClipSpec> provenance;  // stride > 1 marks the pseudo entries
  double wall_ms = 0.0;
};

struct TrainResult {
  std::filesystem::path checkpoint;
  std::filesystem::path journal;
  long long steps_run = 0;
  long long pseudo_total = 0;
  double final_loss = 0.0;
};

// Owns the model, optimizer, sampling rng and journal for one training run.
class Trainer {
 public:
  Trainer(const TrainConfig& cfg, const DatasetIndex& train_split,
          FrameProvider& frames, std::filesystem::path out_dir,
          const std::map<std::string, std::string>& config_snapshot = {});

  // One optimizer step on an explicit batch (exposed for tests).
  StepRecord train_step(const std::vector<Clip>& batch);

  std::vector<Clip> sample_batch();

  // Full loop with journal + periodic checkpoints; returns final checkpoint.
  TrainResult run();

  // Resume from a checkpoint produced by this configuration.
  void resume(const std::filesystem::path& ckpt);

  Autoencoder<float>& model() { return model_; }
  Adam& optimizer() { return adam_; }
  Rng& rng() { return rng_; }
  long long step() const { return step_; }

 private:
  void write_checkpoint(const std::filesystem::path& file) const;

  TrainConfig cfg_;
  const DatasetIndex& data_;
  FrameProvider& frames_;
  std::filesystem::path out_dir_;
  std::map<std::string, std::string> snapshot_;
  Autoencoder<float> model_;
  Adam adam_;
  Rng rng_;
  long long step_ = 0;
  long long pseudo_total_ = 0;
  SelectStats select_stats_;
};

}  // namespace steal
