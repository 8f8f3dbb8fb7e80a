#include "steal/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "steal/checkpoint.hpp"
#include "steal/errors.hpp"

namespace steal {

TrainConfig TrainConfig::from_run_config(const RunConfig& cfg) {
  TrainConfig tc;
  tc.learning_rate = cfg.get_double("train.lr");
  tc.batch_size = static_cast<int>(cfg.get_int("train.batch_size"));
  tc.steps = cfg.get_int("train.steps");
  tc.seed = cfg.seed();
  tc.synth.skip_set = cfg.get_int_list("synth.skip_set");
  tc.synth.p = cfg.get_double("synth.p");
  tc.preset = preset_from_string(cfg.get_string("model.preset"));
  tc.checkpoint_every = cfg.get_int("train.checkpoint_every");
  tc.pseudo_loss_margin = cfg.get_double("train.pseudo_loss_margin");
  tc.adam_beta1 = cfg.get_double("train.adam_beta1");
  tc.adam_beta2 = cfg.get_double("train.adam_beta2");
  tc.adam_eps = cfg.get_double("train.adam_eps");
  tc.validate();
  return tc;
}

void TrainConfig::validate() const {
  if (learning_rate < 0) throw DataError("train.lr must be >= 0");
  if (batch_size < 1) throw DataError("train.batch_size must be >= 1");
  if (steps < 0) throw DataError("train.steps must be >= 0");
  if (pseudo_loss_margin < 0) throw DataError("train.pseudo_loss_margin must be >= 0");
  synth.validate();
}

template <typename S>
double loss_normal(const TensorT<S>& x, const TensorT<S>& xhat) {
  if (!x.same_shape(xhat)) {
    throw DataError("loss: shape mismatch " + x.shape_str() + " vs " + xhat.shape_str());
  }
  if (x.numel() == 0) throw DataError("loss: empty tensors");
  double acc = 0.0;
  const S* a = x.data();
  const S* b = xhat.data();
  const std::size_t n = x.numel();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(b[i]) - static_cast<double>(a[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(n);
}

template <typename S>
double loss_pseudo(const TensorT<S>& x, const TensorT<S>& xhat) {
  return -loss_normal(x, xhat);
}

template <typename S>
LossValue compute_loss(const Clip& clip, const TensorT<S>& xhat) {
  TensorT<S> data;
  if constexpr (std::is_same_v<S, float>) {
    data = clip.data;
  } else {
    data = clip.data.template cast<S>();
  }
  if (clip.is_pseudo) {
    return LossValue{loss_pseudo(data, xhat), LossKind::pseudo};
  }
  return LossValue{loss_normal(data, xhat), LossKind::normal};
}

template double loss_normal<float>(const Tensor&, const Tensor&);
template double loss_normal<double>(const TensorD&, const TensorD&);
template double loss_pseudo<float>(const Tensor&, const Tensor&);
template double loss_pseudo<double>(const TensorD&, const TensorD&);
template LossValue compute_loss<float>(const Clip&, const Tensor&);
template LossValue compute_loss<double>(const Clip&, const TensorD&);

Adam::Adam(double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::init(const std::vector<Tensor*>& params) {
  m_.clear();
  v_.clear();
  for (const Tensor* p : params) {
    m_.emplace_back(p->shape());
    v_.emplace_back(p->shape());
  }
  t_ = 0;
}

void Adam::restore(std::vector<Tensor> m, std::vector<Tensor> v, long long t) {
  m_ = std::move(m);
  v_ = std::move(v);
  t_ = t;
}

void Adam::step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads,
                double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw DataError("Adam::step: parameter/state count mismatch");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    const std::size_t n = p.numel();
    for (std::size_t j = 0; j < n; ++j) {
      const double gj = static_cast<double>(g[j]);
      const double mj = beta1_ * static_cast<double>(m[j]) + (1.0 - beta1_) * gj;
      const double vj = beta2_ * static_cast<double>(v[j]) + (1.0 - beta2_) * gj * gj;
      m[j] = static_cast<float>(mj);
      v[j] = static_cast<float>(vj);
      const double update = lr * (mj / bc1) / (std::sqrt(vj / bc2) + eps_);
      p[j] = static_cast<float>(static_cast<double>(p[j]) - update);
    }
  }
}

namespace {

std::string provenance_string(const std::vector<ClipSpec>& specs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (i) os << '|';
    os << specs[i].video_id << ':' << specs[i].start << ':' << specs[i].stride << ':'
       << (specs[i].stride > 1 ? 'P' : 'N');
  }
  return os.str();
}

}  // namespace

Trainer::Trainer(const TrainConfig& cfg, const DatasetIndex& train_split,
                 FrameProvider& frames, std::filesystem::path out_dir,
                 const std::map<std::string, std::string>& config_snapshot)
    : cfg_(cfg), data_(train_split), frames_(frames), out_dir_(std::move(out_dir)),
      snapshot_(config_snapshot), model_(cfg.preset, cfg.seed),
      adam_(cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps), rng_(cfg.seed) {
  cfg_.validate();
  if (data_.videos.empty()) throw DataError("trainer: empty training split");
  std::filesystem::create_directories(out_dir_);
  adam_.init(model_.trainable_tensors());
}

std::vector<Clip> Trainer::sample_batch() {
  const ModelShape shape = model_.input_shape();
  std::vector<Clip> batch;
  batch.reserve(static_cast<std::size_t>(cfg_.batch_size));
  for (int i = 0; i < cfg_.batch_size; ++i) {
    const auto vi = rng_.uniform_int(0, static_cast<std::int64_t>(data_.videos.size()) - 1);
    const VideoMeta& meta = data_.videos[static_cast<std::size_t>(vi)];
    batch.push_back(
        select_input(frames_, meta, cfg_.synth, shape.T, rng_, &select_stats_));
  }
  return batch;
}

StepRecord Trainer::train_step(const std::vector<Clip>& batch) {
  const auto t0 = std::chrono::steady_clock::now();
  if (batch.empty()) throw DataError("train_step: empty batch");
  const int N = static_cast<int>(batch.size());
  const Tensor x = stack_clips(batch);

  ForwardCache<float> cache;
  const Tensor xhat = model_.forward(x, Mode::train, &cache, true);

  // Per-clip mean squared errors, 64-bit accumulation.
  const long clip_numel = static_cast<long>(x.numel()) / N;
  std::vector<double> mse(static_cast<std::size_t>(N), 0.0);
  for (int n = 0; n < N; ++n) {
    const float* a = x.data() + static_cast<long>(n) * clip_numel;
    const float* b = xhat.data() + static_cast<long>(n) * clip_numel;
    double acc = 0.0;
    for (long i = 0; i < clip_numel; ++i) {
      const double d = static_cast<double>(b[i]) - static_cast<double>(a[i]);
      acc += d * d;
    }
    mse[static_cast<std::size_t>(n)] = acc / static_cast<double>(clip_numel);
  }

  double loss = 0.0;
  int pseudo_count = 0;
  const double margin = cfg_.pseudo_loss_margin;
  std::vector<double> coef(static_cast<std::size_t>(N), 0.0);
  for (int n = 0; n < N; ++n) {
    const std::size_t un = static_cast<std::size_t>(n);
    if (batch[un].is_pseudo) {
      ++pseudo_count;
      double contrib = -mse[un];
      bool clamped = false;
      if (margin > 0.0 && contrib < -margin) {
        contrib = -margin;
        clamped = true;
      }
      loss += contrib;
      coef[un] = clamped ? 0.0 : -2.0 / (static_cast<double>(clip_numel) * N);
    } else {
      loss += mse[un];
      coef[un] = 2.0 / (static_cast<double>(clip_numel) * N);
    }
  }
  loss /= N;

  if (!std::isfinite(loss)) {
    throw NumericError("non-finite loss at step " + std::to_string(step_ + 1) +
                       " (batch: " + provenance_string([&] {
                         std::vector<ClipSpec> specs;
                         for (const auto& c : batch) specs.push_back(c.spec);
                         return specs;
                       }()) + ")");
  }

  Tensor grad_out(xhat.shape());
  for (int n = 0; n < N; ++n) {
    const double c = coef[static_cast<std::size_t>(n)];
    const float* a = x.data() + static_cast<long>(n) * clip_numel;
    const float* b = xhat.data() + static_cast<long>(n) * clip_numel;
    float* gp = grad_out.data() + static_cast<long>(n) * clip_numel;
    for (long i = 0; i < clip_numel; ++i) {
      gp[i] = static_cast<float>(c * (static_cast<double>(b[i]) - static_cast<double>(a[i])));
    }
  }

  auto grads = model_.make_grads();
  model_.backward(grad_out, cache, grads);

  auto params = model_.trainable_tensors();
  auto grad_ptrs = Autoencoder<float>::grad_tensors(grads);
  adam_.step(params, grad_ptrs, cfg_.learning_rate);

  ++step_;
  pseudo_total_ += pseudo_count;

  StepRecord rec;
  rec.step = step_;
  rec.loss = loss;
  rec.normal_count = N - pseudo_count;
  rec.pseudo_count = pseudo_count;
  for (const auto& c : batch) rec.provenance.push_back(c.spec);
  rec.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return rec;
}

void Trainer::write_checkpoint(const std::filesystem::path& file) const {
  Checkpoint ckpt;
  ckpt.preset = cfg_.preset;
  ckpt.step = step_;
  ckpt.config = snapshot_;
  ckpt.rng_state = rng_.serialize();
  ckpt.model = model_;
  ckpt.adam_m = const_cast<Adam&>(adam_).moments1();
  ckpt.adam_v = const_cast<Adam&>(adam_).moments2();
  ckpt.adam_t = adam_.t();
  save_checkpoint(file, ckpt);
}

void Trainer::resume(const std::filesystem::path& file) {
  Checkpoint ckpt = load_checkpoint(file);
  if (ckpt.preset != cfg_.preset) {
    throw DataError("resume: checkpoint preset '" + preset_to_string(ckpt.preset) +
                    "' does not match configured '" + preset_to_string(cfg_.preset) + "'");
  }
  model_ = std::move(ckpt.model);
  if (!ckpt.adam_m.empty()) {
    adam_.restore(std::move(ckpt.adam_m), std::move(ckpt.adam_v), ckpt.adam_t);
  } else {
    adam_.init(model_.trainable_tensors());
  }
  if (!ckpt.rng_state.empty()) rng_.deserialize(ckpt.rng_state);
  step_ = ckpt.step;
}

TrainResult Trainer::run() {
  const std::filesystem::path journal_path = out_dir_ / "journal.csv";
  const bool fresh = step_ == 0;
  std::ofstream journal(journal_path, fresh ? std::ios::trunc : std::ios::app);
  if (!journal) throw DataError("cannot open journal: " + journal_path.string());
  if (fresh) {
    journal << "step,loss,normal_count,pseudo_count,provenance,wall_ms\n";
  }
  journal << std::setprecision(17);

  TrainResult result;
  result.journal = journal_path;
  double last_loss = std::numeric_limits<double>::quiet_NaN();
  while (step_ < cfg_.steps) {
    const auto batch = sample_batch();
    const StepRecord rec = train_step(batch);
    last_loss = rec.loss;
    journal << rec.step << ',' << rec.loss << ',' << rec.normal_count << ','
            << rec.pseudo_count << ',' << provenance_string(rec.provenance) << ','
            << std::llround(rec.wall_ms) << '\n';
    if (cfg_.checkpoint_every > 0 && step_ % cfg_.checkpoint_every == 0 &&
        step_ < cfg_.steps) {
      write_checkpoint(out_dir_ / ("ckpt_step" + std::to_string(step_) + ".steal"));
    }
  }
  journal.flush();

  const std::filesystem::path final_path = out_dir_ / "ckpt_final.steal";
  write_checkpoint(final_path);
  result.checkpoint = final_path;
  result.steps_run = step_;
  result.pseudo_total = pseudo_total_;
  result.final_loss = last_loss;
  return result;
}

}  // namespace steal
