#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "steal/dataset.hpp"
#include "steal/tensor.hpp"

namespace steal {

// 3-D convolutional autoencoder over T x C x H x W clips, bounded output
// (final tanh). Two presets: the full-scale schedule (16x1x256x256) and a
// desk-scale one (8x1x64x64) that trains on a CPU in minutes.

enum class Preset { paper, desk };

Preset preset_from_string(const std::string& name);
std::string preset_to_string(Preset preset);

enum class LayerKind { conv3d, deconv3d };
enum class NormKind { batch, none };
enum class ActKind { leaky_relu, tanh, none };

struct Shape3 {
  int t = 1, h = 1, w = 1;
};

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::conv3d;
  int in_channels = 0, out_channels = 0;
  Shape3 kernel, stride, pad, output_pad;  // output_pad applies to deconv3d
  NormKind norm = NormKind::none;
  ActKind act = ActKind::none;
  Shape3 in_size, out_size;  // feature volume sizes under the preset input
};

struct ModelShape {
  int T = 0, C = 0, H = 0, W = 0;
};

ModelShape preset_input_shape(Preset preset);
std::vector<LayerSpec> preset_schedule(Preset preset);

enum class Mode { train, eval };

template <typename S>
struct LayerParams {
  TensorT<S> weight;  // conv: [out,in,kt,kh,kw]; deconv: [in,out,kt,kh,kw]
  TensorT<S> bias;    // [out]
  TensorT<S> gamma, beta, running_mean, running_var;  // batch norm only
};

template <typename S>
struct LayerGrads {
  TensorT<S> weight, bias, gamma, beta;
  void zero();
};

// Activations and batch-norm intermediates captured by a training-mode
// forward pass; owned by the caller so concurrent workers stay independent.
template <typename S>
struct ForwardCache {
  std::vector<TensorT<S>> acts;      // acts[0] = input, acts[l+1] = layer l output
  std::vector<TensorT<S>> pre_norm;  // z (post conv, pre norm) per layer
  std::vector<std::vector<double>> bn_mean, bn_var;
};

template <typename S>
class Autoencoder {
 public:
  // Deterministic fan-in initialization from (preset, seed).
  Autoencoder(Preset preset, std::uint64_t seed);

  Preset preset() const { return preset_; }
  ModelShape input_shape() const { return in_shape_; }
  const std::vector<LayerSpec>& schedule() const { return schedule_; }

  std::vector<LayerParams<S>>& layers() { return params_; }
  const std::vector<LayerParams<S>>& layers() const { return params_; }

  // x: {N, C, T, H, W}. Train mode normalizes with batch statistics and,
  // unless disabled, folds them into the running averages.
  TensorT<S> forward(const TensorT<S>& x, Mode mode, ForwardCache<S>* cache = nullptr,
                     bool update_running = true);

  // Eval-mode forward; safe for concurrent callers on shared frozen params.
  TensorT<S> reconstruct(const TensorT<S>& x) const;

  // Clip-shaped ({T,C,H,W}) eval forward.
  TensorT<S> reconstruct_clip(const TensorT<S>& clip) const;

  // Gradients of all trainable tensors given d(loss)/d(output).
  void backward(const TensorT<S>& grad_out, const ForwardCache<S>& cache,
                std::vector<LayerGrads<S>>& grads) const;

  std::vector<LayerGrads<S>> make_grads() const;

  // Trainable tensors (weight, bias, gamma, beta) in a fixed order matched
  // by grad_tensors(); running stats are excluded.
  std::vector<TensorT<S>*> trainable_tensors();
  static std::vector<TensorT<S>*> grad_tensors(std::vector<LayerGrads<S>>& grads);

  std::size_t parameter_count() const;

  template <typename U>
  Autoencoder<U> cast() const {
    Autoencoder<U> out(preset_, 0);
    for (std::size_t l = 0; l < params_.size(); ++l) {
      out.layers()[l].weight = params_[l].weight.template cast<U>();
      out.layers()[l].bias = params_[l].bias.template cast<U>();
      out.layers()[l].gamma = params_[l].gamma.template cast<U>();
      out.layers()[l].beta = params_[l].beta.template cast<U>();
      out.layers()[l].running_mean = params_[l].running_mean.template cast<U>();
      out.layers()[l].running_var = params_[l].running_var.template cast<U>();
    }
    return out;
  }

 private:
  void check_input(const TensorT<S>& x) const;

  Preset preset_;
  ModelShape in_shape_;
  std::vector<LayerSpec> schedule_;
  std::vector<LayerParams<S>> params_;
};

// {N,C,T,H,W} batch from clips sharing one shape.
Tensor stack_clips(std::span<const Clip> clips);

// Extract frame (0-based offset) of a {T,C,H,W} reconstruction as {H,W}.
template <typename S>
TensorT<S> clip_frame(const TensorT<S>& clip, int t);

extern template class Autoencoder<float>;
extern template class Autoencoder<double>;
extern template struct LayerGrads<float>;
extern template struct LayerGrads<double>;
extern template TensorT<float> clip_frame<float>(const TensorT<float>&, int);
extern template TensorT<double> clip_frame<double>(const TensorT<double>&, int);

}  // namespace steal
