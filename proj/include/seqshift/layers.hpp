#pragma once

#include <memory>
#include <string>
#include <vector>

#include "seqshift/rng.hpp"
#include "seqshift/tensor.hpp"

namespace seqshift {

struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<real> value;
  std::vector<real> grad;
  bool trainable = true;  // running statistics are stored but not trained
  bool frozen = false;

  std::size_t count() const { return value.size(); }
  void resize(std::vector<int> s) {
    shape = std::move(s);
    std::size_t total = 1;
    for (int d : shape) total *= static_cast<std::size_t>(d);
    value.assign(total, real(0));
    grad.assign(total, real(0));
  }
};

// Layers cache what their backward pass needs; forward/backward pairs on
// one layer instance must not interleave across batches.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor4 forward(const Tensor4& x, bool train) = 0;
  virtual Tensor4 backward(const Tensor4& dy) = 0;
  virtual void collect_params(const std::string& prefix, std::vector<Param*>* out) {}
  virtual void init_params(Rng& rng) {}
  // Frozen layers skim training: batch norm switches to running stats.
  virtual void set_frozen(bool frozen) { frozen_ = frozen; }
  bool frozen() const { return frozen_; }

  // While on, ReLU kinks reuse the masks cached by the last unfrozen
  // forward, which makes the network locally smooth for finite-difference
  // probes without changing the gradient at the probe point.
  virtual void set_mask_freeze(bool on) { mask_freeze_ = on; }

 protected:
  bool frozen_ = false;
  bool mask_freeze_ = false;
};

class Conv2d : public Layer {
 public:
  Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad, bool bias = false);
  Tensor4 forward(const Tensor4& x, bool train) override;
  Tensor4 backward(const Tensor4& dy) override;
  void collect_params(const std::string& prefix, std::vector<Param*>* out) override;
  void init_params(Rng& rng) override;
  void zero_init_weight();

  Param weight;  // (out, in, k, k)
  Param bias_p;  // (out), only when has_bias_
  int in_ch_, out_ch_, kernel_, stride_, pad_;
  bool has_bias_;

 private:
  Tensor4 x_cache_;
  std::vector<real> col_;  // im2col buffer for one sample
};

class BatchNorm : public Layer {
 public:
  explicit BatchNorm(int channels, real momentum = 0.1, real eps = 1e-5);
  Tensor4 forward(const Tensor4& x, bool train) override;
  Tensor4 backward(const Tensor4& dy) override;
  void collect_params(const std::string& prefix, std::vector<Param*>* out) override;
  void init_params(Rng& rng) override;
  void zero_init_gamma();

  Param gamma, beta, running_mean, running_var;

 private:
  int channels_;
  real momentum_, eps_;
  bool used_batch_stats_ = false;
  Tensor4 x_cache_;
  std::vector<real> mean_, var_, inv_std_;
};

class ReLU : public Layer {
 public:
  Tensor4 forward(const Tensor4& x, bool train) override;
  Tensor4 backward(const Tensor4& dy) override;

 private:
  std::vector<char> mask_;
};

class GlobalAvgPool : public Layer {
 public:
  Tensor4 forward(const Tensor4& x, bool train) override;
  Tensor4 backward(const Tensor4& dy) override;

 private:
  int h_ = 0, w_ = 0, c_ = 0;
};

// 2x2 average pooling with stride 2 (DenseNet transitions).
class AvgPool2 : public Layer {
 public:
  Tensor4 forward(const Tensor4& x, bool train) override;
  Tensor4 backward(const Tensor4& dy) override;

 private:
  int h_ = 0, w_ = 0;
};

class Linear : public Layer {
 public:
  Linear(int in_features, int out_features);
  Tensor4 forward(const Tensor4& x, bool train) override;  // x flattened per sample
  Tensor4 backward(const Tensor4& dy) override;
  void collect_params(const std::string& prefix, std::vector<Param*>* out) override;
  void init_params(Rng& rng) override;

  Param weight;  // (out, in)
  Param bias;    // (out)
  int in_features_, out_features_;

 private:
  Tensor4 x_cache_;
};

// A plain sequential chain of layers.
class Sequential : public Layer {
 public:
  Tensor4 forward(const Tensor4& x, bool train) override;
  Tensor4 backward(const Tensor4& dy) override;
  void collect_params(const std::string& prefix, std::vector<Param*>* out) override;
  void init_params(Rng& rng) override;
  void set_frozen(bool frozen) override;

  void add(std::string name, std::unique_ptr<Layer> layer);
  void set_mask_freeze(bool on) override;
  Layer* layer(std::size_t i) { return layers_[i].second.get(); }
  std::size_t size() const { return layers_.size(); }

 private:
  std::vector<std::pair<std::string, std::unique_ptr<Layer>>> layers_;
};

// Softmax cross-entropy on logits (rows = samples).
struct SoftmaxCE {
  // mean loss; fills dlogits with d(mean loss)/dlogits
  static real loss_and_grad(const std::vector<real>& logits, int batch, int classes,
                            const std::vector<int>& labels, std::vector<real>* dlogits);
  static real loss_only(const std::vector<real>& logits, int batch, int classes,
                        const std::vector<int>& labels);
};

}  // namespace seqshift
