#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seqshift/layers.hpp"
#include "seqshift/weights.hpp"

namespace seqshift {

enum class Family { kConv, kDense, kRes };
enum class SideKind { kOneLayer, kBlock };

struct NetworkConfig {
  std::string name;  // conv1..conv4, dense1..dense4, res1..res4
  Family family = Family::kConv;
  std::vector<int> sizes;  // channels per block (conv/res) or layers per block (dense)
  int num_classes = 10;
  int in_channels = 3;
  int image_size = 32;
  int scale_factor = 1;  // divides every channel count (and the dense growth)
  int dense_growth = 32;

  // e.g. from_name("res4", 10) builds the Table-4 architecture; pass a
  // scale factor for the desk-scale variant.
  static NetworkConfig from_name(const std::string& name, int num_classes = 10,
                                 int image_size = 32, int scale_factor = 1);
};

// y = sum of children applied to the same input.
class ParallelSum : public Layer {
 public:
  Tensor4 forward(const Tensor4& x, bool train) override;
  Tensor4 backward(const Tensor4& dy) override;
  void collect_params(const std::string& prefix, std::vector<Param*>* out) override;
  void init_params(Rng& rng) override;
  void set_frozen(bool frozen) override;
  void set_mask_freeze(bool on) override;
  void add(std::string name, std::unique_ptr<Layer> child);

 private:
  std::vector<std::pair<std::string, std::unique_ptr<Layer>>> children_;
};

// conv-bn-relu-conv-bn plus the skip path, relu after the add.
class BasicBlock : public Layer {
 public:
  BasicBlock(int in_ch, int out_ch, int stride);
  Tensor4 forward(const Tensor4& x, bool train) override;
  Tensor4 backward(const Tensor4& dy) override;
  void collect_params(const std::string& prefix, std::vector<Param*>* out) override;
  void init_params(Rng& rng) override;
  void set_frozen(bool frozen) override;
  void set_mask_freeze(bool on) override;
  bool has_projection() const { return static_cast<bool>(proj_); }

 private:
  Sequential main_;
  std::unique_ptr<Sequential> proj_;  // 1x1 conv + bn when shapes differ
  std::vector<char> relu_mask_;
};

// BN-ReLU-Conv1x1(4g)-BN-ReLU-Conv3x3(g); the block concatenates outputs.
class DenseBlock : public Layer {
 public:
  DenseBlock(int in_ch, int num_layers, int growth, bool zero_passthrough = false);
  Tensor4 forward(const Tensor4& x, bool train) override;
  Tensor4 backward(const Tensor4& dy) override;
  void collect_params(const std::string& prefix, std::vector<Param*>* out) override;
  void init_params(Rng& rng) override;
  void set_frozen(bool frozen) override;
  void set_mask_freeze(bool on) override;
  int out_channels() const { return in_ch_ + num_layers_ * growth_; }
  // zero-init the last conv of every layer (side-module variant)
  void zero_init_outputs();

 private:
  int in_ch_, num_layers_, growth_;
  bool zero_passthrough_;
  std::vector<std::unique_ptr<Sequential>> layers_;
};

// One sideable unit plus its attached side modules.
struct SidedBlock {
  std::unique_ptr<Layer> base;
  std::vector<std::unique_ptr<Layer>> sides;
  int in_ch = 0, out_ch = 0, stride = 1;
  int dense_layers = 0;   // dense family
  bool res_proj = false;  // res family: base has a projection skip
  int last_active = -1;   // sides used by the most recent forward

  Tensor4 forward(const Tensor4& x, bool train, int active_sides);
  Tensor4 backward(const Tensor4& dy);
};

struct ForwardCapture {
  // spatially averaged activations after the stem and after each block,
  // plus the logits; one row per sample
  std::vector<Eigen::MatrixXd> taps;
  std::vector<std::string> tap_names;
};

class Net {
 public:
  explicit Net(const NetworkConfig& cfg);

  void init_params(std::uint64_t seed);

  // active_sides: -1 = all attached sides, k = sides 0..k-1 (per block).
  Tensor4 forward(const Tensor4& x, bool train, int active_sides = -1,
                  ForwardCapture* capture = nullptr);
  void backward(const Tensor4& dlogits);
  void zero_grads();

  // One side module per block. Returns the new side index. New sides are
  // initialized from `seed` and output exactly zero until trained.
  int attach_sides(SideKind kind, std::uint64_t seed);
  int num_sides() const { return num_sides_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }

  std::vector<Param*>& params() { return params_; }
  const NetworkConfig& config() const { return cfg_; }
  long long param_count(bool trainable_only = true) const;
  long long side_param_count(int side_index) const;
  long long block_param_count(int block_index) const;

  WeightVector snapshot() const;
  void load(const WeightVector& w);

  // Freezing by component prefix: "", "stem", "head", "blocks" (all bases),
  // "block2", "block2.side0", "sides" (all sides).
  void set_frozen_all(bool frozen);
  void set_frozen_prefix(const std::string& prefix, bool frozen);
  void set_mask_freeze(bool on);

 private:
  void rebuild_registry();
  struct Component {
    std::string name;
    Layer* layer;
  };

  NetworkConfig cfg_;
  Sequential stem_;
  std::vector<SidedBlock> blocks_;
  std::vector<std::unique_ptr<Sequential>> transitions_;  // dense family
  Sequential head_;
  int num_sides_ = 0;
  std::vector<Param*> params_;
  std::vector<Component> components_;
};

// Helpers shared by training and analysis.
Eigen::MatrixXd logits_to_matrix(const Tensor4& logits);
std::vector<real> logits_to_vector(const Tensor4& logits);

}  // namespace seqshift
