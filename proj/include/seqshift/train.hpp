#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "seqshift/augment.hpp"
#include "seqshift/image.hpp"
#include "seqshift/network.hpp"

namespace seqshift {

enum class Precision { kSingle, kDouble };

struct TrainConfig {
  int epochs = 30;
  int batch_size = 64;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::uint64_t seed = 1;
  // Compute runs in double; `single` only selects 32-bit checkpoint
  // payloads, which is the on-disk format either way.
  Precision precision = Precision::kDouble;
  bool augment = true;
  AugmentConfig augment_cfg;
  bool downscale = false;  // 32x32 -> 16x16 before the stem
  bool select_best_by_val = true;
  // stop when validation accuracy has not improved for this many epochs
  // (0 = train the full epoch budget)
  int early_stop_patience = 0;

  void validate(std::size_t dataset_size) const;
};

struct EpochStats {
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int best_epoch = -1;
  double best_val_accuracy = 0.0;
  double final_test_accuracy = -1.0;
};

// Images promoted to [0,1]; one dataset index per tensor row.
Tensor4 images_to_tensor(const LabeledImageSet& set, const std::vector<int>& indices,
                         bool downscale);
Tensor4 images_to_tensor_augmented(const LabeledImageSet& set,
                                   const std::vector<int>& indices, bool downscale,
                                   const AugmentConfig& aug, std::uint64_t seed,
                                   int epoch);

class Sgd {
 public:
  Sgd(std::vector<Param*>* params, double lr, double momentum, double weight_decay);
  void step();
  void set_learning_rate(double lr) { lr_ = lr; }
  double learning_rate() const { return lr_; }

 private:
  std::vector<Param*>* params_;
  double lr_, momentum_, weight_decay_;
  std::vector<std::vector<real>> velocity_;
};

// One supervised run on (train, val): shuffled batches, SGD with momentum,
// per-epoch validation, best-epoch weights restored at the end.
// grad_hook runs after backward and before the SGD step (regularizer
// gradients); it must only touch param.grad.
TrainReport train_supervised(Net& net, const LabeledImageSet& train,
                             const LabeledImageSet* val, const TrainConfig& cfg,
                             int active_sides = -1,
                             const std::function<void(Net&)>* grad_hook = nullptr);

double eval_accuracy(Net& net, const LabeledImageSet& set, int batch_size,
                     bool downscale, int active_sides = -1);

double eval_loss(Net& net, const LabeledImageSet& set, int batch_size, bool downscale,
                 int active_sides = -1);

struct GradCheckReport {
  double max_rel_error = 0.0;
  int checked = 0;
  std::string worst_param;
  bool pass(double tolerance) const { return max_rel_error < tolerance; }
};

// Central finite differences (h = 1e-4) on a random subset of parameters
// against the analytic gradients left in param.grad by compute_grads.
// Restores all parameter and running-statistic values after probing.
GradCheckReport finite_difference_check(Net& net, const std::function<real()>& loss_fn,
                                        const std::function<void()>& compute_grads,
                                        double fraction, std::uint64_t seed);

// Softmax-CE gradient check in train mode.
GradCheckReport gradient_check(Net& net, const Tensor4& x, const std::vector<int>& labels,
                               double fraction, std::uint64_t seed);

}  // namespace seqshift
