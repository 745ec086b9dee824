#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seqshift/network.hpp"
#include "seqshift/sequence.hpp"
#include "seqshift/train.hpp"

namespace seqshift {

enum class MethodId {
  kOracle,
  kBaseline,
  kErm,
  kIrm,
  kDro,
  kFt,
  kLpFt,
  kIFt,
  kDFt,
  kSt1,
  kStB,
  kSft,
  kEwc,
  kSst1,
  kSstB,
  kJm,
  kJst1,
  kJstB,
};

const char* method_name(MethodId id);
MethodId method_from_name(const std::string& name);
std::vector<MethodId> all_methods();

enum class LrSchedule { kNone, kLinear, kExponential };

struct MethodConfig {
  MethodId method = MethodId::kBaseline;
  TrainConfig train;

  double lambda_irm = 10.0;
  double lambda_ewc = 10.0;
  int fisher_max_samples = 512;

  LrSchedule sft_schedule = LrSchedule::kExponential;
  double sft_lr0 = -1.0;  // defaults to train.learning_rate
  double sft_delta = 0.01;
  double sft_gamma = 0.7;
  std::vector<double> sft_lr_grid = {0.05, 0.02, 0.01};

  SideKind side_kind = SideKind::kOneLayer;
  int lp_patience = 5;
  int lp_max_epochs = 60;

  // joint family
  double lambda_adj = 1.0;
  double lambda_l2 = 0.0;
  double final_loss_weight = 3.0;  // c_T; other steps weigh 1
  std::vector<int> joint_frozen_steps;
  bool joint_prev_init = false;
};

struct MethodRun {
  MethodId method = MethodId::kBaseline;
  WeightVector final_weights;
  std::vector<std::string> checkpoint_names;
  std::vector<WeightVector> checkpoints;
  int sides_attached = 0;
  SideKind side_kind = SideKind::kOneLayer;
  double final_val_accuracy = -1.0;
  double final_test_accuracy = -1.0;
  std::vector<double> per_step_val_accuracy;
  std::vector<double> chosen_lr;  // sequential methods

  const WeightVector* checkpoint(const std::string& name) const;
};

// ---- building blocks (also used directly by tests) ----

LabeledImageSet concat_sets(const std::vector<const LabeledImageSet*>& sets);

// ERM on the union of the given steps, model-selected on pooled validation.
TrainReport train_erm(Net& net, const std::vector<const LabeledImageSet*>& trains,
                      const std::vector<const LabeledImageSet*>& vals,
                      const TrainConfig& cfg);

// IRMv1 penalty with the dummy classifier multiplier at w = 1: the batch
// halves give g1 and g2, penalty = g1 * g2. dlogits receives the exact
// gradient of the penalty wrt the logits.
real irm_penalty(const std::vector<real>& logits, int batch, int classes,
                 const std::vector<int>& labels, std::vector<real>* dlogits = nullptr);

// Fills param grads with d/dtheta [mean_e CE_e + lambda mean_e penalty_e]
// for one batch per environment; returns the total objective value.
real irm_batch_gradient(Net& net, const std::vector<Tensor4>& env_inputs,
                        const std::vector<std::vector<int>>& env_labels, int classes,
                        double lambda);

TrainReport train_irm(Net& net, const std::vector<const LabeledImageSet*>& trains,
                      const std::vector<const LabeledImageSet*>& vals,
                      const TrainConfig& cfg, double lambda_irm);

// CE per environment (running statistics restored after probing), then one
// backward pass on the argmax-loss batch; ties go to the lowest index.
// Returns per-environment losses; grads equal an ERM step on that batch.
std::vector<real> dro_batch_gradient(Net& net, const std::vector<Tensor4>& env_inputs,
                                     const std::vector<std::vector<int>>& env_labels,
                                     int classes, int* selected);

TrainReport train_dro(Net& net, const std::vector<const LabeledImageSet*>& trains,
                      const std::vector<const LabeledImageSet*>& vals,
                      const TrainConfig& cfg);

enum class FinetunePlan { kFull, kLpThenFt };

TrainReport finetune(Net& net, const StepData& final_step, FinetunePlan plan,
                     const MethodConfig& cfg);

// base frozen, fresh side modules trained on the final step
TrainReport side_tune(Net& net, const StepData& final_step, SideKind kind,
                      const MethodConfig& cfg);

// empirical Fisher diagonal (eval mode, per-sample gradients of log p(y|x))
WeightVector fisher_diagonal(Net& net, const LabeledImageSet& data, int max_samples,
                             std::uint64_t seed);

struct SequentialResult {
  std::vector<WeightVector> step_checkpoints;
  std::vector<double> step_val_accuracy;
  std::vector<double> step_lr;
};

// SFT when lambda_ewc = 0 (identical code path), EWC otherwise.
SequentialResult sequential_train(Net& net, const SequenceData& data,
                                  const MethodConfig& cfg, double lambda_ewc);

SequentialResult sequential_side_tune(Net& net, const SequenceData& data,
                                      const MethodConfig& cfg, SideKind kind);

// ---- whole-method driver ----

MethodRun run_method(const MethodConfig& cfg, const NetworkConfig& arch,
                     const SequenceData& data, const StepData* oracle_data);

}  // namespace seqshift
