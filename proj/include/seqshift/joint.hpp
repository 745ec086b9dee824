#pragma once

#include <string>
#include <vector>

#include "seqshift/network.hpp"
#include "seqshift/sequence.hpp"
#include "seqshift/train.hpp"

namespace seqshift {

enum class JointVariant { kSeparate, kSideOne, kSideBlock };

// Share one component (e.g. "block1") across the listed steps; separate
// variant only.
struct ShareGroup {
  std::string component;
  std::vector<int> steps;
};

struct JointConfig {
  JointVariant variant = JointVariant::kSeparate;
  double lambda_adj = 1.0;
  double lambda_l2 = 0.0;          // plain L2, applied as SGD weight decay
  double final_loss_weight = 3.0;  // c_T; earlier steps weigh 1
  std::vector<int> frozen_steps;
  bool prev_init = false;  // initialize trainable steps from hist_init
  std::vector<ShareGroup> share;
  TrainConfig train;
};

struct JointResult {
  JointVariant variant = JointVariant::kSeparate;
  int num_steps = 0;
  std::vector<std::string> checkpoint_names;
  std::vector<WeightVector> checkpoints;
  double final_val_accuracy = -1.0;
  std::vector<double> per_step_val_accuracy;
};

// Trains all steps at once: round-robin batches within an epoch, one
// optimizer step per iteration, and the adjacent-step L2 coupling applied
// through its proximal map (a tridiagonal solve across steps), which stays
// stable for any lambda_adj. hist_init, when given, seeds frozen steps
// (always) and trainable steps (when prev_init).
JointResult joint_train(const SequenceData& data, const NetworkConfig& arch,
                        const JointConfig& cfg, const WeightVector* hist_init);

double joint_eval_final(const JointResult& result, const NetworkConfig& arch,
                        const LabeledImageSet& test, const TrainConfig& cfg);

}  // namespace seqshift
