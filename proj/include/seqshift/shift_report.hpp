#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqshift/pca.hpp"
#include "seqshift/sequence.hpp"

namespace seqshift {

// Normalized Wasserstein-2 shift metrics per step: the distance from the
// step-t training samples to the final test samples, divided by the
// in-distribution train/test distance at the final step. Values above 1
// mean more shift than in-distribution evaluation.
struct ShiftReportRow {
  int step = 0;
  double w_x = 0.0;
  double w_x_given_y = 0.0;
  int n_train = 0;
  int n_test = 0;
  int pca_k = 0;
  int subsample_cap = 0;
};

struct ShiftReport {
  std::vector<ShiftReportRow> rows;
  double denominator_x = 0.0;
  double denominator_xy = 0.0;
  std::string to_csv() const;
};

// Flattens images to [0,1] reals, one row per sample.
Eigen::MatrixXd flatten_images(const LabeledImageSet& set);

// PCA is fit on the training images from all steps (test images excluded).
PcaModel fit_sequence_pca(const SequenceData& data, double variance_target = 0.95,
                          int k_max = 100);

ShiftReport shift_report(const SequenceData& data, const PcaModel& pca,
                         int subsample_cap = 2000, std::uint64_t seed = 0);

}  // namespace seqshift
