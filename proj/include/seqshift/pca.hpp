#pragma once

#include <Eigen/Dense>

namespace seqshift {

// PCA with a deterministic sign convention (largest-magnitude entry of
// every component is positive). k is the smallest count explaining
// variance_target of the variance, capped at k_max and at the numerical
// rank.
struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;          // k x d, orthonormal rows
  Eigen::VectorXd explained_variance;  // per retained component
  double total_variance = 0.0;
  int k = 0;
  bool rank_reduced = false;  // k was cut below the requested cap by rank

  Eigen::MatrixXd project(const Eigen::MatrixXd& x) const;
};

// rows of x = samples.
PcaModel fit_pca(const Eigen::MatrixXd& x, double variance_target = 0.95,
                 int k_max = 100);

}  // namespace seqshift
