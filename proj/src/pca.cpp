#include "seqshift/pca.hpp"

#include <iostream>
#include <stdexcept>

namespace seqshift {

namespace {

void apply_sign_convention(Eigen::MatrixXd& components) {
  for (Eigen::Index r = 0; r < components.rows(); ++r) {
    Eigen::Index arg = 0;
    components.row(r).cwiseAbs().maxCoeff(&arg);
    if (components(r, arg) < 0.0) components.row(r) *= -1.0;
  }
}

}  // namespace

Eigen::MatrixXd PcaModel::project(const Eigen::MatrixXd& x) const {
  return (x.rowwise() - mean.transpose()) * components.transpose();
}

PcaModel fit_pca(const Eigen::MatrixXd& x, double variance_target, int k_max) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (n < 2) throw std::invalid_argument("fit_pca needs at least 2 samples");

  PcaModel model;
  model.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - model.mean.transpose();

  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd directions;    // d x r, columns
  if (d <= n) {
    const Eigen::MatrixXd cov = centered.transpose() * centered / double(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("PCA eigendecomposition failed");
    eigenvalues = solver.eigenvalues().reverse();
    directions = solver.eigenvectors().rowwise().reverse();
  } else {
    // Gram trick for wide data: eigenvectors of X Xt map back to d-space.
    const Eigen::MatrixXd gram = centered * centered.transpose() / double(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("PCA eigendecomposition failed");
    eigenvalues = solver.eigenvalues().reverse();
    const Eigen::MatrixXd v = solver.eigenvectors().rowwise().reverse();
    directions.resize(d, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double scale = eigenvalues(i) > 0.0
                               ? 1.0 / std::sqrt(eigenvalues(i) * double(n - 1))
                               : 0.0;
      directions.col(i) = centered.transpose() * v.col(i) * scale;
    }
  }

  eigenvalues = eigenvalues.cwiseMax(0.0);
  model.total_variance = eigenvalues.sum();

  const double tiny = 1e-12 * std::max(model.total_variance, 1e-300);
  int rank = 0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
    if (eigenvalues(i) > tiny) ++rank;

  int k = 0;
  double acc = 0.0;
  const double target = variance_target * model.total_variance;
  while (k < rank && acc < target && k < k_max) {
    acc += eigenvalues(k);
    ++k;
  }
  if (k < k_max && k == rank && acc < target) {
    model.rank_reduced = true;
    std::cerr << "fit_pca: rank " << rank << " is below the requested "
              << k_max << "-component cap; reducing k\n";
  }
  if (k == 0) k = 1;

  model.k = k;
  model.explained_variance = eigenvalues.head(k);
  model.components = directions.leftCols(k).transpose();
  apply_sign_convention(model.components);
  return model;
}

}  // namespace seqshift
