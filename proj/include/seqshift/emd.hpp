#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace seqshift {

class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exact solution of the balanced transportation problem with uniform
// probability marginals (1/n per source row, 1/m per sink row).
// Solved by network simplex on the full bipartite graph; flows are kept
// integral internally (supplies scaled to m and n), so the marginal
// constraints hold exactly.
struct TransportPlan {
  int n = 0;
  int m = 0;
  struct Entry {
    int i;
    int j;
    double mass;
  };
  std::vector<Entry> entries;  // nonzero coupling entries
  double cost = 0.0;           // sum_ij T_ij * c_ij

  // Dual certificate: u_i + v_j <= c_ij for every arc, and
  // dual_objective() == cost at the optimum.
  std::vector<double> dual_source;
  std::vector<double> dual_sink;
  double dual_objective() const;

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
};

// cost(i, j) entries may be any nonnegative reals.
TransportPlan solve_transport(const Eigen::MatrixXd& cost);

struct Wasserstein2Result {
  double distance = 0.0;  // sqrt of the optimal transport cost
  TransportPlan plan;
};

// Empirical W2 between two point sets (rows = points): the transport LP
// with Euclidean-distance costs, followed by a square root.
Wasserstein2Result wasserstein2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Per-class W2 combined with weights freq_B(l). Every class present in b
// must be present in a.
double conditional_wasserstein2(const Eigen::MatrixXd& a, const std::vector<int>& labels_a,
                                const Eigen::MatrixXd& b, const std::vector<int>& labels_b,
                                int num_classes);

Eigen::MatrixXd pairwise_euclidean(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace seqshift
