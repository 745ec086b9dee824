#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "seqshift/emd.hpp"
#include "seqshift/rng.hpp"

using namespace seqshift;

namespace {

Eigen::MatrixXd random_points(int n, int d, Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = scale * rng.next_real_in(-1.0, 1.0);
  return x;
}

// Independent oracle for n = m: a vertex of the Birkhoff polytope is a
// permutation, so the optimum is the best assignment.
double brute_force_w2_cost(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const int n = static_cast<int>(a.rows());
  const Eigen::MatrixXd c = pairwise_euclidean(a, b);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (int i = 0; i < n; ++i) cost += c(i, perm[i]);
    best = std::min(best, cost / n);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("identical point sets transport for free") {
  Rng rng(1);
  const auto a = random_points(5, 3, rng);
  const auto res = wasserstein2(a, a);
  CHECK(res.distance == doctest::Approx(0.0).epsilon(1e-12));
  // zero cost forces the coupling onto the zero-cost diagonal
  for (const auto& e : res.plan.entries) CHECK(e.i == e.j);
}

TEST_CASE("two single points at distance d") {
  Eigen::MatrixXd a(1, 1), b(1, 1);
  a(0, 0) = 0.0;
  b(0, 0) = 4.0;
  const auto res = wasserstein2(a, b);
  CHECK(res.plan.cost == doctest::Approx(4.0));
  CHECK(res.distance == doctest::Approx(2.0));
}

TEST_CASE("network simplex matches the permutation oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(5));
    const int d = 1 + static_cast<int>(rng.next_below(5));
    const auto a = random_points(n, d, rng);
    const auto b = random_points(n, d, rng);
    const auto res = wasserstein2(a, b);
    const double oracle = brute_force_w2_cost(a, b);
    CHECK(res.plan.cost == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("coupling satisfies uniform marginals exactly") {
  Rng rng(11);
  const auto a = random_points(13, 4, rng);
  const auto b = random_points(9, 4, rng);
  const auto res = wasserstein2(a, b);
  for (double s : res.plan.row_sums()) CHECK(s == doctest::Approx(1.0 / 13).epsilon(1e-12));
  for (double s : res.plan.col_sums()) CHECK(s == doctest::Approx(1.0 / 9).epsilon(1e-12));
}

TEST_CASE("strong duality certificate holds") {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + static_cast<int>(rng.next_below(30));
    const int m = 3 + static_cast<int>(rng.next_below(30));
    const auto a = random_points(n, 3, rng);
    const auto b = random_points(m, 3, rng);
    const auto res = wasserstein2(a, b);
    CHECK(res.plan.dual_objective() == doctest::Approx(res.plan.cost).epsilon(1e-9));
    // dual feasibility on every arc
    const auto c = pairwise_euclidean(a, b);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        CHECK(res.plan.dual_source[i] + res.plan.dual_sink[j] <= c(i, j) + 1e-9);
  }
}

TEST_CASE("wasserstein2 is symmetric") {
  Rng rng(17);
  const auto a = random_points(12, 3, rng);
  const auto b = random_points(15, 3, rng);
  CHECK(wasserstein2(a, b).distance ==
        doctest::Approx(wasserstein2(b, a).distance).epsilon(1e-9));
}

TEST_CASE("pre-sqrt cost obeys the triangle inequality on equal sizes") {
  Rng rng(19);
  const auto a = random_points(8, 2, rng);
  const auto b = random_points(8, 2, rng);
  const auto c = random_points(8, 2, rng);
  const double ab = wasserstein2(a, b).plan.cost;
  const double bc = wasserstein2(b, c).plan.cost;
  const double ac = wasserstein2(a, c).plan.cost;
  CHECK(ac <= ab + bc + 1e-6);
}

TEST_CASE("dimension mismatch is a shape error") {
  Eigen::MatrixXd a(2, 3), b(2, 4);
  a.setZero();
  b.setZero();
  CHECK_THROWS_AS(wasserstein2(a, b), std::invalid_argument);
}

TEST_CASE("conditional metric reduces to plain W2 for a single class") {
  Rng rng(23);
  const auto a = random_points(10, 3, rng);
  const auto b = random_points(8, 3, rng);
  const std::vector<int> la(10, 0), lb(8, 0);
  CHECK(conditional_wasserstein2(a, la, b, lb, 1) ==
        doctest::Approx(wasserstein2(a, b).distance).epsilon(1e-12));
}

TEST_CASE("conditional metric is zero for identical per-class point sets") {
  Rng rng(29);
  const auto a = random_points(10, 3, rng);
  std::vector<int> labels(10);
  for (int i = 0; i < 10; ++i) labels[i] = i % 2;
  CHECK(conditional_wasserstein2(a, labels, a, labels, 2) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("conditional metric matches the per-class oracle") {
  Rng rng(31);
  const int per = 4;
  Eigen::MatrixXd a(2 * per, 2), b(2 * per, 2);
  std::vector<int> la, lb;
  for (int cls = 0; cls < 2; ++cls)
    for (int i = 0; i < per; ++i) {
      a.row(cls * per + i) = random_points(1, 2, rng).row(0);
      b.row(cls * per + i) = random_points(1, 2, rng).row(0);
      la.push_back(cls);
      lb.push_back(cls);
    }
  double expected = 0.0;
  for (int cls = 0; cls < 2; ++cls) {
    const auto ac = a.middleRows(cls * per, per);
    const auto bc = b.middleRows(cls * per, per);
    expected += 0.5 * std::sqrt(brute_force_w2_cost(ac, bc));
  }
  CHECK(conditional_wasserstein2(a, la, b, lb, 2) ==
        doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("class present only in the target raises a metric error") {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a.setZero();
  b.setOnes();
  const std::vector<int> la = {0, 0}, lb = {0, 1};
  CHECK_THROWS_AS(conditional_wasserstein2(a, la, b, lb, 2), MetricError);
}

TEST_CASE("scaling all points scales the distance by sqrt(s)") {
  Rng rng(37);
  const auto a = random_points(10, 3, rng);
  const auto b = random_points(12, 3, rng);
  const double base = wasserstein2(a, b).distance;
  const double scaled = wasserstein2(2.0 * a, 2.0 * b).distance;
  CHECK(scaled == doctest::Approx(std::sqrt(2.0) * base).epsilon(1e-6));
}
