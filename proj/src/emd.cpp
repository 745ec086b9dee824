#include "seqshift/emd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace seqshift {

namespace {

// Network simplex for the uncapacitated transportation problem on a full
// bipartite graph, after the LEMON / Bonneel design: spanning tree stored
// with parent/thread indices, block-search pivot rule, strongly feasible
// tie-breaking on the leaving arc. Supplies are integers (each source
// supplies m units, each sink demands n), so flows and the final marginal
// sums are exact.
class TransportSimplex {
 public:
  using Flow = std::int64_t;

  explicit TransportSimplex(const Eigen::MatrixXd& cost)
      : n_(static_cast<int>(cost.rows())), m_(static_cast<int>(cost.cols())) {
    node_num_ = n_ + m_;
    arc_num_ = static_cast<std::int64_t>(n_) * m_;
    const std::int64_t all_arcs = arc_num_ + node_num_;
    root_ = node_num_;

    cost_.resize(all_arcs);
    flow_.assign(all_arcs, 0);
    state_.assign(all_arcs, kStateLower);
    source_.resize(all_arcs);
    target_.resize(all_arcs);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < m_; ++j) {
        const std::int64_t a = static_cast<std::int64_t>(i) * m_ + j;
        cost_[a] = cost(i, j);
        source_[a] = i;
        target_[a] = n_ + j;
      }

    parent_.assign(node_num_ + 1, 0);
    pred_.assign(node_num_ + 1, 0);
    thread_.assign(node_num_ + 1, 0);
    rev_thread_.assign(node_num_ + 1, 0);
    succ_num_.assign(node_num_ + 1, 0);
    last_succ_.assign(node_num_ + 1, 0);
    forward_.assign(node_num_ + 1, false);
    pi_.assign(node_num_ + 1, 0.0);
  }

  void run() {
    const double max_cost =
        arc_num_ > 0 ? *std::max_element(cost_.begin(), cost_.begin() + arc_num_) : 0.0;
    const double art_cost = (max_cost + 1.0) * (node_num_ + 1);

    // Initial spanning tree: every node hangs off an artificial root.
    parent_[root_] = -1;
    pred_[root_] = -1;
    thread_[root_] = 0;
    rev_thread_[0] = root_;
    succ_num_[root_] = node_num_ + 1;
    last_succ_[root_] = root_ - 1;
    pi_[root_] = 0.0;

    for (int u = 0; u < node_num_; ++u) {
      const std::int64_t e = arc_num_ + u;
      parent_[u] = root_;
      pred_[u] = e;
      thread_[u] = u + 1;
      rev_thread_[u + 1] = u;
      succ_num_[u] = 1;
      last_succ_[u] = u;
      state_[e] = kStateTree;
      const Flow supply = u < n_ ? static_cast<Flow>(m_) : -static_cast<Flow>(n_);
      if (supply >= 0) {
        forward_[u] = true;
        pi_[u] = 0.0;
        source_[e] = u;
        target_[e] = root_;
        flow_[e] = supply;
        cost_[e] = 0.0;
      } else {
        forward_[u] = false;
        pi_[u] = art_cost;
        source_[e] = root_;
        target_[e] = u;
        flow_[e] = -supply;
        cost_[e] = art_cost;
      }
    }

    next_arc_ = 0;
    block_size_ = std::max<std::int64_t>(
        static_cast<std::int64_t>(std::sqrt(static_cast<double>(arc_num_))), 10);

    initial_pivots();

    const std::int64_t max_iters = 100 * (arc_num_ + node_num_) + 1000000;
    std::int64_t iters = 0;
    while (find_entering_arc()) {
      if (++iters > max_iters)
        throw MetricError("network simplex exceeded iteration budget");
      find_join_node();
      const bool change = find_leaving_arc();
      if (delta_ == kInfFlow)
        throw MetricError("transport cycle without a blocking arc");
      change_flow(change);
      if (change) {
        update_tree();
        update_potentials();
      }
    }

    for (std::int64_t e = arc_num_; e < arc_num_ + node_num_; ++e)
      if (flow_[e] != 0)
        throw MetricError("transport problem infeasible (artificial flow left)");
  }

  TransportPlan extract_plan(const Eigen::MatrixXd& cost) const {
    TransportPlan plan;
    plan.n = n_;
    plan.m = m_;
    const double total = static_cast<double>(n_) * m_;
    double acc = 0.0;
    for (std::int64_t a = 0; a < arc_num_; ++a) {
      if (flow_[a] == 0) continue;
      const int i = static_cast<int>(a / m_);
      const int j = static_cast<int>(a % m_);
      const double mass = static_cast<double>(flow_[a]) / total;
      plan.entries.push_back({i, j, mass});
      acc += mass * cost(i, j);
    }
    plan.cost = acc;
    plan.dual_source.resize(n_);
    plan.dual_sink.resize(m_);
    for (int i = 0; i < n_; ++i) plan.dual_source[i] = -pi_[i];
    for (int j = 0; j < m_; ++j) plan.dual_sink[j] = pi_[n_ + j];
    return plan;
  }

 private:
  static constexpr int kStateLower = 1;
  static constexpr int kStateTree = 0;
  static constexpr Flow kInfFlow = std::numeric_limits<Flow>::max();

  bool find_entering_arc() {
    double best = 0.0;
    std::int64_t e = next_arc_;
    std::int64_t cnt = block_size_;
    auto significant = [&](double rc) {
      const double scale = std::max(
          {std::fabs(pi_[source_[in_arc_]]), std::fabs(pi_[target_[in_arc_]]),
           std::fabs(cost_[in_arc_]), 1.0});
      return rc < -1e-13 * scale;
    };
    for (std::int64_t k = 0; k < arc_num_; ++k, ++e) {
      if (e == arc_num_) e = 0;
      const double rc =
          state_[e] * (cost_[e] + pi_[source_[e]] - pi_[target_[e]]);
      if (rc < best) {
        best = rc;
        in_arc_ = e;
      }
      if (--cnt == 0) {
        if (best < 0.0 && significant(best)) {
          next_arc_ = e;
          return true;
        }
        cnt = block_size_;
      }
    }
    if (best < 0.0 && significant(best)) {
      next_arc_ = e;
      return true;
    }
    return false;
  }

  void initial_pivots() {
    // one pivot per sink on its cheapest incoming arc
    for (int j = 0; j < m_; ++j) {
      std::int64_t best_arc = j;
      for (std::int64_t a = j; a < arc_num_; a += m_)
        if (cost_[a] < cost_[best_arc]) best_arc = a;
      in_arc_ = best_arc;
      if (state_[in_arc_] == kStateTree) continue;
      const double rc = cost_[in_arc_] + pi_[source_[in_arc_]] - pi_[target_[in_arc_]];
      if (rc >= 0.0) continue;
      find_join_node();
      const bool change = find_leaving_arc();
      if (delta_ == kInfFlow)
        throw MetricError("transport cycle without a blocking arc");
      change_flow(change);
      if (change) {
        update_tree();
        update_potentials();
      }
    }
  }

  void find_join_node() {
    int u = source_[in_arc_];
    int v = target_[in_arc_];
    while (u != v) {
      if (succ_num_[u] < succ_num_[v])
        u = parent_[u];
      else
        v = parent_[v];
    }
    join_ = u;
  }

  bool find_leaving_arc() {
    const int first = source_[in_arc_];
    const int second = target_[in_arc_];
    delta_ = kInfFlow;
    int result = 0;
    for (int u = first; u != join_; u = parent_[u]) {
      const Flow d = forward_[u] ? flow_[pred_[u]] : kInfFlow;
      if (d < delta_) {
        delta_ = d;
        u_out_ = u;
        result = 1;
      }
    }
    for (int u = second; u != join_; u = parent_[u]) {
      const Flow d = forward_[u] ? kInfFlow : flow_[pred_[u]];
      if (d <= delta_) {
        delta_ = d;
        u_out_ = u;
        result = 2;
      }
    }
    if (result == 1) {
      u_in_ = first;
      v_in_ = second;
    } else {
      u_in_ = second;
      v_in_ = first;
    }
    return result != 0;
  }

  void change_flow(bool change) {
    if (delta_ > 0) {
      flow_[in_arc_] += delta_;
      for (int u = source_[in_arc_]; u != join_; u = parent_[u])
        flow_[pred_[u]] += forward_[u] ? -delta_ : delta_;
      for (int u = target_[in_arc_]; u != join_; u = parent_[u])
        flow_[pred_[u]] += forward_[u] ? delta_ : -delta_;
    }
    if (change) {
      state_[in_arc_] = kStateTree;
      state_[pred_[u_out_]] = kStateLower;
    }
  }

  void update_tree() {
    int u = last_succ_[u_in_];
    const int old_rev_thread = rev_thread_[u_out_];
    const int old_succ_num = succ_num_[u_out_];
    const int old_last_succ = last_succ_[u_out_];
    v_out_ = parent_[u_out_];
    int right = thread_[u];
    int last = old_rev_thread == v_in_ ? thread_[last_succ_[u_out_]] : thread_[v_in_];

    thread_[v_in_] = u_in_;
    dirty_revs_.clear();
    dirty_revs_.push_back(v_in_);
    int stem = u_in_;
    int par_stem = v_in_;
    while (stem != u_out_) {
      const int new_stem = parent_[stem];
      thread_[u] = new_stem;
      dirty_revs_.push_back(u);

      const int w = rev_thread_[stem];
      thread_[w] = right;
      rev_thread_[right] = w;

      parent_[stem] = par_stem;
      par_stem = stem;
      stem = new_stem;

      u = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem]
                                                   : last_succ_[stem];
      right = thread_[u];
    }
    parent_[u_out_] = par_stem;
    thread_[u] = last;
    rev_thread_[last] = u;
    last_succ_[u_out_] = u;

    if (old_rev_thread != v_in_) {
      thread_[old_rev_thread] = right;
      rev_thread_[right] = old_rev_thread;
    }
    for (int node : dirty_revs_) rev_thread_[thread_[node]] = node;

    int tmp_sc = 0;
    int tmp_ls = last_succ_[u_out_];
    u = u_out_;
    while (u != u_in_) {
      const int w = parent_[u];
      pred_[u] = pred_[w];
      forward_[u] = !forward_[w];
      tmp_sc += succ_num_[u] - succ_num_[w];
      succ_num_[u] = tmp_sc;
      last_succ_[w] = tmp_ls;
      u = w;
    }
    pred_[u_in_] = in_arc_;
    forward_[u_in_] = (u_in_ == source_[in_arc_]);
    succ_num_[u_in_] = old_succ_num;

    int up_limit_in = -1;
    int up_limit_out = -1;
    if (last_succ_[join_] == v_in_)
      up_limit_out = join_;
    else
      up_limit_in = join_;

    for (u = v_in_; u != up_limit_in && last_succ_[u] == v_in_; u = parent_[u])
      last_succ_[u] = last_succ_[u_out_];
    if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
      for (u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ;
           u = parent_[u])
        last_succ_[u] = old_rev_thread;
    } else {
      for (u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ;
           u = parent_[u])
        last_succ_[u] = last_succ_[u_out_];
    }

    for (u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
    for (u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
  }

  void update_potentials() {
    const double sigma = forward_[u_in_]
                             ? pi_[v_in_] - pi_[u_in_] - cost_[pred_[u_in_]]
                             : pi_[v_in_] - pi_[u_in_] + cost_[pred_[u_in_]];
    const int end = thread_[last_succ_[u_in_]];
    for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
  }

  int n_, m_;
  int node_num_;
  std::int64_t arc_num_;
  int root_;

  std::vector<double> cost_;
  std::vector<Flow> flow_;
  std::vector<int> state_;
  std::vector<int> source_;
  std::vector<int> target_;

  std::vector<int> parent_;
  std::vector<std::int64_t> pred_;
  std::vector<int> thread_;
  std::vector<int> rev_thread_;
  std::vector<int> succ_num_;
  std::vector<int> last_succ_;
  std::vector<bool> forward_;
  std::vector<double> pi_;
  std::vector<int> dirty_revs_;

  std::int64_t next_arc_ = 0;
  std::int64_t block_size_ = 0;

  std::int64_t in_arc_ = 0;
  int join_ = 0, u_in_ = 0, v_in_ = 0, u_out_ = 0, v_out_ = 0;
  Flow delta_ = 0;
};

}  // namespace

double TransportPlan::dual_objective() const {
  double acc = 0.0;
  for (double u : dual_source) acc += u / n;
  for (double v : dual_sink) acc += v / m;
  return acc;
}

std::vector<double> TransportPlan::row_sums() const {
  std::vector<double> sums(n, 0.0);
  for (const auto& e : entries) sums[e.i] += e.mass;
  return sums;
}

std::vector<double> TransportPlan::col_sums() const {
  std::vector<double> sums(m, 0.0);
  for (const auto& e : entries) sums[e.j] += e.mass;
  return sums;
}

TransportPlan solve_transport(const Eigen::MatrixXd& cost) {
  if (cost.rows() == 0 || cost.cols() == 0)
    throw std::invalid_argument("transport problem needs nonempty point sets");
  TransportSimplex simplex(cost);
  simplex.run();
  return simplex.extract_plan(cost);
}

Eigen::MatrixXd pairwise_euclidean(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("point sets have different dimensions");
  // |x - y|^2 = |x|^2 + |y|^2 - 2 x.y, clamped before the square root
  const Eigen::VectorXd a2 = a.rowwise().squaredNorm();
  const Eigen::VectorXd b2 = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * a * b.transpose());
  d2.colwise() += a2;
  d2.rowwise() += b2.transpose();
  return d2.cwiseMax(0.0).cwiseSqrt();
}

Wasserstein2Result wasserstein2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Wasserstein2Result result;
  result.plan = solve_transport(pairwise_euclidean(a, b));
  result.distance = std::sqrt(result.plan.cost);
  return result;
}

double conditional_wasserstein2(const Eigen::MatrixXd& a, const std::vector<int>& labels_a,
                                const Eigen::MatrixXd& b, const std::vector<int>& labels_b,
                                int num_classes) {
  if (static_cast<std::size_t>(a.rows()) != labels_a.size() ||
      static_cast<std::size_t>(b.rows()) != labels_b.size())
    throw std::invalid_argument("labels do not match point counts");

  std::vector<std::vector<int>> rows_a(num_classes), rows_b(num_classes);
  for (std::size_t i = 0; i < labels_a.size(); ++i)
    rows_a.at(labels_a[i]).push_back(static_cast<int>(i));
  for (std::size_t j = 0; j < labels_b.size(); ++j)
    rows_b.at(labels_b[j]).push_back(static_cast<int>(j));

  double total = 0.0;
  for (int l = 0; l < num_classes; ++l) {
    if (rows_b[l].empty()) continue;
    if (rows_a[l].empty())
      throw MetricError("class " + std::to_string(l) +
                        " present in target but absent from source");
    Eigen::MatrixXd al(rows_a[l].size(), a.cols());
    for (std::size_t i = 0; i < rows_a[l].size(); ++i) al.row(i) = a.row(rows_a[l][i]);
    Eigen::MatrixXd bl(rows_b[l].size(), b.cols());
    for (std::size_t j = 0; j < rows_b[l].size(); ++j) bl.row(j) = b.row(rows_b[l][j]);
    const auto res = wasserstein2(al, bl);
    const double freq = static_cast<double>(rows_b[l].size()) / b.rows();
    total += freq * res.distance;
  }
  return total;
}

}  // namespace seqshift
