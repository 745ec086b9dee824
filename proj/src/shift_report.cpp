#include "seqshift/shift_report.hpp"

#include <cstdio>
#include <sstream>

#include "seqshift/emd.hpp"
#include "seqshift/rng.hpp"

namespace seqshift {

namespace {

struct ProjectedSet {
  Eigen::MatrixXd points;
  std::vector<int> labels;
};

ProjectedSet project_subsampled(const LabeledImageSet& set, const PcaModel& pca,
                                int cap, std::uint64_t seed) {
  std::vector<std::size_t> idx(set.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  if (cap > 0 && set.size() > static_cast<std::size_t>(cap)) {
    Rng rng(seed);
    for (int i = 0; i < cap; ++i) {
      const std::size_t j = i + rng.next_below(idx.size() - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(static_cast<std::size_t>(cap));
  }

  Eigen::MatrixXd raw(idx.size(), set.images.empty() ? 0 : set.images[0].pixel_count());
  ProjectedSet out;
  out.labels.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto& img = set.images[idx[r]];
    for (std::size_t p = 0; p < img.data.size(); ++p)
      raw(r, static_cast<Eigen::Index>(p)) = img.data[p] / 255.0;
    out.labels.push_back(set.labels[idx[r]]);
  }
  out.points = pca.project(raw);
  return out;
}

}  // namespace

Eigen::MatrixXd flatten_images(const LabeledImageSet& set) {
  if (set.images.empty()) return Eigen::MatrixXd(0, 0);
  const std::size_t d = set.images[0].pixel_count();
  Eigen::MatrixXd x(set.size(), d);
  for (std::size_t i = 0; i < set.size(); ++i)
    for (std::size_t p = 0; p < d; ++p)
      x(i, static_cast<Eigen::Index>(p)) = set.images[i].data[p] / 255.0;
  return x;
}

PcaModel fit_sequence_pca(const SequenceData& data, double variance_target, int k_max) {
  std::size_t total = 0;
  for (const auto& step : data.steps) total += step.train.size();
  if (total == 0) throw std::invalid_argument("sequence has no training images");
  const std::size_t d = data.steps[0].train.images.at(0).pixel_count();

  Eigen::MatrixXd x(total, d);
  std::size_t row = 0;
  for (const auto& step : data.steps)
    for (const auto& img : step.train.images) {
      for (std::size_t p = 0; p < d; ++p)
        x(row, static_cast<Eigen::Index>(p)) = img.data[p] / 255.0;
      ++row;
    }
  return fit_pca(x, variance_target, k_max);
}

ShiftReport shift_report(const SequenceData& data, const PcaModel& pca,
                         int subsample_cap, std::uint64_t seed) {
  if (data.steps.empty()) throw std::invalid_argument("empty sequence");
  if (data.final_test.size() == 0)
    throw std::invalid_argument("final step has no test samples");

  const int T = static_cast<int>(data.steps.size()) - 1;
  const int L = data.final_test.num_classes;

  const ProjectedSet test = project_subsampled(
      data.final_test, pca, subsample_cap, Rng::derive(seed, "subsample_test"));

  std::vector<ProjectedSet> trains;
  trains.reserve(data.steps.size());
  for (int t = 0; t <= T; ++t)
    trains.push_back(project_subsampled(data.steps[t].train, pca, subsample_cap,
                                        Rng::derive(seed, "subsample", t)));

  ShiftReport report;
  report.denominator_x = wasserstein2(trains[T].points, test.points).distance;
  report.denominator_xy = conditional_wasserstein2(trains[T].points, trains[T].labels,
                                                   test.points, test.labels, L);
  for (int t = 0; t <= T; ++t) {
    ShiftReportRow row;
    row.step = t;
    row.n_train = static_cast<int>(trains[t].points.rows());
    row.n_test = static_cast<int>(test.points.rows());
    row.pca_k = pca.k;
    row.subsample_cap = subsample_cap;
    if (t == T) {
      // same sample sets as the denominator, so exactly 1
      row.w_x = 1.0;
      row.w_x_given_y = 1.0;
    } else {
      row.w_x = wasserstein2(trains[t].points, test.points).distance /
                report.denominator_x;
      row.w_x_given_y =
          conditional_wasserstein2(trains[t].points, trains[t].labels, test.points,
                                   test.labels, L) /
          report.denominator_xy;
    }
    report.rows.push_back(row);
  }
  return report;
}

std::string ShiftReport::to_csv() const {
  std::ostringstream out;
  out << "step,W_X,W_X_given_Y,n_train_t,n_test_T,pca_k,subsample_cap\n";
  char buf[128];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%d,%d,%d,%d\n", row.step, row.w_x,
                  row.w_x_given_y, row.n_train, row.n_test, row.pca_k,
                  row.subsample_cap);
    out << buf;
  }
  return out.str();
}

}  // namespace seqshift
