#include "seqshift/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seqshift/rng.hpp"

namespace seqshift {

namespace {

// First k entries of a seeded Fisher-Yates shuffle of `pool`.
std::vector<std::int64_t> sample_without_replacement(std::vector<std::int64_t> pool,
                                                     std::size_t k, Rng& rng) {
  if (k > pool.size())
    throw std::invalid_argument("sample size exceeds pool size");
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.next_below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

LabeledImageSet draw_from_records(const std::vector<BaseRecord>& records,
                                  const BaseCorpus& corpus, int n, bool balanced,
                                  std::uint64_t seed,
                                  const std::vector<int>* active_fine) {
  const int L = corpus.num_classes;
  if (n < 0) throw std::invalid_argument("negative sample count");
  if (balanced && n % L != 0)
    throw std::invalid_argument("balanced draw requires class count to divide n");

  std::vector<char> fine_ok;
  if (active_fine) {
    fine_ok.assign(std::max(corpus.num_fine_classes, 1), 0);
    for (int f : *active_fine) fine_ok.at(f) = 1;
  }
  auto eligible = [&](const BaseRecord& r) {
    return !active_fine || (r.fine_label >= 0 && fine_ok[r.fine_label]);
  };

  Rng rng(Rng::derive(seed, "draw"));
  std::vector<std::int64_t> chosen;
  if (balanced) {
    std::vector<std::vector<std::int64_t>> per_class(L);
    for (std::size_t i = 0; i < records.size(); ++i)
      if (eligible(records[i]))
        per_class[records[i].label].push_back(static_cast<std::int64_t>(i));
    const std::size_t per = static_cast<std::size_t>(n / L);
    for (int c = 0; c < L; ++c) {
      if (per_class[c].size() < per)
        throw std::invalid_argument("class " + std::to_string(c) +
                                    " has too few eligible records");
      Rng class_rng = rng.stream("class", static_cast<std::uint64_t>(c));
      auto ids = sample_without_replacement(std::move(per_class[c]), per, class_rng);
      chosen.insert(chosen.end(), ids.begin(), ids.end());
    }
  } else {
    std::vector<std::int64_t> pool;
    for (std::size_t i = 0; i < records.size(); ++i)
      if (eligible(records[i])) pool.push_back(static_cast<std::int64_t>(i));
    if (static_cast<std::size_t>(n) > pool.size())
      throw std::invalid_argument("sample size exceeds eligible records");
    chosen = sample_without_replacement(std::move(pool), static_cast<std::size_t>(n), rng);
  }

  LabeledImageSet out;
  out.num_classes = L;
  out.images.reserve(chosen.size());
  for (std::int64_t id : chosen) {
    const BaseRecord& rec = records[static_cast<std::size_t>(id)];
    out.images.push_back(rec.image);
    out.labels.push_back(rec.label);
    if (corpus.has_fine()) out.fine_labels.push_back(rec.fine_label);
    out.source_ids.push_back(id);
  }
  return out;
}

}  // namespace

LabeledImageSet draw_step_samples(const BaseCorpus& corpus, int n, bool balanced,
                                  std::uint64_t seed) {
  return draw_from_records(corpus.train_records, corpus, n, balanced, seed, nullptr);
}

LabeledImageSet draw_step_samples_filtered(const BaseCorpus& corpus, int n,
                                           bool balanced, std::uint64_t seed,
                                           const std::vector<int>& active_fine) {
  return draw_from_records(corpus.train_records, corpus, n, balanced, seed, &active_fine);
}

LabeledImageSet draw_test_samples(const BaseCorpus& corpus, int n, bool balanced,
                                  std::uint64_t seed) {
  auto out = draw_from_records(corpus.test_records, corpus, n, balanced, seed, nullptr);
  out.split = Split::kTest;
  return out;
}

LabeledImageSet draw_test_samples_filtered(const BaseCorpus& corpus, int n,
                                           bool balanced, std::uint64_t seed,
                                           const std::vector<int>& active_fine) {
  auto out = draw_from_records(corpus.test_records, corpus, n, balanced, seed, &active_fine);
  out.split = Split::kTest;
  return out;
}

std::pair<LabeledImageSet, LabeledImageSet> split_train_val(
    const LabeledImageSet& set, double val_fraction, std::uint64_t seed) {
  if (val_fraction < 0.0 || val_fraction >= 1.0)
    throw std::invalid_argument("val_fraction must be in [0, 1)");
  const std::size_t n = set.size();
  const std::size_t n_val =
      static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(Rng::derive(seed, "split"));
  rng.shuffle(order);

  auto take = [&](std::size_t begin, std::size_t end, Split split) {
    LabeledImageSet part;
    part.num_classes = set.num_classes;
    part.step_index = set.step_index;
    part.split = split;
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t j = order[i];
      part.images.push_back(set.images[j]);
      part.labels.push_back(set.labels[j]);
      if (!set.fine_labels.empty()) part.fine_labels.push_back(set.fine_labels[j]);
      part.source_ids.push_back(set.source_ids[j]);
    }
    return part;
  };
  return {take(n_val, n, Split::kTrain), take(0, n_val, Split::kVal)};
}

}  // namespace seqshift
