#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "seqshift/image.hpp"

namespace seqshift {

// Draws n samples from the corpus train split without replacement.
// balanced draws exactly n/L per class (requires L | n). Draws are a
// pure function of (corpus, n, balanced, seed); separate steps use
// separate seeds and may overlap.
LabeledImageSet draw_step_samples(const BaseCorpus& corpus, int n, bool balanced,
                                  std::uint64_t seed);

// Same, but restricted to records whose fine label is in `active_fine`
// (sub-population steps). Balanced over coarse classes.
LabeledImageSet draw_step_samples_filtered(const BaseCorpus& corpus, int n,
                                           bool balanced, std::uint64_t seed,
                                           const std::vector<int>& active_fine);

// Draws from the corpus test split (final-step evaluation data).
LabeledImageSet draw_test_samples(const BaseCorpus& corpus, int n, bool balanced,
                                  std::uint64_t seed);
LabeledImageSet draw_test_samples_filtered(const BaseCorpus& corpus, int n,
                                           bool balanced, std::uint64_t seed,
                                           const std::vector<int>& active_fine);

// Disjoint partition; |val| = round(val_fraction * |set|).
std::pair<LabeledImageSet, LabeledImageSet> split_train_val(
    const LabeledImageSet& set, double val_fraction, std::uint64_t seed);

}  // namespace seqshift
