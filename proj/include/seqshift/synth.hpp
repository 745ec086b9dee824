#pragma once

#include <cstdint>

#include "seqshift/image.hpp"

namespace seqshift {

// Procedurally generated stand-ins for the CIFAR corpora, used by the
// test suites and demo configs so the pipeline can run without the real
// binary files. Each class pairs a two-color scheme with a concentric
// ring texture; per-sample jitter (center offset, color jitter, clutter
// patches, pixel noise) keeps small-sample training well below the
// accuracy reachable with abundant data.
//
// The 100-style variant mirrors the 20 coarse x 5 fine hierarchy: the
// coarse class fixes the color scheme, the fine class fixes the ring
// frequency band.

BaseCorpus make_synthetic_cifar10(int train_count, int test_count,
                                  std::uint64_t seed);

BaseCorpus make_synthetic_cifar100(int train_count, int test_count,
                                   std::uint64_t seed);

}  // namespace seqshift
