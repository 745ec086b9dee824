#pragma once

#include <cstdint>

#include "seqshift/image.hpp"
#include "seqshift/imgops.hpp"
#include "seqshift/rng.hpp"

namespace seqshift {

enum class CropMode { kRandom, kCenter };

// Train-time augmentation: horizontal flip w.p. 0.5, then 4-pixel
// zero-pad + crop, then a uniform rotation in [-max_rotation_deg,
// +max_rotation_deg]. Each transform draws independently per call.
struct AugmentConfig {
  bool enabled = true;
  CropMode crop = CropMode::kRandom;
  int pad = 4;
  double max_rotation_deg = 10.0;
  Resample resample = Resample::kBilinear;
};

ImageTensor augment(const ImageTensor& img, const AugmentConfig& cfg, Rng& rng);

inline ImageTensor augment(const ImageTensor& img, std::uint64_t seed) {
  Rng rng(Rng::derive(seed, "augment"));
  return augment(img, AugmentConfig{}, rng);
}

}  // namespace seqshift
