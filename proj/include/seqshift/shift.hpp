#pragma once

#include <cstdint>
#include <vector>

#include "seqshift/image.hpp"
#include "seqshift/imgops.hpp"
#include "seqshift/rng.hpp"

namespace seqshift {

enum class ShiftKind {
  kCorruption,
  kRotation,
  kRedTint,
  kLabelFlip,
  kConditionalRotation,
  kSubPopulation,
};

enum class RotationDirection { kCW, kCCW };

const char* shift_kind_name(ShiftKind k);
ShiftKind shift_kind_from_name(const std::string& name);

struct ShiftBlock {
  ShiftKind kind = ShiftKind::kCorruption;

  // Corruption: iid uniform integer noise in [noise_lo, noise_hi].
  int noise_lo = -3;
  int noise_hi = 2;

  // Rotation / ConditionalRotation.
  double degrees = 30.0;
  RotationDirection direction = RotationDirection::kCCW;
  // Per-class directions; empty means even classes CCW, odd CW.
  std::vector<RotationDirection> direction_map;

  // RedTint.
  int tint_amount = 30;

  // SubPopulation: which schedule configuration to use.
  int schedule = 0;

  bool operator==(const ShiftBlock& o) const;
};

// Ordered fine classes per coarse class; position sets active at each
// sub-population stage: {0,1}, {0,1,2}, {1,2,3}, {2,3,4}.
struct SubPopSchedule {
  std::vector<std::vector<int>> fine_order;  // [coarse][5]

  static SubPopSchedule default_for(const BaseCorpus& corpus);
  // Union of active fine classes at the given stage (0..3).
  std::vector<int> active_fine(int stage) const;
  static std::vector<int> active_positions(int stage);
};

ImageTensor apply_corruption(const ImageTensor& img, int noise_lo, int noise_hi,
                             Rng& rng);
inline ImageTensor apply_corruption(const ImageTensor& img, std::uint64_t seed) {
  Rng rng(Rng::derive(seed, "corrupt"));
  return apply_corruption(img, -3, 2, rng);
}

ImageTensor apply_rotation(const ImageTensor& img, double degrees,
                           RotationDirection dir,
                           Resample resample = Resample::kBilinear);

ImageTensor apply_red_tint(const ImageTensor& img, int amount = 30);

// The flip_index-th flip in a chain: odd index maps Y -> (L-1)-Y, even
// index maps Y -> (Y+2) mod L.
int apply_label_flip(int label, int flip_index, int num_classes);
std::vector<int> apply_label_flip(const std::vector<int>& labels, int flip_index,
                                  int num_classes);

ImageTensor apply_conditional_rotation(const ImageTensor& img, int label,
                                       double degrees,
                                       const std::vector<RotationDirection>& direction_map,
                                       Resample resample = Resample::kBilinear);

RotationDirection default_direction_for_class(int label);

}  // namespace seqshift
