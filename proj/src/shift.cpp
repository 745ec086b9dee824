#include "seqshift/shift.hpp"

#include <algorithm>
#include <stdexcept>

namespace seqshift {

const char* shift_kind_name(ShiftKind k) {
  switch (k) {
    case ShiftKind::kCorruption: return "corruption";
    case ShiftKind::kRotation: return "rotation";
    case ShiftKind::kRedTint: return "red_tint";
    case ShiftKind::kLabelFlip: return "label_flip";
    case ShiftKind::kConditionalRotation: return "conditional_rotation";
    case ShiftKind::kSubPopulation: return "sub_population";
  }
  return "?";
}

ShiftKind shift_kind_from_name(const std::string& name) {
  for (ShiftKind k : {ShiftKind::kCorruption, ShiftKind::kRotation, ShiftKind::kRedTint,
                      ShiftKind::kLabelFlip, ShiftKind::kConditionalRotation,
                      ShiftKind::kSubPopulation}) {
    if (name == shift_kind_name(k)) return k;
  }
  throw std::invalid_argument("unknown shift kind: " + name);
}

bool ShiftBlock::operator==(const ShiftBlock& o) const {
  return kind == o.kind && noise_lo == o.noise_lo && noise_hi == o.noise_hi &&
         degrees == o.degrees && direction == o.direction &&
         direction_map == o.direction_map && tint_amount == o.tint_amount &&
         schedule == o.schedule;
}

SubPopSchedule SubPopSchedule::default_for(const BaseCorpus& corpus) {
  if (!corpus.has_fine())
    throw std::invalid_argument("sub-population schedule needs a fine-labelled corpus");
  SubPopSchedule s;
  s.fine_order.assign(corpus.num_classes, {});
  for (int f = 0; f < corpus.num_fine_classes; ++f) {
    const int c = corpus.fine_to_coarse.at(f);
    if (c >= 0) s.fine_order[c].push_back(f);
  }
  for (int c = 0; c < corpus.num_classes; ++c) {
    if (s.fine_order[c].size() != 5)
      throw std::invalid_argument("coarse class " + std::to_string(c) +
                                  " does not have exactly 5 fine classes");
    std::sort(s.fine_order[c].begin(), s.fine_order[c].end());
  }
  return s;
}

std::vector<int> SubPopSchedule::active_positions(int stage) {
  switch (stage) {
    case 0: return {0, 1};
    case 1: return {0, 1, 2};
    case 2: return {1, 2, 3};
    case 3: return {2, 3, 4};
  }
  throw std::invalid_argument("sub-population stage must be in [0, 3]");
}

std::vector<int> SubPopSchedule::active_fine(int stage) const {
  std::vector<int> out;
  for (const auto& order : fine_order)
    for (int pos : active_positions(stage)) out.push_back(order.at(pos));
  return out;
}

ImageTensor apply_corruption(const ImageTensor& img, int noise_lo, int noise_hi,
                             Rng& rng) {
  ImageTensor out = img;
  const std::uint64_t span = static_cast<std::uint64_t>(noise_hi - noise_lo + 1);
  for (auto& px : out.data) {
    const int noise = noise_lo + static_cast<int>(rng.next_below(span));
    px = static_cast<std::uint8_t>(std::clamp(static_cast<int>(px) + noise, 0, 255));
  }
  return out;
}

ImageTensor apply_rotation(const ImageTensor& img, double degrees,
                           RotationDirection dir, Resample resample) {
  const double signed_deg = dir == RotationDirection::kCCW ? degrees : -degrees;
  return rotate_image(img, signed_deg, resample);
}

ImageTensor apply_red_tint(const ImageTensor& img, int amount) {
  ImageTensor out = img;
  const std::size_t plane = static_cast<std::size_t>(img.height) * img.width;
  for (std::size_t i = 0; i < plane; ++i)
    out.data[i] = static_cast<std::uint8_t>(
        std::clamp(static_cast<int>(out.data[i]) + amount, 0, 255));
  return out;
}

int apply_label_flip(int label, int flip_index, int num_classes) {
  if (flip_index < 1) throw std::invalid_argument("flip_index must be >= 1");
  if (flip_index % 2 == 1) return (num_classes - 1) - label;
  return (label + 2) % num_classes;
}

std::vector<int> apply_label_flip(const std::vector<int>& labels, int flip_index,
                                  int num_classes) {
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[i] = apply_label_flip(labels[i], flip_index, num_classes);
  return out;
}

RotationDirection default_direction_for_class(int label) {
  return label % 2 == 0 ? RotationDirection::kCCW : RotationDirection::kCW;
}

ImageTensor apply_conditional_rotation(const ImageTensor& img, int label,
                                       double degrees,
                                       const std::vector<RotationDirection>& direction_map,
                                       Resample resample) {
  RotationDirection dir;
  if (direction_map.empty()) {
    dir = default_direction_for_class(label);
  } else {
    if (label < 0 || static_cast<std::size_t>(label) >= direction_map.size())
      throw std::invalid_argument("direction map does not cover label " +
                                  std::to_string(label));
    dir = direction_map[static_cast<std::size_t>(label)];
  }
  return apply_rotation(img, degrees, dir, resample);
}

}  // namespace seqshift
