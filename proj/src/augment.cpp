#include "seqshift/augment.hpp"

namespace seqshift {

ImageTensor augment(const ImageTensor& img, const AugmentConfig& cfg, Rng& rng) {
  if (!cfg.enabled) return img;
  ImageTensor out = rng.next_bool() ? flip_horizontal(img) : img;

  int ox = cfg.pad, oy = cfg.pad;
  if (cfg.crop == CropMode::kRandom) {
    ox = static_cast<int>(rng.next_below(2 * cfg.pad + 1));
    oy = static_cast<int>(rng.next_below(2 * cfg.pad + 1));
  }
  out = pad_crop(out, cfg.pad, ox, oy);

  const double deg = rng.next_real_in(-cfg.max_rotation_deg, cfg.max_rotation_deg);
  if (deg != 0.0) out = rotate_image(out, deg, cfg.resample);
  return out;
}

}  // namespace seqshift
