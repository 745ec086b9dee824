#pragma once

#include "seqshift/image.hpp"

namespace seqshift {

enum class Resample { kBilinear, kNearest };

// Rotates about the image center (visually counterclockwise for positive
// degrees). Pixels pulled from outside the source stay 0 (black corners).
// Exact multiples of 90 degrees snap to the exact grid permutation.
ImageTensor rotate_image(const ImageTensor& img, double degrees,
                         Resample resample = Resample::kBilinear);

ImageTensor flip_horizontal(const ImageTensor& img);

// Zero-pads by `pad` on every side, then crops back to the original size
// with the given top-left offset in [0, 2*pad].
ImageTensor pad_crop(const ImageTensor& img, int pad, int offset_x, int offset_y);

// 2x2 mean downscale (exact round-half-up on the 4-pixel sum).
ImageTensor downscale_2x(const ImageTensor& img);

}  // namespace seqshift
