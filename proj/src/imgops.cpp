#include "seqshift/imgops.hpp"

#include <cmath>

namespace seqshift {

namespace {

// sin/cos with exact values at multiples of 90 degrees, so that
// quarter-turn rotations are grid permutations rather than resamples.
void snapped_sincos(double degrees, double* s, double* c) {
  const double m = std::fmod(degrees, 360.0);
  const double quarter = m / 90.0;
  const double nearest = std::round(quarter);
  if (std::fabs(quarter - nearest) < 1e-12) {
    const int q = (static_cast<int>(nearest) % 4 + 4) % 4;
    const double table_s[4] = {0.0, 1.0, 0.0, -1.0};
    const double table_c[4] = {1.0, 0.0, -1.0, 0.0};
    *s = table_s[q];
    *c = table_c[q];
    return;
  }
  const double rad = degrees * M_PI / 180.0;
  *s = std::sin(rad);
  *c = std::cos(rad);
}

}  // namespace

ImageTensor rotate_image(const ImageTensor& img, double degrees, Resample resample) {
  double s, c;
  snapped_sincos(degrees, &s, &c);
  const double cx = (img.width - 1) * 0.5;
  const double cy = (img.height - 1) * 0.5;

  ImageTensor out(img.channels, img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      // inverse map; row index grows downward, so visual CCW uses
      // u' = u c + v s, v' = -u s + v c inverted.
      const double ud = x - cx;
      const double vd = y - cy;
      const double xs = ud * c - vd * s + cx;
      const double ys = ud * s + vd * c + cy;

      if (resample == Resample::kNearest) {
        const int xi = static_cast<int>(std::lround(xs));
        const int yi = static_cast<int>(std::lround(ys));
        if (xi < 0 || xi >= img.width || yi < 0 || yi >= img.height) continue;
        for (int ch = 0; ch < img.channels; ++ch)
          out.at(ch, y, x) = img.at(ch, yi, xi);
        continue;
      }

      const double xf = std::floor(xs);
      const double yf = std::floor(ys);
      const int x0 = static_cast<int>(xf);
      const int y0 = static_cast<int>(yf);
      const double ax = xs - xf;
      const double ay = ys - yf;
      const double w00 = (1 - ax) * (1 - ay);
      const double w10 = ax * (1 - ay);
      const double w01 = (1 - ax) * ay;
      const double w11 = ax * ay;
      auto sample = [&](int ch, int yy, int xx) -> double {
        if (xx < 0 || xx >= img.width || yy < 0 || yy >= img.height) return 0.0;
        return img.at(ch, yy, xx);
      };
      for (int ch = 0; ch < img.channels; ++ch) {
        const double v = w00 * sample(ch, y0, x0) + w10 * sample(ch, y0, x0 + 1) +
                         w01 * sample(ch, y0 + 1, x0) + w11 * sample(ch, y0 + 1, x0 + 1);
        out.at(ch, y, x) = static_cast<std::uint8_t>(v + 0.5);
      }
    }
  }
  return out;
}

ImageTensor flip_horizontal(const ImageTensor& img) {
  ImageTensor out(img.channels, img.height, img.width);
  for (int ch = 0; ch < img.channels; ++ch)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out.at(ch, y, x) = img.at(ch, y, img.width - 1 - x);
  return out;
}

ImageTensor pad_crop(const ImageTensor& img, int pad, int offset_x, int offset_y) {
  ImageTensor out(img.channels, img.height, img.width);
  for (int ch = 0; ch < img.channels; ++ch)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        const int sx = x + offset_x - pad;
        const int sy = y + offset_y - pad;
        if (sx < 0 || sx >= img.width || sy < 0 || sy >= img.height) continue;
        out.at(ch, y, x) = img.at(ch, sy, sx);
      }
  return out;
}

ImageTensor downscale_2x(const ImageTensor& img) {
  ImageTensor out(img.channels, img.height / 2, img.width / 2);
  for (int ch = 0; ch < img.channels; ++ch)
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x) {
        const int sum = img.at(ch, 2 * y, 2 * x) + img.at(ch, 2 * y, 2 * x + 1) +
                        img.at(ch, 2 * y + 1, 2 * x) + img.at(ch, 2 * y + 1, 2 * x + 1);
        out.at(ch, y, x) = static_cast<std::uint8_t>((sum + 2) / 4);
      }
  return out;
}

}  // namespace seqshift
