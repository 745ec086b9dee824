#include "seqshift/synth.hpp"

#include <algorithm>
#include <cmath>

#include "seqshift/rng.hpp"

namespace seqshift {

namespace {

struct Rgb {
  double r, g, b;
};

Rgb hsv_to_rgb(double h, double s, double v) {
  h = h - std::floor(h);
  const double c = v * s;
  const double hp = h * 6.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1)      { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else             { r = c; b = x; }
  const double m = v - c;
  return {r + m, g + m, b + m};
}

std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0) + 0.5);
}

// Two-color scheme for a class: ring foreground vs background.
void class_scheme(int cls, int num_classes, Rgb* fg, Rgb* bg) {
  const double hue = static_cast<double>(cls) / num_classes;
  *fg = hsv_to_rgb(hue, 0.85, 0.95);
  *bg = hsv_to_rgb(hue + 0.45, 0.55, 0.45);
}

ImageTensor render_sample(int cls, int num_classes, double ring_freq, Rng rng) {
  ImageTensor img(3, 32, 32);
  Rgb fg, bg;
  class_scheme(cls, num_classes, &fg, &bg);

  const double cx = 15.5 + rng.next_real_in(-5.0, 5.0);
  const double cy = 15.5 + rng.next_real_in(-5.0, 5.0);
  const double phase = rng.next_real_in(0.0, 2.0 * M_PI);
  const double freq = ring_freq * rng.next_real_in(0.9, 1.1);
  const double bright = rng.next_real_in(0.72, 1.12);
  // independent channel-wise color jitter
  const double jfr = rng.next_real_in(-28.0, 28.0);
  const double jfg = rng.next_real_in(-28.0, 28.0);
  const double jfb = rng.next_real_in(-28.0, 28.0);
  const double jbr = rng.next_real_in(-28.0, 28.0);
  const double jbg = rng.next_real_in(-28.0, 28.0);
  const double jbb = rng.next_real_in(-28.0, 28.0);

  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      const double r = std::hypot(x - cx, y - cy);
      const double v = 0.5 * (1.0 + std::sin(2.0 * M_PI * freq * r / 16.0 + phase));
      const double pr = (v * fg.r + (1 - v) * bg.r) * 255.0 * bright + (v * jfr + (1 - v) * jbr);
      const double pg = (v * fg.g + (1 - v) * bg.g) * 255.0 * bright + (v * jfg + (1 - v) * jbg);
      const double pb = (v * fg.b + (1 - v) * bg.b) * 255.0 * bright + (v * jfb + (1 - v) * jbb);
      img.at(0, y, x) = clamp_u8(pr);
      img.at(1, y, x) = clamp_u8(pg);
      img.at(2, y, x) = clamp_u8(pb);
    }
  }

  // clutter: a few patches in other classes' colors
  const int patches = static_cast<int>(rng.next_below(4));
  for (int p = 0; p < patches; ++p) {
    const int other = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(num_classes)));
    Rgb ofg, obg;
    class_scheme(other, num_classes, &ofg, &obg);
    const Rgb col = rng.next_bool() ? ofg : obg;
    const int size = 3 + static_cast<int>(rng.next_below(5));
    const int px = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(32 - size)));
    const int py = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(32 - size)));
    for (int y = py; y < py + size; ++y)
      for (int x = px; x < px + size; ++x) {
        img.at(0, y, x) = clamp_u8(col.r * 255.0 * bright);
        img.at(1, y, x) = clamp_u8(col.g * 255.0 * bright);
        img.at(2, y, x) = clamp_u8(col.b * 255.0 * bright);
      }
  }

  // pixel noise
  for (auto& px : img.data) {
    const double n = rng.next_real_in(-26.0, 26.0);
    px = clamp_u8(px + n);
  }
  return img;
}

std::vector<BaseRecord> render_split(int count, int num_coarse, int fine_per_coarse,
                                     Rng corpus_rng, std::string_view split_tag) {
  std::vector<BaseRecord> records;
  records.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng rng = corpus_rng.stream(split_tag, static_cast<std::uint64_t>(i));
    BaseRecord rec;
    rec.label = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(num_coarse)));
    double freq = 1.35;
    if (fine_per_coarse > 0) {
      const int sub = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(fine_per_coarse)));
      rec.fine_label = rec.label * fine_per_coarse + sub;
      freq = 0.55 + 0.45 * sub;
    }
    rec.image = render_sample(rec.label, num_coarse, freq, rng.stream("pixels"));
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

BaseCorpus make_synthetic_cifar10(int train_count, int test_count, std::uint64_t seed) {
  BaseCorpus corpus;
  corpus.name = "synth10";
  corpus.num_classes = 10;
  Rng rng(Rng::derive(seed, "synth10"));
  corpus.train_records = render_split(train_count, 10, 0, rng, "train");
  corpus.test_records = render_split(test_count, 10, 0, rng, "test");
  return corpus;
}

BaseCorpus make_synthetic_cifar100(int train_count, int test_count, std::uint64_t seed) {
  BaseCorpus corpus;
  corpus.name = "synth100";
  corpus.num_classes = 20;
  corpus.num_fine_classes = 100;
  Rng rng(Rng::derive(seed, "synth100"));
  corpus.train_records = render_split(train_count, 20, 5, rng, "train");
  corpus.test_records = render_split(test_count, 20, 5, rng, "test");
  corpus.fine_to_coarse.resize(100);
  for (int f = 0; f < 100; ++f) corpus.fine_to_coarse[f] = f / 5;
  return corpus;
}

}  // namespace seqshift
