#pragma once

#include <cstddef>
#include <vector>

namespace seqshift {

// Engine scalar. Training, checkpoint analysis and all oracle checks run
// in double; checkpoints are stored as 32-bit reals (file format).
using real = double;

// Dense NCHW activation tensor.
struct Tensor4 {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<real> v;

  Tensor4() = default;
  Tensor4(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_),
        v(static_cast<std::size_t>(n_) * c_ * h_ * w_, real(0)) {}

  std::size_t size() const { return v.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }

  real& at(int in, int ic, int iy, int ix) {
    return v[((static_cast<std::size_t>(in) * c + ic) * h + iy) * w + ix];
  }
  real at(int in, int ic, int iy, int ix) const {
    return v[((static_cast<std::size_t>(in) * c + ic) * h + iy) * w + ix];
  }
  real* sample(int in) { return v.data() + static_cast<std::size_t>(in) * c * h * w; }
  const real* sample(int in) const {
    return v.data() + static_cast<std::size_t>(in) * c * h * w;
  }
  bool same_shape(const Tensor4& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
};

}  // namespace seqshift
