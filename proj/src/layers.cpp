#include "seqshift/layers.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace seqshift {

namespace {

using RowMat = Eigen::Matrix<real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void kaiming_uniform(Param& p, int fan_in, Rng& rng) {
  const real bound = std::sqrt(real(6) / fan_in);
  for (auto& v : p.value) v = rng.next_real_in(-bound, bound);
}

}  // namespace

// ----------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad, bool bias)
    : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), pad_(pad),
      has_bias_(bias) {
  weight.resize({out_ch, in_ch, kernel, kernel});
  if (has_bias_) bias_p.resize({out_ch});
}

void Conv2d::collect_params(const std::string& prefix, std::vector<Param*>* out) {
  weight.name = prefix + ".w";
  out->push_back(&weight);
  if (has_bias_) {
    bias_p.name = prefix + ".b";
    out->push_back(&bias_p);
  }
}

void Conv2d::init_params(Rng& rng) {
  kaiming_uniform(weight, in_ch_ * kernel_ * kernel_, rng);
  if (has_bias_) std::fill(bias_p.value.begin(), bias_p.value.end(), real(0));
}

void Conv2d::zero_init_weight() {
  std::fill(weight.value.begin(), weight.value.end(), real(0));
}

namespace {

void im2col(const real* x, int c, int h, int w, int kernel, int stride, int pad,
            int ho, int wo, real* col) {
  // col is (c*kernel*kernel) x (ho*wo)
  const int cols = ho * wo;
  for (int ci = 0; ci < c; ++ci) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        real* dst = col + ((ci * kernel + ky) * kernel + kx) * static_cast<std::size_t>(cols);
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + wo, real(0));
            dst += wo;
            continue;
          }
          const real* src = x + (static_cast<std::size_t>(ci) * h + iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride + kx - pad;
            *dst++ = (ix < 0 || ix >= w) ? real(0) : src[ix];
          }
        }
      }
    }
  }
}

void col2im_add(const real* col, int c, int h, int w, int kernel, int stride, int pad,
                int ho, int wo, real* x) {
  const int cols = ho * wo;
  for (int ci = 0; ci < c; ++ci) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const real* src =
            col + ((ci * kernel + ky) * kernel + kx) * static_cast<std::size_t>(cols);
        for (int oy = 0; oy < ho; ++oy, src += wo) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= h) continue;
          real* dst = x + (static_cast<std::size_t>(ci) * h + iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor4 Conv2d::forward(const Tensor4& x, bool) {
  if (x.c != in_ch_) throw std::invalid_argument("Conv2d: channel mismatch");
  const int ho = (x.h + 2 * pad_ - kernel_) / stride_ + 1;
  const int wo = (x.w + 2 * pad_ - kernel_) / stride_ + 1;
  x_cache_ = x;
  Tensor4 y(x.n, out_ch_, ho, wo);

  const int k2 = in_ch_ * kernel_ * kernel_;
  const int cols = ho * wo;
  col_.resize(static_cast<std::size_t>(k2) * cols);
  ConstMapMat wmat(weight.value.data(), out_ch_, k2);
  for (int s = 0; s < x.n; ++s) {
    im2col(x.sample(s), in_ch_, x.h, x.w, kernel_, stride_, pad_, ho, wo, col_.data());
    ConstMapMat cmat(col_.data(), k2, cols);
    MapMat ymat(y.sample(s), out_ch_, cols);
    ymat.noalias() = wmat * cmat;
    if (has_bias_)
      for (int oc = 0; oc < out_ch_; ++oc)
        ymat.row(oc).array() += bias_p.value[oc];
  }
  return y;
}

Tensor4 Conv2d::backward(const Tensor4& dy) {
  const Tensor4& x = x_cache_;
  const int ho = dy.h, wo = dy.w;
  const int k2 = in_ch_ * kernel_ * kernel_;
  const int cols = ho * wo;
  Tensor4 dx(x.n, x.c, x.h, x.w);

  MapMat dw(weight.grad.data(), out_ch_, k2);
  ConstMapMat wmat(weight.value.data(), out_ch_, k2);
  std::vector<real> dcol(static_cast<std::size_t>(k2) * cols);
  col_.resize(static_cast<std::size_t>(k2) * cols);
  for (int s = 0; s < x.n; ++s) {
    ConstMapMat dymat(dy.sample(s), out_ch_, cols);
    im2col(x.sample(s), in_ch_, x.h, x.w, kernel_, stride_, pad_, ho, wo, col_.data());
    ConstMapMat cmat(col_.data(), k2, cols);
    dw.noalias() += dymat * cmat.transpose();
    MapMat dcmat(dcol.data(), k2, cols);
    dcmat.noalias() = wmat.transpose() * dymat;
    col2im_add(dcol.data(), in_ch_, x.h, x.w, kernel_, stride_, pad_, ho, wo,
               dx.sample(s));
    if (has_bias_)
      for (int oc = 0; oc < out_ch_; ++oc)
        bias_p.grad[oc] += dymat.row(oc).sum();
  }
  return dx;
}

// -------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(int channels, real momentum, real eps)
    : channels_(channels), momentum_(momentum), eps_(eps) {
  gamma.resize({channels});
  beta.resize({channels});
  running_mean.resize({channels});
  running_var.resize({channels});
  running_mean.trainable = false;
  running_var.trainable = false;
}

void BatchNorm::collect_params(const std::string& prefix, std::vector<Param*>* out) {
  gamma.name = prefix + ".gamma";
  beta.name = prefix + ".beta";
  running_mean.name = prefix + ".running_mean";
  running_var.name = prefix + ".running_var";
  out->push_back(&gamma);
  out->push_back(&beta);
  out->push_back(&running_mean);
  out->push_back(&running_var);
}

void BatchNorm::init_params(Rng&) {
  std::fill(gamma.value.begin(), gamma.value.end(), real(1));
  std::fill(beta.value.begin(), beta.value.end(), real(0));
  std::fill(running_mean.value.begin(), running_mean.value.end(), real(0));
  std::fill(running_var.value.begin(), running_var.value.end(), real(1));
}

void BatchNorm::zero_init_gamma() {
  std::fill(gamma.value.begin(), gamma.value.end(), real(0));
}

Tensor4 BatchNorm::forward(const Tensor4& x, bool train) {
  x_cache_ = x;
  used_batch_stats_ = train && !frozen_;
  const std::size_t plane = x.plane();
  const std::size_t m = static_cast<std::size_t>(x.n) * plane;
  mean_.assign(channels_, real(0));
  var_.assign(channels_, real(0));
  inv_std_.assign(channels_, real(0));

  if (used_batch_stats_) {
    for (int s = 0; s < x.n; ++s)
      for (int c = 0; c < channels_; ++c) {
        const real* p = x.sample(s) + c * plane;
        real acc = 0;
        for (std::size_t i = 0; i < plane; ++i) acc += p[i];
        mean_[c] += acc;
      }
    for (int c = 0; c < channels_; ++c) mean_[c] /= real(m);
    for (int s = 0; s < x.n; ++s)
      for (int c = 0; c < channels_; ++c) {
        const real* p = x.sample(s) + c * plane;
        real acc = 0;
        for (std::size_t i = 0; i < plane; ++i) {
          const real d = p[i] - mean_[c];
          acc += d * d;
        }
        var_[c] += acc;
      }
    for (int c = 0; c < channels_; ++c) var_[c] /= real(m);
    for (int c = 0; c < channels_; ++c) {
      inv_std_[c] = real(1) / std::sqrt(var_[c] + eps_);
      const real unbiased = m > 1 ? var_[c] * real(m) / real(m - 1) : var_[c];
      running_mean.value[c] = (1 - momentum_) * running_mean.value[c] + momentum_ * mean_[c];
      running_var.value[c] = (1 - momentum_) * running_var.value[c] + momentum_ * unbiased;
    }
  } else {
    for (int c = 0; c < channels_; ++c) {
      mean_[c] = running_mean.value[c];
      inv_std_[c] = real(1) / std::sqrt(running_var.value[c] + eps_);
    }
  }

  Tensor4 y(x.n, x.c, x.h, x.w);
  for (int s = 0; s < x.n; ++s)
    for (int c = 0; c < channels_; ++c) {
      const real* p = x.sample(s) + c * plane;
      real* q = y.sample(s) + c * plane;
      const real g = gamma.value[c] * inv_std_[c];
      const real b = beta.value[c] - mean_[c] * g;
      for (std::size_t i = 0; i < plane; ++i) q[i] = p[i] * g + b;
    }
  return y;
}

Tensor4 BatchNorm::backward(const Tensor4& dy) {
  const Tensor4& x = x_cache_;
  const std::size_t plane = x.plane();
  const std::size_t m = static_cast<std::size_t>(x.n) * plane;
  Tensor4 dx(x.n, x.c, x.h, x.w);

  std::vector<real> dgamma(channels_, 0), dbeta(channels_, 0);
  for (int s = 0; s < x.n; ++s)
    for (int c = 0; c < channels_; ++c) {
      const real* px = x.sample(s) + c * plane;
      const real* pdy = dy.sample(s) + c * plane;
      real dg = 0, db = 0;
      for (std::size_t i = 0; i < plane; ++i) {
        dg += pdy[i] * (px[i] - mean_[c]) * inv_std_[c];
        db += pdy[i];
      }
      dgamma[c] += dg;
      dbeta[c] += db;
    }
  for (int c = 0; c < channels_; ++c) {
    gamma.grad[c] += dgamma[c];
    beta.grad[c] += dbeta[c];
  }

  if (used_batch_stats_) {
    for (int s = 0; s < x.n; ++s)
      for (int c = 0; c < channels_; ++c) {
        const real* px = x.sample(s) + c * plane;
        const real* pdy = dy.sample(s) + c * plane;
        real* pdx = dx.sample(s) + c * plane;
        const real gi = gamma.value[c] * inv_std_[c] / real(m);
        for (std::size_t i = 0; i < plane; ++i) {
          const real xhat = (px[i] - mean_[c]) * inv_std_[c];
          pdx[i] = gi * (real(m) * pdy[i] - dbeta[c] - xhat * dgamma[c]);
        }
      }
  } else {
    for (int s = 0; s < x.n; ++s)
      for (int c = 0; c < channels_; ++c) {
        const real* pdy = dy.sample(s) + c * plane;
        real* pdx = dx.sample(s) + c * plane;
        const real g = gamma.value[c] * inv_std_[c];
        for (std::size_t i = 0; i < plane; ++i) pdx[i] = pdy[i] * g;
      }
  }
  return dx;
}

// ------------------------------------------------------------------- ReLU

Tensor4 ReLU::forward(const Tensor4& x, bool) {
  Tensor4 y = x;
  if (mask_freeze_ && mask_.size() == x.size()) {
    for (std::size_t i = 0; i < y.v.size(); ++i)
      if (!mask_[i]) y.v[i] = 0;
    return y;
  }
  mask_.assign(x.size(), 0);
  for (std::size_t i = 0; i < y.v.size(); ++i) {
    if (y.v[i] > 0) {
      mask_[i] = 1;
    } else {
      y.v[i] = 0;
    }
  }
  return y;
}

Tensor4 ReLU::backward(const Tensor4& dy) {
  Tensor4 dx = dy;
  for (std::size_t i = 0; i < dx.v.size(); ++i)
    if (!mask_[i]) dx.v[i] = 0;
  return dx;
}

// ---------------------------------------------------------- GlobalAvgPool

Tensor4 GlobalAvgPool::forward(const Tensor4& x, bool) {
  h_ = x.h;
  w_ = x.w;
  c_ = x.c;
  Tensor4 y(x.n, x.c, 1, 1);
  const std::size_t plane = x.plane();
  for (int s = 0; s < x.n; ++s)
    for (int c = 0; c < x.c; ++c) {
      const real* p = x.sample(s) + c * plane;
      real acc = 0;
      for (std::size_t i = 0; i < plane; ++i) acc += p[i];
      y.at(s, c, 0, 0) = acc / real(plane);
    }
  return y;
}

Tensor4 GlobalAvgPool::backward(const Tensor4& dy) {
  Tensor4 dx(dy.n, c_, h_, w_);
  const std::size_t plane = static_cast<std::size_t>(h_) * w_;
  for (int s = 0; s < dy.n; ++s)
    for (int c = 0; c < c_; ++c) {
      const real g = dy.at(s, c, 0, 0) / real(plane);
      real* p = dx.sample(s) + c * plane;
      for (std::size_t i = 0; i < plane; ++i) p[i] = g;
    }
  return dx;
}

// ---------------------------------------------------------------- AvgPool2

Tensor4 AvgPool2::forward(const Tensor4& x, bool) {
  h_ = x.h;
  w_ = x.w;
  Tensor4 y(x.n, x.c, x.h / 2, x.w / 2);
  for (int s = 0; s < x.n; ++s)
    for (int c = 0; c < x.c; ++c)
      for (int oy = 0; oy < y.h; ++oy)
        for (int ox = 0; ox < y.w; ++ox)
          y.at(s, c, oy, ox) =
              (x.at(s, c, 2 * oy, 2 * ox) + x.at(s, c, 2 * oy, 2 * ox + 1) +
               x.at(s, c, 2 * oy + 1, 2 * ox) + x.at(s, c, 2 * oy + 1, 2 * ox + 1)) /
              real(4);
  return y;
}

Tensor4 AvgPool2::backward(const Tensor4& dy) {
  Tensor4 dx(dy.n, dy.c, h_, w_);
  for (int s = 0; s < dy.n; ++s)
    for (int c = 0; c < dy.c; ++c)
      for (int oy = 0; oy < dy.h; ++oy)
        for (int ox = 0; ox < dy.w; ++ox) {
          const real g = dy.at(s, c, oy, ox) / real(4);
          dx.at(s, c, 2 * oy, 2 * ox) = g;
          dx.at(s, c, 2 * oy, 2 * ox + 1) = g;
          dx.at(s, c, 2 * oy + 1, 2 * ox) = g;
          dx.at(s, c, 2 * oy + 1, 2 * ox + 1) = g;
        }
  return dx;
}

// ----------------------------------------------------------------- Linear

Linear::Linear(int in_features, int out_features)
    : in_features_(in_features), out_features_(out_features) {
  weight.resize({out_features, in_features});
  bias.resize({out_features});
}

void Linear::collect_params(const std::string& prefix, std::vector<Param*>* out) {
  weight.name = prefix + ".w";
  bias.name = prefix + ".b";
  out->push_back(&weight);
  out->push_back(&bias);
}

void Linear::init_params(Rng& rng) {
  kaiming_uniform(weight, in_features_, rng);
  std::fill(bias.value.begin(), bias.value.end(), real(0));
}

Tensor4 Linear::forward(const Tensor4& x, bool) {
  const int features = x.c * x.h * x.w;
  if (features != in_features_) throw std::invalid_argument("Linear: shape mismatch");
  x_cache_ = x;
  Tensor4 y(x.n, out_features_, 1, 1);
  ConstMapMat xm(x.v.data(), x.n, in_features_);
  ConstMapMat wm(weight.value.data(), out_features_, in_features_);
  MapMat ym(y.v.data(), x.n, out_features_);
  ym.noalias() = xm * wm.transpose();
  for (int s = 0; s < x.n; ++s)
    for (int o = 0; o < out_features_; ++o) ym(s, o) += bias.value[o];
  return y;
}

Tensor4 Linear::backward(const Tensor4& dy) {
  const Tensor4& x = x_cache_;
  ConstMapMat xm(x.v.data(), x.n, in_features_);
  ConstMapMat dym(dy.v.data(), dy.n, out_features_);
  MapMat dwm(weight.grad.data(), out_features_, in_features_);
  dwm.noalias() += dym.transpose() * xm;
  for (int s = 0; s < dy.n; ++s)
    for (int o = 0; o < out_features_; ++o) bias.grad[o] += dym(s, o);

  Tensor4 dx(x.n, x.c, x.h, x.w);
  MapMat dxm(dx.v.data(), x.n, in_features_);
  ConstMapMat wm(weight.value.data(), out_features_, in_features_);
  dxm.noalias() = dym * wm;
  return dx;
}

// ------------------------------------------------------------- Sequential

void Sequential::add(std::string name, std::unique_ptr<Layer> layer) {
  layers_.emplace_back(std::move(name), std::move(layer));
}

Tensor4 Sequential::forward(const Tensor4& x, bool train) {
  Tensor4 cur = x;
  for (auto& [name, layer] : layers_) cur = layer->forward(cur, train);
  return cur;
}

Tensor4 Sequential::backward(const Tensor4& dy) {
  Tensor4 cur = dy;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    cur = it->second->backward(cur);
  return cur;
}

void Sequential::collect_params(const std::string& prefix, std::vector<Param*>* out) {
  for (auto& [name, layer] : layers_)
    layer->collect_params(prefix.empty() ? name : prefix + "." + name, out);
}

void Sequential::init_params(Rng& rng) {
  for (auto& [name, layer] : layers_) layer->init_params(rng);
}

void Sequential::set_frozen(bool frozen) {
  frozen_ = frozen;
  for (auto& [name, layer] : layers_) layer->set_frozen(frozen);
}

void Sequential::set_mask_freeze(bool on) {
  mask_freeze_ = on;
  for (auto& [name, layer] : layers_) layer->set_mask_freeze(on);
}

// -------------------------------------------------------------- SoftmaxCE

real SoftmaxCE::loss_and_grad(const std::vector<real>& logits, int batch, int classes,
                              const std::vector<int>& labels, std::vector<real>* dlogits) {
  dlogits->assign(logits.size(), real(0));
  real loss = 0;
  for (int s = 0; s < batch; ++s) {
    const real* z = logits.data() + static_cast<std::size_t>(s) * classes;
    real* dz = dlogits->data() + static_cast<std::size_t>(s) * classes;
    real zmax = z[0];
    for (int c = 1; c < classes; ++c) zmax = std::max(zmax, z[c]);
    real denom = 0;
    for (int c = 0; c < classes; ++c) denom += std::exp(z[c] - zmax);
    const real log_denom = std::log(denom);
    loss += -(z[labels[s]] - zmax - log_denom);
    for (int c = 0; c < classes; ++c) {
      const real p = std::exp(z[c] - zmax) / denom;
      dz[c] = (p - (c == labels[s] ? real(1) : real(0))) / real(batch);
    }
  }
  return loss / real(batch);
}

real SoftmaxCE::loss_only(const std::vector<real>& logits, int batch, int classes,
                          const std::vector<int>& labels) {
  real loss = 0;
  for (int s = 0; s < batch; ++s) {
    const real* z = logits.data() + static_cast<std::size_t>(s) * classes;
    real zmax = z[0];
    for (int c = 1; c < classes; ++c) zmax = std::max(zmax, z[c]);
    real denom = 0;
    for (int c = 0; c < classes; ++c) denom += std::exp(z[c] - zmax);
    loss += -(z[labels[s]] - zmax - std::log(denom));
  }
  return loss / real(batch);
}

}  // namespace seqshift
