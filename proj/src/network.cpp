#include "seqshift/network.hpp"

#include <stdexcept>

namespace seqshift {

namespace {

Tensor4 concat_channels(const Tensor4& a, const Tensor4& b) {
  Tensor4 out(a.n, a.c + b.c, a.h, a.w);
  const std::size_t pa = a.plane();
  for (int s = 0; s < a.n; ++s) {
    std::copy(a.sample(s), a.sample(s) + static_cast<std::size_t>(a.c) * pa,
              out.sample(s));
    std::copy(b.sample(s), b.sample(s) + static_cast<std::size_t>(b.c) * pa,
              out.sample(s) + static_cast<std::size_t>(a.c) * pa);
  }
  return out;
}

Tensor4 channel_slice(const Tensor4& x, int c0, int c1) {
  Tensor4 out(x.n, c1 - c0, x.h, x.w);
  const std::size_t plane = x.plane();
  for (int s = 0; s < x.n; ++s)
    std::copy(x.sample(s) + static_cast<std::size_t>(c0) * plane,
              x.sample(s) + static_cast<std::size_t>(c1) * plane, out.sample(s));
  return out;
}

void add_into(Tensor4& dst, const Tensor4& src) {
  for (std::size_t i = 0; i < dst.v.size(); ++i) dst.v[i] += src.v[i];
}

int scaled(int channels, int factor) { return std::max(1, channels / factor); }

std::unique_ptr<Sequential> conv_bn(int in_ch, int out_ch, int kernel, int stride,
                                    int pad) {
  auto seq = std::make_unique<Sequential>();
  seq->add("conv", std::make_unique<Conv2d>(in_ch, out_ch, kernel, stride, pad));
  seq->add("bn", std::make_unique<BatchNorm>(out_ch));
  return seq;
}

void zero_last_bn_gamma(Sequential& seq) {
  for (std::size_t i = seq.size(); i-- > 0;) {
    if (auto* bn = dynamic_cast<BatchNorm*>(seq.layer(i))) {
      bn->zero_init_gamma();
      return;
    }
  }
}

}  // namespace

NetworkConfig NetworkConfig::from_name(const std::string& name, int num_classes,
                                       int image_size, int scale_factor) {
  NetworkConfig cfg;
  cfg.name = name;
  cfg.num_classes = num_classes;
  cfg.image_size = image_size;
  cfg.scale_factor = scale_factor;
  auto pick = [&](int n, std::vector<std::vector<int>> table) {
    if (n < 1 || n > 4) throw std::invalid_argument("unknown architecture " + name);
    return table[static_cast<std::size_t>(n - 1)];
  };
  if (name.rfind("conv", 0) == 0 && name.size() == 5) {
    cfg.family = Family::kConv;
    cfg.sizes = pick(name[4] - '0',
                     {{512}, {128, 512}, {128, 256, 512}, {64, 128, 256, 512}});
  } else if (name.rfind("res", 0) == 0 && name.size() == 4) {
    cfg.family = Family::kRes;
    cfg.sizes = pick(name[3] - '0',
                     {{512}, {128, 512}, {128, 256, 512}, {64, 128, 256, 512}});
  } else if (name.rfind("dense", 0) == 0 && name.size() == 6) {
    cfg.family = Family::kDense;
    cfg.sizes = pick(name[5] - '0', {{16}, {6, 16}, {6, 12, 16}, {6, 12, 24, 16}});
  } else {
    throw std::invalid_argument("unknown architecture " + name);
  }
  return cfg;
}

// -------------------------------------------------------------- ParallelSum

void ParallelSum::add(std::string name, std::unique_ptr<Layer> child) {
  children_.emplace_back(std::move(name), std::move(child));
}

Tensor4 ParallelSum::forward(const Tensor4& x, bool train) {
  Tensor4 y = children_.front().second->forward(x, train);
  for (std::size_t i = 1; i < children_.size(); ++i)
    add_into(y, children_[i].second->forward(x, train));
  return y;
}

Tensor4 ParallelSum::backward(const Tensor4& dy) {
  Tensor4 dx = children_.front().second->backward(dy);
  for (std::size_t i = 1; i < children_.size(); ++i)
    add_into(dx, children_[i].second->backward(dy));
  return dx;
}

void ParallelSum::collect_params(const std::string& prefix, std::vector<Param*>* out) {
  for (auto& [name, child] : children_) child->collect_params(prefix + "." + name, out);
}

void ParallelSum::init_params(Rng& rng) {
  for (auto& [name, child] : children_) child->init_params(rng);
}

void ParallelSum::set_frozen(bool frozen) {
  frozen_ = frozen;
  for (auto& [name, child] : children_) child->set_frozen(frozen);
}

void ParallelSum::set_mask_freeze(bool on) {
  mask_freeze_ = on;
  for (auto& [name, child] : children_) child->set_mask_freeze(on);
}

// --------------------------------------------------------------- BasicBlock

BasicBlock::BasicBlock(int in_ch, int out_ch, int stride) {
  main_.add("conv1", std::make_unique<Conv2d>(in_ch, out_ch, 3, stride, 1));
  main_.add("bn1", std::make_unique<BatchNorm>(out_ch));
  main_.add("relu1", std::make_unique<ReLU>());
  main_.add("conv2", std::make_unique<Conv2d>(out_ch, out_ch, 3, 1, 1));
  main_.add("bn2", std::make_unique<BatchNorm>(out_ch));
  if (in_ch != out_ch || stride != 1) {
    proj_ = std::make_unique<Sequential>();
    proj_->add("conv", std::make_unique<Conv2d>(in_ch, out_ch, 1, stride, 0));
    proj_->add("bn", std::make_unique<BatchNorm>(out_ch));
  }
}

Tensor4 BasicBlock::forward(const Tensor4& x, bool train) {
  Tensor4 y = main_.forward(x, train);
  if (proj_) {
    add_into(y, proj_->forward(x, train));
  } else {
    add_into(y, x);
  }
  if (mask_freeze_ && relu_mask_.size() == y.size()) {
    for (std::size_t i = 0; i < y.v.size(); ++i)
      if (!relu_mask_[i]) y.v[i] = 0;
    return y;
  }
  relu_mask_.assign(y.size(), 0);
  for (std::size_t i = 0; i < y.v.size(); ++i) {
    if (y.v[i] > 0)
      relu_mask_[i] = 1;
    else
      y.v[i] = 0;
  }
  return y;
}

Tensor4 BasicBlock::backward(const Tensor4& dy) {
  Tensor4 dz = dy;
  for (std::size_t i = 0; i < dz.v.size(); ++i)
    if (!relu_mask_[i]) dz.v[i] = 0;
  Tensor4 dx = main_.backward(dz);
  if (proj_) {
    add_into(dx, proj_->backward(dz));
  } else {
    add_into(dx, dz);
  }
  return dx;
}

void BasicBlock::collect_params(const std::string& prefix, std::vector<Param*>* out) {
  main_.collect_params(prefix, out);
  if (proj_) proj_->collect_params(prefix + ".down", out);
}

void BasicBlock::init_params(Rng& rng) {
  main_.init_params(rng);
  if (proj_) proj_->init_params(rng);
}

void BasicBlock::set_frozen(bool frozen) {
  frozen_ = frozen;
  main_.set_frozen(frozen);
  if (proj_) proj_->set_frozen(frozen);
}

void BasicBlock::set_mask_freeze(bool on) {
  mask_freeze_ = on;
  main_.set_mask_freeze(on);
  if (proj_) proj_->set_mask_freeze(on);
}

// ---------------------------------------------------------------- DenseBlock

DenseBlock::DenseBlock(int in_ch, int num_layers, int growth, bool zero_passthrough)
    : in_ch_(in_ch), num_layers_(num_layers), growth_(growth),
      zero_passthrough_(zero_passthrough) {
  for (int i = 0; i < num_layers; ++i) {
    const int ci = in_ch + i * growth;
    auto layer = std::make_unique<Sequential>();
    layer->add("bn1", std::make_unique<BatchNorm>(ci));
    layer->add("relu1", std::make_unique<ReLU>());
    layer->add("conv1", std::make_unique<Conv2d>(ci, 4 * growth, 1, 1, 0));
    layer->add("bn2", std::make_unique<BatchNorm>(4 * growth));
    layer->add("relu2", std::make_unique<ReLU>());
    layer->add("conv2", std::make_unique<Conv2d>(4 * growth, growth, 3, 1, 1));
    layers_.push_back(std::move(layer));
  }
}

void DenseBlock::zero_init_outputs() {
  for (auto& layer : layers_)
    if (auto* conv = dynamic_cast<Conv2d*>(layer->layer(layer->size() - 1)))
      conv->zero_init_weight();
}

Tensor4 DenseBlock::forward(const Tensor4& x, bool train) {
  Tensor4 feats = x;
  for (auto& layer : layers_)
    feats = concat_channels(feats, layer->forward(feats, train));
  if (!zero_passthrough_) return feats;
  Tensor4 out = feats;
  const std::size_t head = static_cast<std::size_t>(in_ch_) * out.plane();
  for (int s = 0; s < out.n; ++s)
    std::fill(out.sample(s), out.sample(s) + head, real(0));
  return out;
}

Tensor4 DenseBlock::backward(const Tensor4& dy) {
  Tensor4 dfeats = dy;
  if (zero_passthrough_) {
    const std::size_t head = static_cast<std::size_t>(in_ch_) * dfeats.plane();
    for (int s = 0; s < dfeats.n; ++s)
      std::fill(dfeats.sample(s), dfeats.sample(s) + head, real(0));
  }
  for (int i = num_layers_ - 1; i >= 0; --i) {
    const int ci = in_ch_ + i * growth_;
    const Tensor4 dout = channel_slice(dfeats, ci, ci + growth_);
    Tensor4 dinput = layers_[static_cast<std::size_t>(i)]->backward(dout);
    dfeats = channel_slice(dfeats, 0, ci);
    add_into(dfeats, dinput);
  }
  return dfeats;
}

void DenseBlock::collect_params(const std::string& prefix, std::vector<Param*>* out) {
  for (std::size_t i = 0; i < layers_.size(); ++i)
    layers_[i]->collect_params(prefix + ".layer" + std::to_string(i), out);
}

void DenseBlock::init_params(Rng& rng) {
  for (auto& layer : layers_) layer->init_params(rng);
}

void DenseBlock::set_frozen(bool frozen) {
  frozen_ = frozen;
  for (auto& layer : layers_) layer->set_frozen(frozen);
}

void DenseBlock::set_mask_freeze(bool on) {
  mask_freeze_ = on;
  for (auto& layer : layers_) layer->set_mask_freeze(on);
}

// ---------------------------------------------------------------- SidedBlock

Tensor4 SidedBlock::forward(const Tensor4& x, bool train, int active_sides) {
  last_active = active_sides < 0 ? static_cast<int>(sides.size())
                                 : std::min<int>(active_sides, sides.size());
  Tensor4 y = base->forward(x, train);
  for (int j = 0; j < last_active; ++j)
    add_into(y, sides[static_cast<std::size_t>(j)]->forward(x, train));
  return y;
}

Tensor4 SidedBlock::backward(const Tensor4& dy) {
  Tensor4 dx = base->backward(dy);
  for (int j = 0; j < last_active; ++j)
    add_into(dx, sides[static_cast<std::size_t>(j)]->backward(dy));
  return dx;
}

// ----------------------------------------------------------------------- Net

Net::Net(const NetworkConfig& cfg) : cfg_(cfg) {
  const int f = cfg.scale_factor;
  const int stem_ch = scaled(64, f);
  stem_.add("conv", std::make_unique<Conv2d>(cfg.in_channels, stem_ch, 3, 1, 1));
  stem_.add("bn", std::make_unique<BatchNorm>(stem_ch));
  stem_.add("relu", std::make_unique<ReLU>());

  int ch = stem_ch;
  if (cfg.family == Family::kConv || cfg.family == Family::kRes) {
    for (int size : cfg.sizes) {
      const int out = scaled(size, f);
      SidedBlock block;
      block.in_ch = ch;
      block.out_ch = out;
      if (cfg.family == Family::kConv) {
        block.stride = 1;
        auto seq = std::make_unique<Sequential>();
        seq->add("conv", std::make_unique<Conv2d>(ch, out, 3, 1, 1));
        seq->add("bn", std::make_unique<BatchNorm>(out));
        seq->add("relu", std::make_unique<ReLU>());
        block.base = std::move(seq);
      } else {
        block.stride = ch != out ? 2 : 1;
        block.res_proj = ch != out || block.stride != 1;
        auto seq = std::make_unique<Sequential>();
        seq->add("bb1", std::make_unique<BasicBlock>(ch, out, block.stride));
        seq->add("bb2", std::make_unique<BasicBlock>(out, out, 1));
        block.base = std::move(seq);
      }
      blocks_.push_back(std::move(block));
      ch = out;
    }
  } else {
    const int growth = scaled(cfg.dense_growth, f);
    for (std::size_t i = 0; i < cfg.sizes.size(); ++i) {
      const int layers = cfg.sizes[i];
      SidedBlock block;
      block.in_ch = ch;
      block.stride = 1;
      block.dense_layers = layers;
      auto dense = std::make_unique<DenseBlock>(ch, layers, growth);
      ch = dense->out_channels();
      block.out_ch = ch;
      block.base = std::move(dense);
      blocks_.push_back(std::move(block));
      if (i + 1 < cfg.sizes.size()) {
        auto trans = std::make_unique<Sequential>();
        trans->add("bn", std::make_unique<BatchNorm>(ch));
        trans->add("relu", std::make_unique<ReLU>());
        trans->add("conv", std::make_unique<Conv2d>(ch, ch / 2, 1, 1, 0));
        trans->add("pool", std::make_unique<AvgPool2>());
        transitions_.push_back(std::move(trans));
        ch = ch / 2;
      }
    }
  }

  if (cfg.family == Family::kDense) {
    head_.add("bn", std::make_unique<BatchNorm>(ch));
    head_.add("relu", std::make_unique<ReLU>());
  }
  head_.add("gap", std::make_unique<GlobalAvgPool>());
  head_.add("fc", std::make_unique<Linear>(ch, cfg.num_classes));

  rebuild_registry();
}

void Net::rebuild_registry() {
  components_.clear();
  params_.clear();
  components_.push_back({"stem", &stem_});
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string bname = "block" + std::to_string(i);
    components_.push_back({bname, blocks_[i].base.get()});
    for (std::size_t j = 0; j < blocks_[i].sides.size(); ++j)
      components_.push_back(
          {bname + ".side" + std::to_string(j), blocks_[i].sides[j].get()});
    if (cfg_.family == Family::kDense && i < transitions_.size())
      components_.push_back({"trans" + std::to_string(i), transitions_[i].get()});
  }
  components_.push_back({"head", &head_});
  for (auto& comp : components_) comp.layer->collect_params(comp.name, &params_);
}

void Net::init_params(std::uint64_t seed) {
  Rng rng(Rng::derive(seed, "net_init"));
  stem_.init_params(rng);
  for (auto& block : blocks_) block.base->init_params(rng);
  for (auto& trans : transitions_) trans->init_params(rng);
  head_.init_params(rng);
}

Tensor4 Net::forward(const Tensor4& x, bool train, int active_sides,
                     ForwardCapture* capture) {
  auto tap = [&](const std::string& name, const Tensor4& t) {
    if (!capture) return;
    Eigen::MatrixXd m(t.n, t.c);
    const std::size_t plane = t.plane();
    for (int s = 0; s < t.n; ++s)
      for (int c = 0; c < t.c; ++c) {
        const real* p = t.sample(s) + c * plane;
        real acc = 0;
        for (std::size_t k = 0; k < plane; ++k) acc += p[k];
        m(s, c) = acc / real(plane);
      }
    capture->taps.push_back(std::move(m));
    capture->tap_names.push_back(name);
  };

  Tensor4 cur = stem_.forward(x, train);
  tap("stem", cur);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    cur = blocks_[i].forward(cur, train, active_sides);
    tap("block" + std::to_string(i), cur);
    if (cfg_.family == Family::kDense && i < transitions_.size())
      cur = transitions_[i]->forward(cur, train);
  }
  cur = head_.forward(cur, train);
  tap("logits", cur);
  return cur;
}

void Net::backward(const Tensor4& dlogits) {
  Tensor4 cur = head_.backward(dlogits);
  for (std::size_t i = blocks_.size(); i-- > 0;) {
    if (cfg_.family == Family::kDense && i < transitions_.size())
      cur = transitions_[i]->backward(cur);
    cur = blocks_[i].backward(cur);
  }
  stem_.backward(cur);
}

void Net::zero_grads() {
  for (Param* p : params_) std::fill(p->grad.begin(), p->grad.end(), real(0));
}

int Net::attach_sides(SideKind kind, std::uint64_t seed) {
  const int index = num_sides_;
  const int f = cfg_.scale_factor;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    SidedBlock& block = blocks_[i];
    std::unique_ptr<Layer> side;
    if (cfg_.family == Family::kConv ||
        (cfg_.family == Family::kRes && kind == SideKind::kOneLayer)) {
      auto seq = conv_bn(block.in_ch, block.out_ch, 3, block.stride, 1);
      Rng rng(Rng::derive(seed, "side_init", index, i));
      seq->init_params(rng);
      zero_last_bn_gamma(*seq);
      side = std::move(seq);
    } else if (cfg_.family == Family::kRes) {
      auto par = std::make_unique<ParallelSum>();
      auto main = std::make_unique<Sequential>();
      main->add("conv1", std::make_unique<Conv2d>(block.in_ch, block.out_ch, 3,
                                                  block.stride, 1));
      main->add("bn1", std::make_unique<BatchNorm>(block.out_ch));
      main->add("relu1", std::make_unique<ReLU>());
      main->add("conv2", std::make_unique<Conv2d>(block.out_ch, block.out_ch, 3, 1, 1));
      main->add("bn2", std::make_unique<BatchNorm>(block.out_ch));
      main->add("relu2", std::make_unique<ReLU>());
      main->add("conv3", std::make_unique<Conv2d>(block.out_ch, block.out_ch, 3, 1, 1));
      main->add("bn3", std::make_unique<BatchNorm>(block.out_ch));
      main->add("relu3", std::make_unique<ReLU>());
      main->add("conv4", std::make_unique<Conv2d>(block.out_ch, block.out_ch, 3, 1, 1));
      main->add("bn4", std::make_unique<BatchNorm>(block.out_ch));
      Sequential* main_ptr = main.get();
      par->add("main", std::move(main));
      Sequential* proj_ptr = nullptr;
      if (block.res_proj) {
        auto proj = std::make_unique<Sequential>();
        proj->add("conv", std::make_unique<Conv2d>(block.in_ch, block.out_ch, 1,
                                                   block.stride, 0));
        proj->add("bn", std::make_unique<BatchNorm>(block.out_ch));
        proj_ptr = proj.get();
        par->add("proj", std::move(proj));
      }
      Rng rng(Rng::derive(seed, "side_init", index, i));
      par->init_params(rng);
      zero_last_bn_gamma(*main_ptr);
      if (proj_ptr) zero_last_bn_gamma(*proj_ptr);
      side = std::move(par);
    } else if (kind == SideKind::kOneLayer) {
      auto seq = conv_bn(block.in_ch, block.out_ch, 3, 1, 1);
      Rng rng(Rng::derive(seed, "side_init", index, i));
      seq->init_params(rng);
      zero_last_bn_gamma(*seq);
      side = std::move(seq);
    } else {
      const int growth = scaled(cfg_.dense_growth, f);
      auto dense = std::make_unique<DenseBlock>(block.in_ch, block.dense_layers,
                                                growth, /*zero_passthrough=*/true);
      Rng rng(Rng::derive(seed, "side_init", index, i));
      dense->init_params(rng);
      dense->zero_init_outputs();
      side = std::move(dense);
    }
    block.sides.push_back(std::move(side));
  }
  ++num_sides_;
  rebuild_registry();
  return index;
}

long long Net::param_count(bool trainable_only) const {
  long long total = 0;
  for (const Param* p : params_)
    if (!trainable_only || p->trainable) total += static_cast<long long>(p->count());
  return total;
}

long long Net::side_param_count(int side_index) const {
  const std::string suffix = ".side" + std::to_string(side_index);
  long long total = 0;
  for (const auto& comp : components_) {
    if (comp.name.size() < suffix.size() ||
        comp.name.compare(comp.name.size() - suffix.size(), suffix.size(), suffix) != 0)
      continue;
    std::vector<Param*> tmp;
    comp.layer->collect_params(comp.name, &tmp);
    for (Param* p : tmp)
      if (p->trainable) total += static_cast<long long>(p->count());
  }
  return total;
}

long long Net::block_param_count(int block_index) const {
  std::vector<Param*> tmp;
  blocks_[static_cast<std::size_t>(block_index)].base->collect_params("b", &tmp);
  long long total = 0;
  for (Param* p : tmp)
    if (p->trainable) total += static_cast<long long>(p->count());
  return total;
}

WeightVector Net::snapshot() const {
  WeightVector w;
  w.entries.reserve(params_.size());
  for (const Param* p : params_) {
    WeightEntry e;
    e.name = p->name;
    e.shape = p->shape;
    e.data = p->value;
    e.trainable = p->trainable;
    w.entries.push_back(std::move(e));
  }
  return w;
}

void Net::load(const WeightVector& w) {
  if (w.entries.size() != params_.size())
    throw std::invalid_argument("weight vector entry count mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& e = w.entries[i];
    Param* p = params_[i];
    if (e.name != p->name || e.shape != p->shape)
      throw std::invalid_argument("weight schema mismatch at " + e.name);
    p->value = e.data;
  }
}

void Net::set_mask_freeze(bool on) {
  for (auto& comp : components_) comp.layer->set_mask_freeze(on);
}

void Net::set_frozen_all(bool frozen) {
  for (auto& comp : components_) comp.layer->set_frozen(frozen);
  for (Param* p : params_) p->frozen = frozen;
}

void Net::set_frozen_prefix(const std::string& prefix, bool frozen) {
  auto matches = [&](const std::string& name) {
    if (prefix == "blocks") return name.rfind("block", 0) == 0 &&
                                   name.find(".side") == std::string::npos;
    if (prefix == "sides") return name.find(".side") != std::string::npos;
    return name == prefix ||
           (name.size() > prefix.size() && name.rfind(prefix + ".", 0) == 0);
  };
  for (auto& comp : components_) {
    if (!matches(comp.name)) continue;
    comp.layer->set_frozen(frozen);
    std::vector<Param*> tmp;
    comp.layer->collect_params(comp.name, &tmp);
    for (Param* p : tmp) p->frozen = frozen;
  }
}

Eigen::MatrixXd logits_to_matrix(const Tensor4& logits) {
  Eigen::MatrixXd m(logits.n, logits.c);
  for (int s = 0; s < logits.n; ++s)
    for (int c = 0; c < logits.c; ++c) m(s, c) = logits.at(s, c, 0, 0);
  return m;
}

std::vector<real> logits_to_vector(const Tensor4& logits) { return logits.v; }

}  // namespace seqshift
