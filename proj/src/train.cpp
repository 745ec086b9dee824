#include "seqshift/train.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seqshift/imgops.hpp"

namespace seqshift {

void TrainConfig::validate(std::size_t dataset_size) const {
  if (epochs < 0 || batch_size <= 0 || learning_rate <= 0 || momentum < 0 ||
      weight_decay < 0)
    throw std::invalid_argument("train config values must be positive");
  if (static_cast<std::size_t>(batch_size) > std::max<std::size_t>(dataset_size, 1))
    throw std::invalid_argument("batch size exceeds dataset size");
}

namespace {

void fill_row(Tensor4& t, int row, const ImageTensor& img) {
  real* dst = t.sample(row);
  for (std::size_t i = 0; i < img.data.size(); ++i) dst[i] = img.data[i] / real(255);
}

}  // namespace

Tensor4 images_to_tensor(const LabeledImageSet& set, const std::vector<int>& indices,
                         bool downscale) {
  const ImageTensor& first = set.images.at(0);
  const int h = downscale ? first.height / 2 : first.height;
  const int w = downscale ? first.width / 2 : first.width;
  Tensor4 t(static_cast<int>(indices.size()), first.channels, h, w);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const ImageTensor& img = set.images[static_cast<std::size_t>(indices[r])];
    if (downscale) {
      fill_row(t, static_cast<int>(r), downscale_2x(img));
    } else {
      fill_row(t, static_cast<int>(r), img);
    }
  }
  return t;
}

Tensor4 images_to_tensor_augmented(const LabeledImageSet& set,
                                   const std::vector<int>& indices, bool downscale,
                                   const AugmentConfig& aug, std::uint64_t seed,
                                   int epoch) {
  const ImageTensor& first = set.images.at(0);
  const int h = downscale ? first.height / 2 : first.height;
  const int w = downscale ? first.width / 2 : first.width;
  Tensor4 t(static_cast<int>(indices.size()), first.channels, h, w);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const int idx = indices[r];
    Rng rng(Rng::derive(seed, "augment", static_cast<std::uint64_t>(epoch),
                        static_cast<std::uint64_t>(idx)));
    ImageTensor img = augment(set.images[static_cast<std::size_t>(idx)], aug, rng);
    if (downscale) img = downscale_2x(img);
    fill_row(t, static_cast<int>(r), img);
  }
  return t;
}

Sgd::Sgd(std::vector<Param*>* params, double lr, double momentum, double weight_decay)
    : params_(params), lr_(lr), momentum_(momentum), weight_decay_(weight_decay) {
  velocity_.resize(params->size());
  for (std::size_t i = 0; i < params->size(); ++i)
    velocity_[i].assign((*params)[i]->count(), real(0));
}

void Sgd::step() {
  for (std::size_t i = 0; i < params_->size(); ++i) {
    Param* p = (*params_)[i];
    if (!p->trainable || p->frozen) continue;
    auto& vel = velocity_[i];
    if (vel.size() != p->count()) vel.assign(p->count(), real(0));
    for (std::size_t k = 0; k < p->count(); ++k) {
      const real g = p->grad[k] + weight_decay_ * p->value[k];
      vel[k] = momentum_ * vel[k] + g;
      p->value[k] -= lr_ * vel[k];
    }
  }
}

TrainReport train_supervised(Net& net, const LabeledImageSet& train,
                             const LabeledImageSet* val, const TrainConfig& cfg,
                             int active_sides, const std::function<void(Net&)>* grad_hook) {
  cfg.validate(train.size());
  const int n = static_cast<int>(train.size());
  const int classes = train.num_classes;
  Sgd opt(&net.params(), cfg.learning_rate, cfg.momentum, cfg.weight_decay);

  TrainReport report;
  std::optional<WeightVector> best;

  std::vector<int> order(static_cast<std::size_t>(n));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // each epoch's order depends only on (seed, epoch)
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng shuffle_rng(Rng::derive(cfg.seed, "batches", static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    int seen = 0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int end = std::min(n, start + cfg.batch_size);
      const std::vector<int> idx(order.begin() + start, order.begin() + end);
      Tensor4 x = cfg.augment
                      ? images_to_tensor_augmented(train, idx, cfg.downscale,
                                                   cfg.augment_cfg, cfg.seed, epoch)
                      : images_to_tensor(train, idx, cfg.downscale);
      std::vector<int> labels(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i)
        labels[i] = train.labels[static_cast<std::size_t>(idx[i])];

      const Tensor4 logits = net.forward(x, /*train=*/true, active_sides);
      std::vector<real> dlogits;
      const real loss = SoftmaxCE::loss_and_grad(logits.v, logits.n, classes, labels,
                                                 &dlogits);
      Tensor4 dl(logits.n, logits.c, 1, 1);
      dl.v = std::move(dlogits);
      net.zero_grads();
      net.backward(dl);
      if (grad_hook) (*grad_hook)(net);
      opt.step();

      loss_sum += loss * static_cast<double>(idx.size());
      seen += static_cast<int>(idx.size());
    }

    EpochStats stats;
    stats.train_loss = seen > 0 ? loss_sum / seen : 0.0;
    if (val && val->size() > 0) {
      stats.val_accuracy =
          eval_accuracy(net, *val, cfg.batch_size, cfg.downscale, active_sides);
      if (stats.val_accuracy > report.best_val_accuracy || report.best_epoch < 0) {
        report.best_val_accuracy = stats.val_accuracy;
        report.best_epoch = epoch;
        if (cfg.select_best_by_val) best = net.snapshot();
      }
    }
    report.epochs.push_back(stats);
    if (cfg.early_stop_patience > 0 && val && val->size() > 0 &&
        epoch - report.best_epoch >= cfg.early_stop_patience)
      break;
  }

  if (best) net.load(*best);
  return report;
}

namespace {

double run_eval(Net& net, const LabeledImageSet& set, int batch_size, bool downscale,
                int active_sides, bool want_loss) {
  const int n = static_cast<int>(set.size());
  if (n == 0) return 0.0;
  int correct = 0;
  double loss_sum = 0.0;
  for (int start = 0; start < n; start += batch_size) {
    const int end = std::min(n, start + batch_size);
    std::vector<int> idx;
    for (int i = start; i < end; ++i) idx.push_back(i);
    const Tensor4 x = images_to_tensor(set, idx, downscale);
    const Tensor4 logits = net.forward(x, /*train=*/false, active_sides);
    std::vector<int> labels(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      labels[i] = set.labels[static_cast<std::size_t>(idx[i])];
    if (want_loss) {
      loss_sum += SoftmaxCE::loss_only(logits.v, logits.n, logits.c, labels) *
                  static_cast<double>(idx.size());
    } else {
      for (int s = 0; s < logits.n; ++s) {
        int arg = 0;
        for (int c = 1; c < logits.c; ++c)
          if (logits.at(s, c, 0, 0) > logits.at(s, arg, 0, 0)) arg = c;
        correct += arg == labels[static_cast<std::size_t>(s)];
      }
    }
  }
  return want_loss ? loss_sum / n : static_cast<double>(correct) / n;
}

}  // namespace

double eval_accuracy(Net& net, const LabeledImageSet& set, int batch_size,
                     bool downscale, int active_sides) {
  return run_eval(net, set, batch_size, downscale, active_sides, false);
}

double eval_loss(Net& net, const LabeledImageSet& set, int batch_size, bool downscale,
                 int active_sides) {
  return run_eval(net, set, batch_size, downscale, active_sides, true);
}

GradCheckReport finite_difference_check(Net& net, const std::function<real()>& loss_fn,
                                        const std::function<void()>& compute_grads,
                                        double fraction, std::uint64_t seed) {
  compute_grads();
  std::vector<std::pair<Param*, std::vector<real>>> analytic;
  for (Param* p : net.params())
    if (p->trainable) analytic.emplace_back(p, p->grad);

  // running statistics mutate on train-mode forward passes; keep them pinned
  std::vector<std::pair<Param*, std::vector<real>>> stats;
  for (Param* p : net.params())
    if (!p->trainable) stats.emplace_back(p, p->value);
  auto restore_stats = [&] {
    for (auto& [p, saved] : stats) p->value = saved;
  };

  const real h = 1e-4;
  Rng rng(Rng::derive(seed, "fdcheck"));
  GradCheckReport report;
  net.set_mask_freeze(true);
  for (auto& [p, grads] : analytic) {
    for (std::size_t k = 0; k < p->count(); ++k) {
      if (rng.next_real() > fraction) continue;
      const real saved = p->value[k];
      p->value[k] = saved + h;
      const real up = loss_fn();
      restore_stats();
      p->value[k] = saved - h;
      const real down = loss_fn();
      restore_stats();
      p->value[k] = saved;

      const real numeric = (up - down) / (2 * h);
      const real a = grads[k];
      real err = 0.0;
      if (std::fabs(a) > 1e-7 || std::fabs(numeric) > 1e-7)
        err = std::fabs(a - numeric) / std::max({std::fabs(a), std::fabs(numeric)});
      ++report.checked;
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_param = p->name + "[" + std::to_string(k) + "]";
      }
    }
  }
  net.set_mask_freeze(false);
  return report;
}

GradCheckReport gradient_check(Net& net, const Tensor4& x, const std::vector<int>& labels,
                               double fraction, std::uint64_t seed) {
  const int classes = net.config().num_classes;
  auto loss_fn = [&]() -> real {
    const Tensor4 logits = net.forward(x, /*train=*/true);
    return SoftmaxCE::loss_only(logits.v, logits.n, classes, labels);
  };
  auto compute_grads = [&] {
    const Tensor4 logits = net.forward(x, /*train=*/true);
    std::vector<real> dlogits;
    SoftmaxCE::loss_and_grad(logits.v, logits.n, classes, labels, &dlogits);
    Tensor4 dl(logits.n, logits.c, 1, 1);
    dl.v = std::move(dlogits);
    net.zero_grads();
    net.backward(dl);
  };
  return finite_difference_check(net, loss_fn, compute_grads, fraction, seed);
}

}  // namespace seqshift
