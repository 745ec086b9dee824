#include "seqshift/joint.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>

namespace seqshift {

namespace {

// Per-epoch batch plan: shuffled order cut into batches, the last one
// partial, matching the single-task training loop exactly.
std::vector<std::vector<int>> epoch_batches(std::size_t n, int batch_size,
                                            std::uint64_t seed, int epoch) {
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  Rng rng(Rng::derive(seed, "batches", static_cast<std::uint64_t>(epoch)));
  rng.shuffle(order);
  std::vector<std::vector<int>> batches;
  for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size))
    batches.emplace_back(order.begin() + start,
                         order.begin() + std::min(n, start + batch_size));
  return batches;
}

// Proximal map of lambda_adj * sum_t |w_t - w_{t-1}|^2 with step size lr:
// per coordinate, solve (I + 2 lr lambda L) w = what on each contiguous
// run of trainable steps (frozen neighbours enter the right-hand side).
class AdjacentProx {
 public:
  AdjacentProx(int steps, const std::vector<char>& frozen, double alpha)
      : steps_(steps), frozen_(frozen), alpha_(alpha) {
    int start = -1;
    for (int t = 0; t <= steps_; ++t) {
      const bool free_t = t < steps_ && !frozen_[static_cast<std::size_t>(t)];
      if (free_t && start < 0) start = t;
      if (!free_t && start >= 0) {
        segments_.emplace_back(start, t - 1);
        start = -1;
      }
    }
  }

  // values: one weight per step (same coordinate), modified in place.
  void apply(std::vector<real>& values) const {
    for (const auto& [lo, hi] : segments_) {
      const int len = hi - lo + 1;
      diag_.assign(static_cast<std::size_t>(len), 0);
      rhs_.assign(static_cast<std::size_t>(len), 0);
      for (int i = 0; i < len; ++i) {
        const int t = lo + i;
        int degree = 0;
        real boundary = 0;
        if (t > 0) {
          ++degree;
          if (t - 1 < lo) boundary += values[static_cast<std::size_t>(t - 1)];
        }
        if (t < steps_ - 1) {
          ++degree;
          if (t + 1 > hi) boundary += values[static_cast<std::size_t>(t + 1)];
        }
        diag_[static_cast<std::size_t>(i)] = 1 + alpha_ * degree;
        rhs_[static_cast<std::size_t>(i)] =
            values[static_cast<std::size_t>(t)] + alpha_ * boundary;
      }
      // Thomas algorithm with constant off-diagonal -alpha
      for (int i = 1; i < len; ++i) {
        const real m = -alpha_ / diag_[static_cast<std::size_t>(i - 1)];
        diag_[static_cast<std::size_t>(i)] += m * alpha_;
        rhs_[static_cast<std::size_t>(i)] -= m * rhs_[static_cast<std::size_t>(i - 1)];
      }
      values[static_cast<std::size_t>(hi)] =
          rhs_[static_cast<std::size_t>(len - 1)] / diag_[static_cast<std::size_t>(len - 1)];
      for (int i = len - 2; i >= 0; --i)
        values[static_cast<std::size_t>(lo + i)] =
            (rhs_[static_cast<std::size_t>(i)] +
             alpha_ * values[static_cast<std::size_t>(lo + i + 1)]) /
            diag_[static_cast<std::size_t>(i)];
    }
  }

  bool trivial() const { return alpha_ == 0.0 || segments_.empty(); }

 private:
  int steps_;
  std::vector<char> frozen_;
  double alpha_;
  std::vector<std::pair<int, int>> segments_;
  mutable std::vector<real> diag_, rhs_;
};

std::uint64_t step_seed(const TrainConfig& cfg, int t, int final_step) {
  // the final step reuses the single-task stream so a frozen joint with one
  // trainable final step reproduces plain fine-tuning batch for batch
  return t == final_step ? cfg.seed
                         : Rng::derive(cfg.seed, "joint_step", static_cast<std::uint64_t>(t));
}

}  // namespace

JointResult joint_train(const SequenceData& data, const NetworkConfig& arch,
                        const JointConfig& cfg, const WeightVector* hist_init) {
  const int steps = static_cast<int>(data.steps.size());
  const int final_step = steps - 1;
  const int classes = data.final_test.num_classes;
  if (steps < 2) throw std::invalid_argument("joint model needs at least 2 steps");
  if (cfg.variant != JointVariant::kSeparate && !cfg.share.empty())
    throw std::invalid_argument("layer sharing crosses side-variant boundaries");

  std::vector<char> frozen(static_cast<std::size_t>(steps), 0);
  for (int t : cfg.frozen_steps) frozen.at(static_cast<std::size_t>(t)) = 1;

  JointResult result;
  result.variant = cfg.variant;
  result.num_steps = steps;

  if (cfg.variant == JointVariant::kSeparate) {
    std::vector<std::unique_ptr<Net>> nets;
    for (int t = 0; t < steps; ++t) {
      auto net = std::make_unique<Net>(arch);
      net->init_params(Rng::derive(cfg.train.seed, "joint_init", t));
      if (hist_init && (frozen[static_cast<std::size_t>(t)] || cfg.prev_init))
        net->load(*hist_init);
      if (frozen[static_cast<std::size_t>(t)]) net->set_frozen_all(true);
      nets.push_back(std::move(net));
    }

    // shared components start from the lowest step's values
    for (const auto& group : cfg.share)
      for (std::size_t g = 1; g < group.steps.size(); ++g)
        for (std::size_t e = 0; e < nets[0]->params().size(); ++e) {
          Param* src = nets[static_cast<std::size_t>(group.steps[0])]->params()[e];
          Param* dst = nets[static_cast<std::size_t>(group.steps[g])]->params()[e];
          if (src->name.rfind(group.component, 0) == 0) dst->value = src->value;
        }

    std::vector<std::unique_ptr<Sgd>> opts;
    for (int t = 0; t < steps; ++t)
      opts.push_back(std::make_unique<Sgd>(&nets[static_cast<std::size_t>(t)]->params(),
                                           cfg.train.learning_rate, cfg.train.momentum,
                                           cfg.lambda_l2));

    const AdjacentProx prox(steps, frozen,
                            2.0 * cfg.train.learning_rate * cfg.lambda_adj);

    std::optional<std::vector<WeightVector>> best;
    for (int epoch = 0; epoch < cfg.train.epochs; ++epoch) {
      std::vector<std::vector<std::vector<int>>> plans;
      std::size_t max_batches = 0;
      for (int t = 0; t < steps; ++t) {
        if (frozen[static_cast<std::size_t>(t)]) {
          plans.emplace_back();
          continue;
        }
        plans.push_back(epoch_batches(data.steps[static_cast<std::size_t>(t)].train.size(),
                                      cfg.train.batch_size,
                                      step_seed(cfg.train, t, final_step), epoch));
        max_batches = std::max(max_batches, plans.back().size());
      }

      for (std::size_t it = 0; it < max_batches; ++it) {
        for (int t = 0; t < steps; ++t) {
          if (frozen[static_cast<std::size_t>(t)]) continue;
          const auto& plan = plans[static_cast<std::size_t>(t)];
          if (it >= plan.size()) continue;
          const auto& idx = plan[it];
          const auto& train_set = data.steps[static_cast<std::size_t>(t)].train;
          std::vector<int> labels(idx.size());
          for (std::size_t i = 0; i < idx.size(); ++i)
            labels[i] = train_set.labels[static_cast<std::size_t>(idx[i])];
          const Tensor4 x =
              cfg.train.augment
                  ? images_to_tensor_augmented(train_set, idx, cfg.train.downscale,
                                               cfg.train.augment_cfg,
                                               step_seed(cfg.train, t, final_step), epoch)
                  : images_to_tensor(train_set, idx, cfg.train.downscale);
          Net& net = *nets[static_cast<std::size_t>(t)];
          const Tensor4 logits = net.forward(x, true);
          std::vector<real> dz;
          SoftmaxCE::loss_and_grad(logits.v, logits.n, classes, labels, &dz);
          const real c_t = t == final_step ? cfg.final_loss_weight : 1.0;
          for (auto& v : dz) v *= c_t;
          Tensor4 dl(logits.n, logits.c, 1, 1);
          dl.v = std::move(dz);
          net.zero_grads();
          net.backward(dl);
          opts[static_cast<std::size_t>(t)]->step();
        }

        if (!prox.trivial()) {
          std::vector<real> column(static_cast<std::size_t>(steps));
          const std::size_t entries = nets[0]->params().size();
          for (std::size_t e = 0; e < entries; ++e) {
            if (!nets[0]->params()[e]->trainable) continue;
            const std::size_t count = nets[0]->params()[e]->count();
            for (std::size_t k = 0; k < count; ++k) {
              for (int t = 0; t < steps; ++t)
                column[static_cast<std::size_t>(t)] =
                    nets[static_cast<std::size_t>(t)]->params()[e]->value[k];
              prox.apply(column);
              for (int t = 0; t < steps; ++t)
                if (!frozen[static_cast<std::size_t>(t)])
                  nets[static_cast<std::size_t>(t)]->params()[e]->value[k] =
                      column[static_cast<std::size_t>(t)];
            }
          }
        }

        for (const auto& group : cfg.share) {
          for (std::size_t e = 0; e < nets[0]->params().size(); ++e) {
            Param* lead = nets[static_cast<std::size_t>(group.steps[0])]->params()[e];
            if (lead->name.rfind(group.component, 0) != 0 || !lead->trainable) continue;
            for (std::size_t k = 0; k < lead->count(); ++k) {
              real mean = 0;
              for (int t : group.steps)
                mean += nets[static_cast<std::size_t>(t)]->params()[e]->value[k];
              mean /= static_cast<real>(group.steps.size());
              for (int t : group.steps)
                nets[static_cast<std::size_t>(t)]->params()[e]->value[k] = mean;
            }
          }
        }
      }

      const double val_acc = eval_accuracy(*nets[static_cast<std::size_t>(final_step)],
                                           data.steps.back().val, cfg.train.batch_size,
                                           cfg.train.downscale);
      if (val_acc > result.final_val_accuracy) {
        result.final_val_accuracy = val_acc;
        if (cfg.train.select_best_by_val) {
          best.emplace();
          for (int t = 0; t < steps; ++t)
            best->push_back(nets[static_cast<std::size_t>(t)]->snapshot());
        }
      }
    }
    if (best)
      for (int t = 0; t < steps; ++t)
        nets[static_cast<std::size_t>(t)]->load((*best)[static_cast<std::size_t>(t)]);

    for (int t = 0; t < steps; ++t) {
      result.checkpoint_names.push_back("step" + std::to_string(t));
      result.checkpoints.push_back(nets[static_cast<std::size_t>(t)]->snapshot());
      result.per_step_val_accuracy.push_back(
          eval_accuracy(*nets[static_cast<std::size_t>(t)],
                        data.steps[static_cast<std::size_t>(t)].val,
                        cfg.train.batch_size, cfg.train.downscale));
    }
    return result;
  }

  // ---- side variants: one net, one side set per later step ----
  const SideKind kind =
      cfg.variant == JointVariant::kSideOne ? SideKind::kOneLayer : SideKind::kBlock;
  Net net(arch);
  net.init_params(Rng::derive(cfg.train.seed, "joint_init", 0));
  if (hist_init && (cfg.prev_init || !cfg.frozen_steps.empty())) {
    // hist_init describes the plain net; sides are attached afterwards
    net.load(*hist_init);
  }
  for (int t = 1; t < steps; ++t)
    net.attach_sides(kind, Rng::derive(cfg.train.seed, "joint_side", t));
  for (int t = 0; t < steps; ++t) {
    if (!frozen[static_cast<std::size_t>(t)]) continue;
    if (t == 0) {
      net.set_frozen_prefix("stem", true);
      net.set_frozen_prefix("blocks", true);
      net.set_frozen_prefix("head", true);
    } else {
      for (int b = 0; b < net.num_blocks(); ++b)
        net.set_frozen_prefix(
            "block" + std::to_string(b) + ".side" + std::to_string(t - 1), true);
    }
  }

  Sgd opt(&net.params(), cfg.train.learning_rate, cfg.train.momentum, cfg.lambda_l2);
  std::optional<WeightVector> best;
  for (int epoch = 0; epoch < cfg.train.epochs; ++epoch) {
    std::vector<std::vector<std::vector<int>>> plans;
    std::size_t max_batches = 0;
    for (int t = 0; t < steps; ++t) {
      plans.push_back(epoch_batches(data.steps[static_cast<std::size_t>(t)].train.size(),
                                    cfg.train.batch_size,
                                    step_seed(cfg.train, t, final_step), epoch));
      max_batches = std::max(max_batches, plans.back().size());
    }
    for (std::size_t it = 0; it < max_batches; ++it) {
      net.zero_grads();
      bool any = false;
      for (int t = 0; t < steps; ++t) {
        const auto& plan = plans[static_cast<std::size_t>(t)];
        if (it >= plan.size()) continue;
        const auto& idx = plan[it];
        const auto& train_set = data.steps[static_cast<std::size_t>(t)].train;
        std::vector<int> labels(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i)
          labels[i] = train_set.labels[static_cast<std::size_t>(idx[i])];
        const Tensor4 x =
            cfg.train.augment
                ? images_to_tensor_augmented(train_set, idx, cfg.train.downscale,
                                             cfg.train.augment_cfg,
                                             step_seed(cfg.train, t, final_step), epoch)
                : images_to_tensor(train_set, idx, cfg.train.downscale);
        const Tensor4 logits = net.forward(x, true, t);
        std::vector<real> dz;
        SoftmaxCE::loss_and_grad(logits.v, logits.n, classes, labels, &dz);
        const real c_t = t == final_step ? cfg.final_loss_weight : 1.0;
        for (auto& v : dz) v *= c_t;
        Tensor4 dl(logits.n, logits.c, 1, 1);
        dl.v = std::move(dz);
        net.backward(dl);
        any = true;
      }
      if (any) opt.step();
    }
    const double val_acc = eval_accuracy(net, data.steps.back().val,
                                         cfg.train.batch_size, cfg.train.downscale,
                                         final_step);
    if (val_acc > result.final_val_accuracy) {
      result.final_val_accuracy = val_acc;
      if (cfg.train.select_best_by_val) best = net.snapshot();
    }
  }
  if (best) net.load(*best);

  result.checkpoint_names.push_back("joint");
  result.checkpoints.push_back(net.snapshot());
  for (int t = 0; t < steps; ++t)
    result.per_step_val_accuracy.push_back(
        eval_accuracy(net, data.steps[static_cast<std::size_t>(t)].val,
                      cfg.train.batch_size, cfg.train.downscale, t));
  return result;
}

double joint_eval_final(const JointResult& result, const NetworkConfig& arch,
                        const LabeledImageSet& test, const TrainConfig& cfg) {
  Net net(arch);
  if (result.variant != JointVariant::kSeparate) {
    const SideKind kind = result.variant == JointVariant::kSideOne
                              ? SideKind::kOneLayer
                              : SideKind::kBlock;
    for (int t = 1; t < result.num_steps; ++t) net.attach_sides(kind, 0);
  }
  net.load(result.checkpoints.back());
  return eval_accuracy(net, test, cfg.batch_size, cfg.downscale);
}

}  // namespace seqshift
