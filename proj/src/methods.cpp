#include "seqshift/methods.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seqshift/joint.hpp"

namespace seqshift {

const char* method_name(MethodId id) {
  switch (id) {
    case MethodId::kOracle: return "oracle";
    case MethodId::kBaseline: return "baseline";
    case MethodId::kErm: return "erm";
    case MethodId::kIrm: return "irm";
    case MethodId::kDro: return "dro";
    case MethodId::kFt: return "ft";
    case MethodId::kLpFt: return "lp-ft";
    case MethodId::kIFt: return "i-ft";
    case MethodId::kDFt: return "d-ft";
    case MethodId::kSt1: return "st-1";
    case MethodId::kStB: return "st-b";
    case MethodId::kSft: return "sft";
    case MethodId::kEwc: return "ewc";
    case MethodId::kSst1: return "sst-1";
    case MethodId::kSstB: return "sst-b";
    case MethodId::kJm: return "jm";
    case MethodId::kJst1: return "jst-1";
    case MethodId::kJstB: return "jst-b";
  }
  return "?";
}

std::vector<MethodId> all_methods() {
  return {MethodId::kOracle, MethodId::kBaseline, MethodId::kErm, MethodId::kIrm,
          MethodId::kDro, MethodId::kFt, MethodId::kLpFt, MethodId::kIFt,
          MethodId::kDFt, MethodId::kSt1, MethodId::kStB, MethodId::kSft,
          MethodId::kEwc, MethodId::kSst1, MethodId::kSstB, MethodId::kJm,
          MethodId::kJst1, MethodId::kJstB};
}

MethodId method_from_name(const std::string& name) {
  for (MethodId id : all_methods())
    if (name == method_name(id)) return id;
  throw std::invalid_argument("unknown method: " + name);
}

const WeightVector* MethodRun::checkpoint(const std::string& name) const {
  for (std::size_t i = 0; i < checkpoint_names.size(); ++i)
    if (checkpoint_names[i] == name) return &checkpoints[i];
  return nullptr;
}

LabeledImageSet concat_sets(const std::vector<const LabeledImageSet*>& sets) {
  LabeledImageSet out;
  if (sets.empty()) throw std::invalid_argument("no datasets to concatenate");
  out.num_classes = sets.front()->num_classes;
  out.split = sets.front()->split;
  out.step_index = sets.back()->step_index;
  for (const auto* s : sets) {
    out.images.insert(out.images.end(), s->images.begin(), s->images.end());
    out.labels.insert(out.labels.end(), s->labels.begin(), s->labels.end());
    out.source_ids.insert(out.source_ids.end(), s->source_ids.begin(),
                          s->source_ids.end());
  }
  return out;
}

TrainReport train_erm(Net& net, const std::vector<const LabeledImageSet*>& trains,
                      const std::vector<const LabeledImageSet*>& vals,
                      const TrainConfig& cfg) {
  const LabeledImageSet train = concat_sets(trains);
  std::optional<LabeledImageSet> val;
  if (!vals.empty()) val = concat_sets(vals);
  return train_supervised(net, train, val ? &*val : nullptr, cfg);
}

// ------------------------------------------------------------------ IRM

real irm_penalty(const std::vector<real>& logits, int batch, int classes,
                 const std::vector<int>& labels, std::vector<real>* dlogits) {
  if (batch < 2) throw std::invalid_argument("IRM penalty needs at least 2 samples");
  const int half = batch / 2;

  // g = d/dw mean CE(w * logits) at w = 1 for one half; the gradient of g
  // wrt the logits is (p - y + p * (z - p.z)) / half_size
  auto half_grad = [&](int begin, int end, std::vector<real>* dz) -> real {
    const int m = end - begin;
    real g = 0;
    for (int s = begin; s < end; ++s) {
      const real* z = logits.data() + static_cast<std::size_t>(s) * classes;
      real zmax = z[0];
      for (int c = 1; c < classes; ++c) zmax = std::max(zmax, z[c]);
      real denom = 0;
      for (int c = 0; c < classes; ++c) denom += std::exp(z[c] - zmax);
      real dot = 0;  // p . z
      for (int c = 0; c < classes; ++c)
        dot += std::exp(z[c] - zmax) / denom * z[c];
      for (int c = 0; c < classes; ++c) {
        const real p = std::exp(z[c] - zmax) / denom;
        const real y = c == labels[static_cast<std::size_t>(s)] ? real(1) : real(0);
        g += (p - y) * z[c] / m;
        if (dz)
          (*dz)[static_cast<std::size_t>(s) * classes + c] =
              ((p - y) + p * (z[c] - dot)) / m;
      }
    }
    return g;
  };

  std::vector<real> dz1, dz2;
  if (dlogits) {
    dlogits->assign(logits.size(), real(0));
    dz1.assign(logits.size(), real(0));
    dz2.assign(logits.size(), real(0));
  }
  const real g1 = half_grad(0, half, dlogits ? &dz1 : nullptr);
  const real g2 = half_grad(half, batch, dlogits ? &dz2 : nullptr);
  if (dlogits) {
    for (std::size_t i = 0; i < dlogits->size(); ++i)
      (*dlogits)[i] = g2 * dz1[i] + g1 * dz2[i];
  }
  return g1 * g2;
}

namespace {

// Cycling per-environment batch iterator with per-cycle reshuffles.
class EnvBatches {
 public:
  EnvBatches(std::size_t n, int batch_size, std::uint64_t seed)
      : n_(n), batch_size_(static_cast<std::size_t>(batch_size)), seed_(seed) {
    order_.resize(n);
    for (std::size_t i = 0; i < n; ++i) order_[i] = static_cast<int>(i);
    reshuffle();
  }

  std::vector<int> next() {
    std::vector<int> idx;
    while (idx.size() < batch_size_) {
      if (pos_ == n_) {
        ++cycle_;
        pos_ = 0;
        reshuffle();
      }
      idx.push_back(order_[pos_++]);
    }
    return idx;
  }

 private:
  void reshuffle() {
    Rng rng(Rng::derive(seed_, "env_batches", cycle_));
    rng.shuffle(order_);
  }
  std::size_t n_, batch_size_;
  std::uint64_t seed_;
  std::vector<int> order_;
  std::size_t pos_ = 0;
  std::uint64_t cycle_ = 0;
};

struct MultiEnvState {
  std::vector<EnvBatches> batches;
  LabeledImageSet pooled_val;
  int iterations_per_epoch = 0;
};

MultiEnvState make_multi_env(const std::vector<const LabeledImageSet*>& trains,
                             const std::vector<const LabeledImageSet*>& vals,
                             const TrainConfig& cfg) {
  MultiEnvState state;
  std::size_t max_n = 0;
  for (std::size_t e = 0; e < trains.size(); ++e) {
    state.batches.emplace_back(trains[e]->size(), cfg.batch_size,
                               Rng::derive(cfg.seed, "env", e));
    max_n = std::max(max_n, trains[e]->size());
  }
  state.iterations_per_epoch =
      static_cast<int>((max_n + cfg.batch_size - 1) / cfg.batch_size);
  if (!vals.empty()) state.pooled_val = concat_sets(vals);
  return state;
}

Tensor4 env_batch_tensor(const LabeledImageSet& set, const std::vector<int>& idx,
                         const TrainConfig& cfg, std::size_t env, int epoch,
                         std::vector<int>* labels) {
  labels->resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    (*labels)[i] = set.labels[static_cast<std::size_t>(idx[i])];
  const std::uint64_t env_seed = Rng::derive(cfg.seed, "env_augment", env);
  return cfg.augment ? images_to_tensor_augmented(set, idx, cfg.downscale,
                                                  cfg.augment_cfg, env_seed, epoch)
                     : images_to_tensor(set, idx, cfg.downscale);
}

}  // namespace

real irm_batch_gradient(Net& net, const std::vector<Tensor4>& env_inputs,
                        const std::vector<std::vector<int>>& env_labels, int classes,
                        double lambda) {
  const int E = static_cast<int>(env_inputs.size());
  net.zero_grads();
  real total = 0;
  for (int e = 0; e < E; ++e) {
    const Tensor4& x = env_inputs[static_cast<std::size_t>(e)];
    const auto& labels = env_labels[static_cast<std::size_t>(e)];
    const Tensor4 logits = net.forward(x, true);
    std::vector<real> dz_data;
    const real ce =
        SoftmaxCE::loss_and_grad(logits.v, logits.n, classes, labels, &dz_data);
    std::vector<real> dz_pen;
    real pen = 0;
    if (lambda != 0.0) pen = irm_penalty(logits.v, logits.n, classes, labels, &dz_pen);
    Tensor4 dl(logits.n, logits.c, 1, 1);
    if (lambda != 0.0) {
      for (std::size_t i = 0; i < dz_data.size(); ++i)
        dl.v[i] = dz_data[i] / E + lambda * dz_pen[i] / E;
    } else {
      for (std::size_t i = 0; i < dz_data.size(); ++i) dl.v[i] = dz_data[i] / E;
    }
    net.backward(dl);
    total += ce / E + lambda * pen / E;
  }
  return total;
}

TrainReport train_irm(Net& net, const std::vector<const LabeledImageSet*>& trains,
                      const std::vector<const LabeledImageSet*>& vals,
                      const TrainConfig& cfg, double lambda_irm) {
  if (trains.size() < 2)
    throw std::invalid_argument("IRM needs at least two environments");
  MultiEnvState env = make_multi_env(trains, vals, cfg);
  const int E = static_cast<int>(trains.size());
  const int classes = trains.front()->num_classes;
  Sgd opt(&net.params(), cfg.learning_rate, cfg.momentum, cfg.weight_decay);

  TrainReport report;
  std::optional<WeightVector> best;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0;
    for (int it = 0; it < env.iterations_per_epoch; ++it) {
      std::vector<Tensor4> xs;
      std::vector<std::vector<int>> ls;
      for (int e = 0; e < E; ++e) {
        const auto idx = env.batches[static_cast<std::size_t>(e)].next();
        std::vector<int> labels;
        xs.push_back(env_batch_tensor(*trains[static_cast<std::size_t>(e)], idx, cfg,
                                      static_cast<std::size_t>(e), epoch, &labels));
        ls.push_back(std::move(labels));
      }
      loss_sum += irm_batch_gradient(net, xs, ls, classes, lambda_irm);
      opt.step();
    }
    EpochStats stats;
    stats.train_loss = loss_sum / env.iterations_per_epoch;
    if (env.pooled_val.size() > 0) {
      stats.val_accuracy =
          eval_accuracy(net, env.pooled_val, cfg.batch_size, cfg.downscale);
      if (stats.val_accuracy > report.best_val_accuracy || report.best_epoch < 0) {
        report.best_val_accuracy = stats.val_accuracy;
        report.best_epoch = epoch;
        if (cfg.select_best_by_val) best = net.snapshot();
      }
    }
    report.epochs.push_back(stats);
  }
  if (best) net.load(*best);
  return report;
}

std::vector<real> dro_batch_gradient(Net& net, const std::vector<Tensor4>& env_inputs,
                                     const std::vector<std::vector<int>>& env_labels,
                                     int classes, int* selected) {
  std::vector<std::pair<Param*, std::vector<real>>> stats_params;
  for (Param* p : net.params())
    if (!p->trainable) stats_params.emplace_back(p, p->value);
  auto restore = [&] {
    for (auto& [p, saved] : stats_params) p->value = saved;
  };

  std::vector<real> losses;
  int worst = 0;
  for (std::size_t e = 0; e < env_inputs.size(); ++e) {
    const Tensor4 logits = net.forward(env_inputs[e], true);
    losses.push_back(SoftmaxCE::loss_only(logits.v, logits.n, classes, env_labels[e]));
    restore();
    if (losses[e] > losses[static_cast<std::size_t>(worst)]) worst = static_cast<int>(e);
  }
  const Tensor4 logits = net.forward(env_inputs[static_cast<std::size_t>(worst)], true);
  std::vector<real> dz;
  SoftmaxCE::loss_and_grad(logits.v, logits.n, classes,
                           env_labels[static_cast<std::size_t>(worst)], &dz);
  Tensor4 dl(logits.n, logits.c, 1, 1);
  dl.v = std::move(dz);
  net.zero_grads();
  net.backward(dl);
  if (selected) *selected = worst;
  return losses;
}

TrainReport train_dro(Net& net, const std::vector<const LabeledImageSet*>& trains,
                      const std::vector<const LabeledImageSet*>& vals,
                      const TrainConfig& cfg) {
  MultiEnvState env = make_multi_env(trains, vals, cfg);
  const int E = static_cast<int>(trains.size());
  const int classes = trains.front()->num_classes;
  Sgd opt(&net.params(), cfg.learning_rate, cfg.momentum, cfg.weight_decay);

  TrainReport report;
  std::optional<WeightVector> best;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0;
    for (int it = 0; it < env.iterations_per_epoch; ++it) {
      std::vector<Tensor4> xs;
      std::vector<std::vector<int>> ls;
      for (int e = 0; e < E; ++e) {
        const auto idx = env.batches[static_cast<std::size_t>(e)].next();
        std::vector<int> labels;
        xs.push_back(env_batch_tensor(*trains[static_cast<std::size_t>(e)], idx, cfg,
                                      static_cast<std::size_t>(e), epoch, &labels));
        ls.push_back(std::move(labels));
      }
      int worst = 0;
      const auto losses = dro_batch_gradient(net, xs, ls, classes, &worst);
      opt.step();
      loss_sum += losses[static_cast<std::size_t>(worst)];
    }
    EpochStats stats;
    stats.train_loss = loss_sum / env.iterations_per_epoch;
    if (env.pooled_val.size() > 0) {
      stats.val_accuracy =
          eval_accuracy(net, env.pooled_val, cfg.batch_size, cfg.downscale);
      if (stats.val_accuracy > report.best_val_accuracy || report.best_epoch < 0) {
        report.best_val_accuracy = stats.val_accuracy;
        report.best_epoch = epoch;
        if (cfg.select_best_by_val) best = net.snapshot();
      }
    }
    report.epochs.push_back(stats);
  }
  if (best) net.load(*best);
  return report;
}

// ------------------------------------------------------------- finetuning

TrainReport finetune(Net& net, const StepData& final_step, FinetunePlan plan,
                     const MethodConfig& cfg) {
  if (plan == FinetunePlan::kLpThenFt) {
    // phase 1: linear probe (everything but the output layer frozen) until
    // validation stops improving
    net.set_frozen_all(true);
    net.set_frozen_prefix("head", false);
    TrainConfig probe = cfg.train;
    probe.epochs = cfg.lp_max_epochs;
    probe.early_stop_patience = cfg.lp_patience;
    probe.seed = Rng::derive(cfg.train.seed, "lp_phase");
    train_supervised(net, final_step.train, &final_step.val, probe);
    net.set_frozen_all(false);
  }
  return train_supervised(net, final_step.train, &final_step.val, cfg.train);
}

TrainReport side_tune(Net& net, const StepData& final_step, SideKind kind,
                      const MethodConfig& cfg) {
  const int side = net.attach_sides(kind, Rng::derive(cfg.train.seed, "side_attach"));
  net.set_frozen_all(true);
  for (int b = 0; b < net.num_blocks(); ++b)
    net.set_frozen_prefix("block" + std::to_string(b) + ".side" + std::to_string(side),
                          false);
  return train_supervised(net, final_step.train, &final_step.val, cfg.train);
}

// ----------------------------------------------------------------- fisher

WeightVector fisher_diagonal(Net& net, const LabeledImageSet& data, int max_samples,
                             std::uint64_t seed) {
  const int classes = data.num_classes;
  std::vector<int> idx(data.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  if (max_samples > 0 && data.size() > static_cast<std::size_t>(max_samples)) {
    Rng rng(Rng::derive(seed, "fisher_subsample"));
    for (int i = 0; i < max_samples; ++i) {
      const std::size_t j = i + rng.next_below(idx.size() - i);
      std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
    }
    idx.resize(static_cast<std::size_t>(max_samples));
  }

  WeightVector fisher = net.snapshot();
  for (auto& e : fisher.entries) std::fill(e.data.begin(), e.data.end(), real(0));

  for (int i : idx) {
    const Tensor4 x = images_to_tensor(data, {i}, false);
    const Tensor4 logits = net.forward(x, /*train=*/false);
    // d(-log p(y|x))/dlogits = p - e_y
    Tensor4 dl(1, logits.c, 1, 1);
    real zmax = logits.v[0];
    for (int c = 1; c < logits.c; ++c) zmax = std::max(zmax, logits.v[c]);
    real denom = 0;
    for (int c = 0; c < logits.c; ++c) denom += std::exp(logits.v[c] - zmax);
    for (int c = 0; c < logits.c; ++c)
      dl.v[c] = std::exp(logits.v[c] - zmax) / denom -
                (c == data.labels[static_cast<std::size_t>(i)] ? real(1) : real(0));
    net.zero_grads();
    net.backward(dl);
    std::size_t entry = 0;
    for (Param* p : net.params()) {
      auto& acc = fisher.entries[entry++].data;
      if (p->trainable)
        for (std::size_t k = 0; k < p->count(); ++k) acc[k] += p->grad[k] * p->grad[k];
    }
  }
  const real scale = idx.empty() ? real(0) : real(1) / static_cast<real>(idx.size());
  for (auto& e : fisher.entries)
    for (auto& v : e.data) v *= scale;
  (void)classes;
  return fisher;
}

// ------------------------------------------------- sequential fine-tuning

namespace {

double schedule_lr(const MethodConfig& cfg, int step) {
  const double lr0 = cfg.sft_lr0 > 0 ? cfg.sft_lr0 : cfg.train.learning_rate;
  switch (cfg.sft_schedule) {
    case LrSchedule::kNone: return lr0;  // grid handled by the caller
    case LrSchedule::kLinear: {
      const double lr = lr0 - step * cfg.sft_delta;
      if (lr <= 0) throw std::invalid_argument("linear LR schedule reaches zero");
      return lr;
    }
    case LrSchedule::kExponential: return lr0 * std::pow(cfg.sft_gamma, step);
  }
  return lr0;
}

}  // namespace

SequentialResult sequential_train(Net& net, const SequenceData& data,
                                  const MethodConfig& cfg, double lambda_ewc) {
  if (data.steps.size() < 2)
    throw std::invalid_argument("sequential training needs at least 2 steps");
  SequentialResult result;
  std::vector<WeightVector> snapshots;   // theta_j
  std::vector<WeightVector> fishers;     // F_j

  for (std::size_t t = 0; t < data.steps.size(); ++t) {
    const StepData& step = data.steps[t];
    TrainConfig step_cfg = cfg.train;
    step_cfg.seed = Rng::derive(cfg.train.seed, "sft_step", t);

    std::function<void(Net&)> hook;
    const std::function<void(Net&)>* hook_ptr = nullptr;
    if (lambda_ewc > 0 && !snapshots.empty()) {
      hook = [&](Net& n) {
        std::size_t entry = 0;
        for (Param* p : n.params()) {
          const std::size_t e = entry++;
          if (!p->trainable || p->frozen) continue;
          for (std::size_t j = 0; j < snapshots.size(); ++j) {
            const auto& theta = snapshots[j].entries[e].data;
            const auto& f = fishers[j].entries[e].data;
            for (std::size_t k = 0; k < p->count(); ++k)
              p->grad[k] += lambda_ewc * f[k] * (p->value[k] - theta[k]);
          }
        }
      };
      hook_ptr = &hook;
    }

    auto train_with_lr = [&](double lr) {
      step_cfg.learning_rate = lr;
      return train_supervised(net, step.train, &step.val, step_cfg, -1, hook_ptr);
    };

    TrainReport report;
    double chosen = schedule_lr(cfg, static_cast<int>(t));
    if (cfg.sft_schedule == LrSchedule::kNone && cfg.sft_lr_grid.size() > 1) {
      // independent LR choice per step: best step-validation accuracy wins
      const WeightVector init = net.snapshot();
      double best_acc = -1;
      std::optional<WeightVector> best_weights;
      for (double lr : cfg.sft_lr_grid) {
        net.load(init);
        const TrainReport r = train_with_lr(lr);
        if (r.best_val_accuracy > best_acc) {
          best_acc = r.best_val_accuracy;
          best_weights = net.snapshot();
          chosen = lr;
          report = r;
        }
      }
      net.load(*best_weights);
    } else {
      report = train_with_lr(chosen);
    }

    result.step_checkpoints.push_back(net.snapshot());
    result.step_val_accuracy.push_back(report.best_val_accuracy);
    result.step_lr.push_back(chosen);

    if (lambda_ewc > 0 && t + 1 < data.steps.size()) {
      snapshots.push_back(net.snapshot());
      fishers.push_back(fisher_diagonal(net, step.train, cfg.fisher_max_samples,
                                        Rng::derive(cfg.train.seed, "fisher", t)));
    }
  }
  return result;
}

SequentialResult sequential_side_tune(Net& net, const SequenceData& data,
                                      const MethodConfig& cfg, SideKind kind) {
  if (data.steps.size() < 2)
    throw std::invalid_argument("sequential side-tuning needs at least 2 steps");
  SequentialResult result;
  for (std::size_t t = 0; t < data.steps.size(); ++t) {
    const StepData& step = data.steps[t];
    TrainConfig step_cfg = cfg.train;
    step_cfg.seed = Rng::derive(cfg.train.seed, "sst_step", t);
    TrainReport report;
    if (t == 0) {
      report = train_supervised(net, step.train, &step.val, step_cfg, 0);
    } else {
      const int side =
          net.attach_sides(kind, Rng::derive(cfg.train.seed, "side_attach", t));
      net.set_frozen_all(true);
      for (int b = 0; b < net.num_blocks(); ++b)
        net.set_frozen_prefix(
            "block" + std::to_string(b) + ".side" + std::to_string(side), false);
      report = train_supervised(net, step.train, &step.val, step_cfg,
                                static_cast<int>(t), nullptr);
    }
    result.step_checkpoints.push_back(net.snapshot());
    result.step_val_accuracy.push_back(report.best_val_accuracy);
    result.step_lr.push_back(step_cfg.learning_rate);
  }
  return result;
}

// ---------------------------------------------------------------- driver

namespace {

std::vector<const LabeledImageSet*> train_ptrs(const SequenceData& data, bool full) {
  std::vector<const LabeledImageSet*> out;
  const std::size_t end = full ? data.steps.size() : data.steps.size() - 1;
  for (std::size_t t = 0; t < end; ++t) out.push_back(&data.steps[t].train);
  return out;
}

std::vector<const LabeledImageSet*> val_ptrs(const SequenceData& data, bool full) {
  std::vector<const LabeledImageSet*> out;
  const std::size_t end = full ? data.steps.size() : data.steps.size() - 1;
  for (std::size_t t = 0; t < end; ++t) out.push_back(&data.steps[t].val);
  return out;
}

}  // namespace

MethodRun run_method(const MethodConfig& cfg, const NetworkConfig& arch,
                     const SequenceData& data, const StepData* oracle_data) {
  MethodRun run;
  run.method = cfg.method;
  run.side_kind = cfg.side_kind;
  const StepData& final_step = data.steps.back();

  Net net(arch);
  net.init_params(cfg.train.seed);

  auto record = [&](const std::string& name) {
    run.checkpoint_names.push_back(name);
    run.checkpoints.push_back(net.snapshot());
  };

  switch (cfg.method) {
    case MethodId::kOracle: {
      if (!oracle_data)
        throw std::invalid_argument("oracle method needs the oracle dataset");
      const TrainReport r =
          train_supervised(net, oracle_data->train, &oracle_data->val, cfg.train);
      run.final_val_accuracy = r.best_val_accuracy;
      record("final");
      break;
    }
    case MethodId::kBaseline: {
      const TrainReport r =
          train_supervised(net, final_step.train, &final_step.val, cfg.train);
      run.final_val_accuracy = r.best_val_accuracy;
      record("final");
      break;
    }
    case MethodId::kErm: {
      const TrainReport r =
          train_erm(net, train_ptrs(data, true), val_ptrs(data, true), cfg.train);
      run.final_val_accuracy =
          eval_accuracy(net, final_step.val, cfg.train.batch_size, cfg.train.downscale);
      (void)r;
      record("final");
      break;
    }
    case MethodId::kIrm: {
      train_irm(net, train_ptrs(data, true), val_ptrs(data, true), cfg.train,
                cfg.lambda_irm);
      run.final_val_accuracy =
          eval_accuracy(net, final_step.val, cfg.train.batch_size, cfg.train.downscale);
      record("final");
      break;
    }
    case MethodId::kDro: {
      train_dro(net, train_ptrs(data, true), val_ptrs(data, true), cfg.train);
      run.final_val_accuracy =
          eval_accuracy(net, final_step.val, cfg.train.batch_size, cfg.train.downscale);
      record("final");
      break;
    }
    case MethodId::kFt:
    case MethodId::kLpFt:
    case MethodId::kIFt:
    case MethodId::kDFt:
    case MethodId::kSt1:
    case MethodId::kStB: {
      // historical initialization
      TrainConfig hist_cfg = cfg.train;
      hist_cfg.seed = Rng::derive(cfg.train.seed, "historical");
      if (cfg.method == MethodId::kIFt) {
        train_irm(net, train_ptrs(data, false), val_ptrs(data, false), hist_cfg,
                  cfg.lambda_irm);
      } else if (cfg.method == MethodId::kDFt) {
        train_dro(net, train_ptrs(data, false), val_ptrs(data, false), hist_cfg);
      } else {
        train_erm(net, train_ptrs(data, false), val_ptrs(data, false), hist_cfg);
      }
      record("hist");

      TrainReport r;
      if (cfg.method == MethodId::kSt1) {
        r = side_tune(net, final_step, SideKind::kOneLayer, cfg);
        run.sides_attached = 1;
        run.side_kind = SideKind::kOneLayer;
      } else if (cfg.method == MethodId::kStB) {
        r = side_tune(net, final_step, SideKind::kBlock, cfg);
        run.sides_attached = 1;
        run.side_kind = SideKind::kBlock;
      } else {
        r = finetune(net, final_step,
                     cfg.method == MethodId::kLpFt ? FinetunePlan::kLpThenFt
                                                   : FinetunePlan::kFull,
                     cfg);
      }
      run.final_val_accuracy = r.best_val_accuracy;
      record("final");
      break;
    }
    case MethodId::kSft:
    case MethodId::kEwc: {
      const double lambda = cfg.method == MethodId::kEwc ? cfg.lambda_ewc : 0.0;
      const SequentialResult r = sequential_train(net, data, cfg, lambda);
      for (std::size_t t = 0; t < r.step_checkpoints.size(); ++t) {
        run.checkpoint_names.push_back("step" + std::to_string(t));
        run.checkpoints.push_back(r.step_checkpoints[t]);
      }
      run.per_step_val_accuracy = r.step_val_accuracy;
      run.chosen_lr = r.step_lr;
      run.final_val_accuracy = r.step_val_accuracy.back();
      break;
    }
    case MethodId::kSst1:
    case MethodId::kSstB: {
      const SideKind kind =
          cfg.method == MethodId::kSst1 ? SideKind::kOneLayer : SideKind::kBlock;
      const SequentialResult r = sequential_side_tune(net, data, cfg, kind);
      for (std::size_t t = 0; t < r.step_checkpoints.size(); ++t) {
        run.checkpoint_names.push_back("step" + std::to_string(t));
        run.checkpoints.push_back(r.step_checkpoints[t]);
      }
      run.per_step_val_accuracy = r.step_val_accuracy;
      run.sides_attached = static_cast<int>(data.steps.size()) - 1;
      run.side_kind = kind;
      run.final_val_accuracy = r.step_val_accuracy.back();
      break;
    }
    case MethodId::kJm:
    case MethodId::kJst1:
    case MethodId::kJstB: {
      JointConfig jcfg;
      jcfg.variant = cfg.method == MethodId::kJm
                         ? JointVariant::kSeparate
                         : (cfg.method == MethodId::kJst1 ? JointVariant::kSideOne
                                                          : JointVariant::kSideBlock);
      jcfg.lambda_adj = cfg.lambda_adj;
      jcfg.lambda_l2 = cfg.lambda_l2;
      jcfg.final_loss_weight = cfg.final_loss_weight;
      jcfg.frozen_steps = cfg.joint_frozen_steps;
      jcfg.prev_init = cfg.joint_prev_init;
      jcfg.train = cfg.train;
      JointResult jr = joint_train(data, arch, jcfg, nullptr);
      run.final_val_accuracy = jr.final_val_accuracy;
      run.per_step_val_accuracy = jr.per_step_val_accuracy;
      run.final_test_accuracy =
          joint_eval_final(jr, arch, data.final_test, cfg.train);
      run.checkpoint_names = std::move(jr.checkpoint_names);
      run.checkpoints = std::move(jr.checkpoints);
      run.final_weights = run.checkpoints.back();
      if (jcfg.variant != JointVariant::kSeparate) {
        run.sides_attached = static_cast<int>(data.steps.size()) - 1;
        run.side_kind = jcfg.variant == JointVariant::kSideOne ? SideKind::kOneLayer
                                                               : SideKind::kBlock;
      }
      return run;
    }
  }

  run.final_weights = net.snapshot();
  const int active =
      run.sides_attached > 0 ? run.sides_attached : -1;
  run.final_test_accuracy = eval_accuracy(net, data.final_test, cfg.train.batch_size,
                                          cfg.train.downscale, active);
  return run;
}

}  // namespace seqshift
