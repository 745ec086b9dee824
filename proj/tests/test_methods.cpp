#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "seqshift/joint.hpp"
#include "seqshift/methods.hpp"
#include "seqshift/synth.hpp"

using namespace seqshift;

namespace {

Tensor4 random_input(int n, int c, int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  Tensor4 x(n, c, h, w);
  for (auto& v : x.v) v = rng.next_real_in(0.0, 1.0) + 0.1;
  return x;
}

std::vector<int> random_labels(int n, int classes, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (auto& y : labels) y = static_cast<int>(rng.next_below(classes));
  return labels;
}

Net small_net(std::uint64_t seed = 11) {
  Net net(NetworkConfig::from_name("conv1", 10, 8, 8));
  net.init_params(seed);
  return net;
}

SequenceData tiny_sequence(int steps, int per_step, std::uint64_t seed) {
  SequenceSpec spec;
  spec.name = "tiny";
  spec.base_corpus = "synth10";
  spec.master_seed = seed;
  spec.test_count_final = 100;
  ShiftBlock tint;
  tint.kind = ShiftKind::kRedTint;
  std::vector<ShiftBlock> cumulative;
  for (int t = 0; t < steps; ++t) {
    if (t > 0) cumulative.push_back(tint);
    spec.steps.push_back({cumulative, per_step});
  }
  static BaseCorpus corpus = make_synthetic_cifar10(3000, 600, 404);
  return materialize_sequence(spec, corpus);
}

MethodConfig fast_config(std::uint64_t seed = 5) {
  MethodConfig cfg;
  cfg.train.epochs = 2;
  cfg.train.batch_size = 25;
  cfg.train.learning_rate = 0.02;
  cfg.train.augment = false;
  cfg.train.downscale = true;
  cfg.train.seed = seed;
  return cfg;
}

std::vector<real> flat_trainable_grads(Net& net) {
  std::vector<real> out;
  for (Param* p : net.params())
    if (p->trainable) out.insert(out.end(), p->grad.begin(), p->grad.end());
  return out;
}

}  // namespace

TEST_CASE("irm penalty is zero for a perfectly fit environment") {
  // logits strongly peaked on the labels -> CE gradient wrt w vanishes
  const int n = 6, classes = 4;
  std::vector<real> logits(n * classes, 0.0);
  std::vector<int> labels(n);
  for (int s = 0; s < n; ++s) {
    labels[s] = s % classes;
    logits[s * classes + labels[s]] = 60.0;
  }
  CHECK(std::fabs(irm_penalty(logits, n, classes, labels)) < 1e-12);
}

TEST_CASE("irm penalty with identical halves is a square") {
  Rng rng(3);
  const int half = 5, classes = 3;
  std::vector<real> one(half * classes);
  for (auto& v : one) v = rng.next_real_in(-1, 1);
  std::vector<real> both = one;
  both.insert(both.end(), one.begin(), one.end());
  std::vector<int> labels_half = random_labels(half, classes, 4);
  std::vector<int> labels = labels_half;
  labels.insert(labels.end(), labels_half.begin(), labels_half.end());
  const real pen = irm_penalty(both, 2 * half, classes, labels);
  CHECK(pen >= 0.0);
}

TEST_CASE("irm penalty matches finite differences of CE in the dummy w") {
  Rng rng(5);
  const int batch = 8, classes = 5;
  std::vector<real> logits(batch * classes);
  for (auto& v : logits) v = rng.next_real_in(-2, 2);
  const auto labels = random_labels(batch, classes, 6);

  auto half_ce = [&](int begin, int end, real w) {
    std::vector<real> scaled;
    std::vector<int> ls;
    for (int s = begin; s < end; ++s) {
      for (int c = 0; c < classes; ++c)
        scaled.push_back(w * logits[s * classes + c]);
      ls.push_back(labels[s]);
    }
    return SoftmaxCE::loss_only(scaled, end - begin, classes, ls);
  };
  const real h = 1e-6;
  const real g1 = (half_ce(0, 4, 1 + h) - half_ce(0, 4, 1 - h)) / (2 * h);
  const real g2 = (half_ce(4, 8, 1 + h) - half_ce(4, 8, 1 - h)) / (2 * h);
  const real pen = irm_penalty(logits, batch, classes, labels);
  CHECK(pen == doctest::Approx(g1 * g2).epsilon(1e-6));
}

TEST_CASE("irm penalty gradient wrt network parameters passes FD") {
  Net net = small_net();
  const Tensor4 x = random_input(6, 3, 8, 8, 7);
  const auto labels = random_labels(6, 10, 8);
  auto loss_fn = [&]() -> real {
    const Tensor4 logits = net.forward(x, true);
    return irm_penalty(logits.v, logits.n, 10, labels);
  };
  auto compute_grads = [&] {
    const Tensor4 logits = net.forward(x, true);
    std::vector<real> dz;
    irm_penalty(logits.v, logits.n, 10, labels, &dz);
    Tensor4 dl(logits.n, logits.c, 1, 1);
    dl.v = std::move(dz);
    net.zero_grads();
    net.backward(dl);
  };
  const auto report = finite_difference_check(net, loss_fn, compute_grads, 0.02, 9);
  CHECK(report.checked > 20);
  CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("irm with lambda 0 reduces to the multi-env ERM gradient") {
  Net net = small_net();
  std::vector<Tensor4> xs;
  std::vector<std::vector<int>> ls;
  for (int e = 0; e < 3; ++e) {
    xs.push_back(random_input(6, 3, 8, 8, 20 + e));
    ls.push_back(random_labels(6, 10, 30 + e));
  }
  irm_batch_gradient(net, xs, ls, 10, 0.0);
  const auto irm_grads = flat_trainable_grads(net);

  // independent multi-env ERM gradient
  net.zero_grads();
  for (int e = 0; e < 3; ++e) {
    const Tensor4 logits = net.forward(xs[e], true);
    std::vector<real> dz;
    SoftmaxCE::loss_and_grad(logits.v, logits.n, 10, ls[e], &dz);
    for (auto& v : dz) v /= 3.0;
    Tensor4 dl(logits.n, logits.c, 1, 1);
    dl.v = std::move(dz);
    net.backward(dl);
  }
  const auto erm_grads = flat_trainable_grads(net);
  REQUIRE(irm_grads.size() == erm_grads.size());
  double max_diff = 0;
  for (std::size_t i = 0; i < irm_grads.size(); ++i)
    max_diff = std::max(max_diff, std::fabs(irm_grads[i] - erm_grads[i]));
  CHECK(max_diff < 1e-9);
}

TEST_CASE("dro backpropagates exactly the worst environment's batch") {
  Net net = small_net();
  std::vector<Tensor4> xs;
  std::vector<std::vector<int>> ls;
  for (int e = 0; e < 3; ++e) {
    xs.push_back(random_input(6, 3, 8, 8, 40 + e));
    ls.push_back(random_labels(6, 10, 50 + e));
  }
  int selected = -1;
  const auto losses = dro_batch_gradient(net, xs, ls, 10, &selected);
  REQUIRE(selected >= 0);
  for (std::size_t e = 0; e < losses.size(); ++e)
    CHECK(losses[static_cast<std::size_t>(selected)] >= losses[e]);
  const auto dro_grads = flat_trainable_grads(net);

  const Tensor4 logits = net.forward(xs[selected], true);
  std::vector<real> dz;
  SoftmaxCE::loss_and_grad(logits.v, logits.n, 10, ls[selected], &dz);
  Tensor4 dl(logits.n, logits.c, 1, 1);
  dl.v = std::move(dz);
  net.zero_grads();
  net.backward(dl);
  const auto erm_grads = flat_trainable_grads(net);
  CHECK(dro_grads == erm_grads);  // bit-exact
}

TEST_CASE("finetune honors zero epochs and the linear-probe freeze") {
  const auto data = tiny_sequence(2, 200, 71);
  Net net = small_net(3);
  const auto init = net.snapshot();

  MethodConfig cfg = fast_config();
  cfg.train.epochs = 0;
  finetune(net, data.steps.back(), FinetunePlan::kFull, cfg);
  const auto after = net.snapshot();
  for (std::size_t i = 0; i < after.entries.size(); ++i)
    CHECK(after.entries[i].data == init.entries[i].data);

  // phase 1 only: everything but the head is bit-identical
  cfg.lp_max_epochs = 2;
  finetune(net, data.steps.back(), FinetunePlan::kLpThenFt, cfg);
  const auto lp = net.snapshot();
  bool head_moved = false;
  for (std::size_t i = 0; i < lp.entries.size(); ++i) {
    if (lp.entries[i].name.rfind("head", 0) == 0) {
      head_moved = head_moved || lp.entries[i].data != init.entries[i].data;
    } else {
      CHECK(lp.entries[i].data == init.entries[i].data);
    }
  }
  CHECK(head_moved);
}

TEST_CASE("side tuning keeps the base frozen and can only help from init") {
  const auto data = tiny_sequence(2, 200, 72);
  Net net = small_net(4);
  MethodConfig cfg = fast_config();
  cfg.train.epochs = 3;

  // train the base a little first so it is a sensible init
  train_supervised(net, data.steps[0].train, &data.steps[0].val, cfg.train);
  const auto base = net.snapshot();
  const double base_acc =
      eval_accuracy(net, data.final_test, 50, cfg.train.downscale);

  side_tune(net, data.steps.back(), SideKind::kOneLayer, cfg);
  const auto tuned = net.snapshot();
  for (const auto& e : tuned.entries) {
    if (e.name.find(".side") != std::string::npos) continue;
    const auto* b = base.find(e.name);
    REQUIRE(b != nullptr);
    CHECK(e.data == b->data);
  }
  const double tuned_acc =
      eval_accuracy(net, data.final_test, 50, cfg.train.downscale, 1);
  CHECK(tuned_acc >= base_acc - 0.02);
}

TEST_CASE("fisher diagonal is nonnegative and matches the head closed form") {
  const auto data = tiny_sequence(2, 100, 73);
  Net net = small_net(5);
  const auto fisher = fisher_diagonal(net, data.steps[0].train, 64, 9);

  for (const auto& e : fisher.entries)
    for (real v : e.data) CHECK(v >= 0.0);

  // closed form for the output layer: grad wrt fc weight = (p - y) x feat
  const auto& train = data.steps[0].train;
  std::vector<int> idx(train.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  Rng rng(Rng::derive(9, "fisher_subsample"));
  for (int i = 0; i < 64; ++i) {
    const std::size_t j = i + rng.next_below(idx.size() - i);
    std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
  }
  idx.resize(64);

  const WeightEntry* fw = fisher.find("head.fc.w");
  REQUIRE(fw != nullptr);
  std::vector<real> expected(fw->data.size(), 0.0);
  const int classes = 10;
  for (int i : idx) {
    ForwardCapture cap;
    const Tensor4 x = images_to_tensor(train, {i}, false);
    const Tensor4 logits = net.forward(x, false, -1, &cap);
    const Eigen::MatrixXd feats = cap.taps[cap.taps.size() - 2];  // last block, pooled
    real zmax = logits.v[0];
    for (int c = 1; c < classes; ++c) zmax = std::max(zmax, logits.v[c]);
    real denom = 0;
    for (int c = 0; c < classes; ++c) denom += std::exp(logits.v[c] - zmax);
    for (int c = 0; c < classes; ++c) {
      const real p = std::exp(logits.v[c] - zmax) / denom;
      const real d = p - (c == train.labels[static_cast<std::size_t>(i)] ? 1.0 : 0.0);
      for (int f = 0; f < feats.cols(); ++f) {
        const real g = d * feats(0, f);
        expected[static_cast<std::size_t>(c * feats.cols() + f)] += g * g;
      }
    }
  }
  for (auto& v : expected) v /= 64.0;
  double max_diff = 0;
  for (std::size_t k = 0; k < expected.size(); ++k)
    max_diff = std::max(max_diff, std::fabs(expected[k] - fw->data[k]));
  CHECK(max_diff < 1e-10);
}

TEST_CASE("ewc regularizer gradient passes finite differences") {
  Net net = small_net(6);
  // two anchor points with synthetic fisher weights
  WeightVector theta1 = net.snapshot();
  WeightVector theta2 = net.snapshot();
  WeightVector f1 = net.snapshot(), f2 = net.snapshot();
  Rng rng(77);
  for (auto* wv : {&theta1, &theta2}) {
    for (auto& e : wv->entries)
      for (auto& v : e.data) v += rng.next_real_in(-0.05, 0.05);
  }
  for (auto* wv : {&f1, &f2}) {
    for (auto& e : wv->entries)
      for (auto& v : e.data) v = e.trainable ? rng.next_real_in(0.0, 2.0) : 0.0;
  }
  const double lambda = 3.5;

  auto penalty = [&]() -> real {
    real acc = 0;
    std::size_t e = 0;
    for (Param* p : net.params()) {
      const std::size_t i = e++;
      if (!p->trainable) continue;
      for (std::size_t k = 0; k < p->count(); ++k) {
        const real d1 = p->value[k] - theta1.entries[i].data[k];
        const real d2 = p->value[k] - theta2.entries[i].data[k];
        acc += 0.5 * lambda * f1.entries[i].data[k] * d1 * d1;
        acc += 0.5 * lambda * f2.entries[i].data[k] * d2 * d2;
      }
    }
    return acc;
  };
  auto compute_grads = [&] {
    net.zero_grads();
    std::size_t e = 0;
    for (Param* p : net.params()) {
      const std::size_t i = e++;
      if (!p->trainable) continue;
      for (std::size_t k = 0; k < p->count(); ++k) {
        p->grad[k] += lambda * f1.entries[i].data[k] *
                      (p->value[k] - theta1.entries[i].data[k]);
        p->grad[k] += lambda * f2.entries[i].data[k] *
                      (p->value[k] - theta2.entries[i].data[k]);
      }
    }
  };
  const auto report = finite_difference_check(net, penalty, compute_grads, 0.01, 10);
  CHECK(report.checked > 20);
  CHECK(report.max_rel_error < 1e-6);
}

TEST_CASE("ewc with lambda 0 follows the sft trajectory bit for bit") {
  const auto data = tiny_sequence(3, 100, 74);
  MethodConfig cfg = fast_config(21);
  cfg.sft_schedule = LrSchedule::kExponential;
  cfg.sft_gamma = 0.8;

  Net a = small_net(8);
  const auto ra = sequential_train(a, data, cfg, 0.0);
  Net b = small_net(8);
  MethodConfig ewc_cfg = cfg;
  ewc_cfg.lambda_ewc = 0.0;
  const auto rb = sequential_train(b, data, ewc_cfg, ewc_cfg.lambda_ewc);

  REQUIRE(ra.step_checkpoints.size() == rb.step_checkpoints.size());
  for (std::size_t t = 0; t < ra.step_checkpoints.size(); ++t)
    for (std::size_t e = 0; e < ra.step_checkpoints[t].entries.size(); ++e)
      CHECK(ra.step_checkpoints[t].entries[e].data ==
            rb.step_checkpoints[t].entries[e].data);
}

TEST_CASE("large ewc lambda pins parameters where fisher is positive") {
  const auto data = tiny_sequence(2, 100, 75);
  MethodConfig cfg = fast_config(22);
  cfg.sft_schedule = LrSchedule::kExponential;
  cfg.sft_gamma = 1.0;
  cfg.lambda_ewc = 1e9;
  cfg.train.learning_rate = 0.005;
  cfg.train.weight_decay = 0.0;
  cfg.fisher_max_samples = 80;

  Net net = small_net(9);
  const auto result = sequential_train(net, data, cfg, cfg.lambda_ewc);
  const auto& theta0 = result.step_checkpoints[0];
  const auto& theta1 = result.step_checkpoints[1];
  // fisher from the run is not exposed; recompute it the same way
  Net probe = small_net(9);
  probe.load(theta0);
  const auto fisher = fisher_diagonal(probe, data.steps[0].train,
                                      cfg.fisher_max_samples, Rng::derive(22, "fisher", 0));
  double max_drift = 0;
  for (std::size_t e = 0; e < theta0.entries.size(); ++e) {
    if (!theta0.entries[e].trainable) continue;
    for (std::size_t k = 0; k < theta0.entries[e].data.size(); ++k) {
      if (fisher.entries[e].data[k] > 1e-4)
        max_drift = std::max(max_drift, std::fabs(theta1.entries[e].data[k] -
                                                  theta0.entries[e].data[k]));
    }
  }
  CHECK(max_drift < 1e-3);
}

TEST_CASE("sequential fine-tuning is scratch training then fine-tuning") {
  const auto data = tiny_sequence(2, 100, 76);
  MethodConfig cfg = fast_config(23);
  cfg.sft_schedule = LrSchedule::kExponential;
  cfg.sft_gamma = 1.0;  // constant schedule

  Net net = small_net(10);
  const auto seq = sequential_train(net, data, cfg, 0.0);

  // step 0 checkpoint == plain training on step 0 with the step-0 stream
  Net scratch = small_net(10);
  TrainConfig step0 = cfg.train;
  step0.seed = Rng::derive(cfg.train.seed, "sft_step", 0);
  train_supervised(scratch, data.steps[0].train, &data.steps[0].val, step0);
  const auto s0 = scratch.snapshot();
  for (std::size_t e = 0; e < s0.entries.size(); ++e)
    CHECK(s0.entries[e].data == seq.step_checkpoints[0].entries[e].data);

  // step 1 checkpoint == fine-tuning from step 0 with the step-1 stream
  TrainConfig step1 = cfg.train;
  step1.seed = Rng::derive(cfg.train.seed, "sft_step", 1);
  train_supervised(scratch, data.steps[1].train, &data.steps[1].val, step1);
  const auto s1 = scratch.snapshot();
  for (std::size_t e = 0; e < s1.entries.size(); ++e)
    CHECK(s1.entries[e].data == seq.step_checkpoints[1].entries[e].data);
}

TEST_CASE("zeroing the newest side set recovers the previous step's function") {
  const auto data = tiny_sequence(3, 100, 77);
  MethodConfig cfg = fast_config(24);
  Net net = small_net(12);
  const auto result = sequential_side_tune(net, data, cfg, SideKind::kOneLayer);

  // frozen base and older sides are bit-identical across step checkpoints
  const auto& w1 = result.step_checkpoints[1];
  const auto& w2 = result.step_checkpoints[2];
  for (std::size_t e = 0; e < w1.entries.size(); ++e) {
    const auto* match = w2.find(w1.entries[e].name);
    if (w1.entries[e].name.find(".side") == std::string::npos) {
      REQUIRE(match != nullptr);
      CHECK(match->data == w1.entries[e].data);
    }
  }

  // evaluating with the newest side excluded equals the previous checkpoint
  const Tensor4 x = random_input(4, 3, 16, 16, 55);
  Net full = small_net(12);
  full.attach_sides(SideKind::kOneLayer, 1);
  full.attach_sides(SideKind::kOneLayer, 2);
  full.load(w2);
  const Tensor4 without_new = full.forward(x, false, 1);

  Net prev = small_net(12);
  prev.attach_sides(SideKind::kOneLayer, 3);
  prev.load(w1);
  const Tensor4 prev_out = prev.forward(x, false, 1);
  double diff = 0;
  for (std::size_t i = 0; i < prev_out.v.size(); ++i)
    diff = std::max(diff, std::fabs(prev_out.v[i] - without_new.v[i]));
  CHECK(diff <= 1e-12);
}

TEST_CASE("frozen joint with previous init reproduces fine-tuning bit for bit") {
  const auto data = tiny_sequence(2, 100, 78);
  MethodConfig cfg = fast_config(25);
  cfg.train.epochs = 3;

  // historical model
  Net hist = small_net(13);
  train_supervised(hist, data.steps[0].train, &data.steps[0].val, cfg.train);
  const auto hist_w = hist.snapshot();

  // plain fine-tuning on the final step
  Net ft = small_net(13);
  ft.load(hist_w);
  train_supervised(ft, data.steps[1].train, &data.steps[1].val, cfg.train);
  const auto ft_w = ft.snapshot();

  // frozen joint: step 0 pinned at hist, step 1 trainable from prev init
  JointConfig jcfg;
  jcfg.variant = JointVariant::kSeparate;
  jcfg.lambda_adj = 0.0;
  jcfg.lambda_l2 = cfg.train.weight_decay;
  jcfg.final_loss_weight = 1.0;
  jcfg.frozen_steps = {0};
  jcfg.prev_init = true;
  jcfg.train = cfg.train;
  const auto joint = joint_train(data, NetworkConfig::from_name("conv1", 10, 8, 8),
                                 jcfg, &hist_w);
  const auto& jw = joint.checkpoints.back();
  REQUIRE(jw.entries.size() == ft_w.entries.size());
  for (std::size_t e = 0; e < jw.entries.size(); ++e)
    CHECK(jw.entries[e].data == ft_w.entries[e].data);
}

TEST_CASE("joint model with shared components keeps them equal") {
  const auto data = tiny_sequence(2, 100, 79);
  JointConfig jcfg;
  jcfg.variant = JointVariant::kSeparate;
  jcfg.lambda_adj = 0.1;
  jcfg.final_loss_weight = 1.0;
  jcfg.share.push_back({"stem", {0, 1}});
  jcfg.train = fast_config(26).train;
  const auto joint = joint_train(data, NetworkConfig::from_name("conv1", 10, 8, 8),
                                 jcfg, nullptr);
  const auto& w0 = joint.checkpoints[0];
  const auto& w1 = joint.checkpoints[1];
  for (std::size_t e = 0; e < w0.entries.size(); ++e) {
    if (w0.entries[e].name.rfind("stem", 0) != 0 || !w0.entries[e].trainable) continue;
    CHECK(w0.entries[e].data == w1.entries[e].data);
  }
}

TEST_CASE("side-variant joint models run and report per-step accuracy") {
  const auto data = tiny_sequence(3, 100, 80);
  JointConfig jcfg;
  jcfg.variant = JointVariant::kSideOne;
  jcfg.train = fast_config(27).train;
  const auto joint = joint_train(data, NetworkConfig::from_name("conv1", 10, 8, 8),
                                 jcfg, nullptr);
  CHECK(joint.per_step_val_accuracy.size() == 3);
  CHECK(joint.checkpoints.size() == 1);
  const double acc = joint_eval_final(joint, NetworkConfig::from_name("conv1", 10, 8, 8),
                                      data.final_test, jcfg.train);
  CHECK(acc >= 0.0);
}

TEST_CASE("i-ft reuses exactly the irm historical checkpoint") {
  const auto data = tiny_sequence(3, 100, 81);
  MethodConfig cfg = fast_config(28);
  cfg.method = MethodId::kIFt;
  cfg.lambda_irm = 1.0;
  const auto run = run_method(cfg, NetworkConfig::from_name("conv1", 10, 8, 8), data,
                              nullptr);
  const auto* hist = run.checkpoint("hist");
  REQUIRE(hist != nullptr);

  Net net(NetworkConfig::from_name("conv1", 10, 8, 8));
  net.init_params(cfg.train.seed);
  TrainConfig hist_cfg = cfg.train;
  hist_cfg.seed = Rng::derive(cfg.train.seed, "historical");
  std::vector<const LabeledImageSet*> trains{&data.steps[0].train, &data.steps[1].train};
  std::vector<const LabeledImageSet*> vals{&data.steps[0].val, &data.steps[1].val};
  train_irm(net, trains, vals, hist_cfg, cfg.lambda_irm);
  const auto direct = net.snapshot();
  for (std::size_t e = 0; e < direct.entries.size(); ++e)
    CHECK(direct.entries[e].data == hist->entries[e].data);
}

TEST_CASE("run_method covers every method id on a tiny sequence") {
  const auto data = tiny_sequence(3, 100, 82);
  SequenceSpec oracle_spec;
  StepData oracle;
  {
    // oracle draw: abundant final-distribution data
    auto spec_data = tiny_sequence(3, 100, 83);
    oracle.train = concat_sets({&spec_data.steps[2].train, &spec_data.steps[2].val});
    oracle.val = data.steps[2].val;
  }
  for (MethodId id : all_methods()) {
    MethodConfig cfg = fast_config(29);
    cfg.train.epochs = 1;
    cfg.method = id;
    cfg.sft_schedule = LrSchedule::kExponential;
    const auto run = run_method(cfg, NetworkConfig::from_name("conv1", 10, 8, 8), data,
                                &oracle);
    CHECK(run.final_test_accuracy >= 0.0);
    CHECK(run.final_test_accuracy <= 1.0);
    CHECK(!run.checkpoints.empty());
  }
}
