#include "seqshift/sequence.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "seqshift/cifar.hpp"
#include "seqshift/rng.hpp"
#include "seqshift/sampling.hpp"
#include "seqshift/textcfg.hpp"

namespace seqshift {

namespace {

using nlohmann::json;

int subpop_stage(const std::vector<ShiftBlock>& blocks) {
  int count = 0;
  for (const auto& b : blocks)
    if (b.kind == ShiftKind::kSubPopulation) ++count;
  return count - 1;  // -1 when no sub-population block
}

bool is_rotation_kind(const ShiftBlock& b) {
  return b.kind == ShiftKind::kRotation || b.kind == ShiftKind::kConditionalRotation;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void SequenceSpec::validate() const {
  if (steps.empty()) throw std::invalid_argument("sequence has no steps");
  if (test_count_final <= 0)
    throw std::invalid_argument("final step needs test_count_final > 0");
  if (val_fraction < 0.0 || val_fraction >= 1.0)
    throw std::invalid_argument("val_fraction must be in [0, 1)");
  for (std::size_t t = 1; t < steps.size(); ++t) {
    const auto& prev = steps[t - 1].shifts;
    const auto& cur = steps[t].shifts;
    if (cur.size() < prev.size() ||
        !std::equal(prev.begin(), prev.end(), cur.begin()))
      throw std::invalid_argument("inconsistent cumulative shift lists at step " +
                                  std::to_string(t));
  }
  for (const auto& step : steps) {
    if (step.train_count <= 0)
      throw std::invalid_argument("step train_count must be positive");
    if (subpop_stage(step.shifts) > 3)
      throw std::invalid_argument("at most 4 sub-population stages supported");
    for (const auto& b : step.shifts) {
      if (is_rotation_kind(b) && (b.degrees <= 0.0 || b.degrees >= 360.0))
        throw std::invalid_argument("rotation degrees must be in (0, 360)");
      if (b.kind == ShiftKind::kCorruption && b.noise_lo > b.noise_hi)
        throw std::invalid_argument("corruption noise range is empty");
    }
  }
}

void apply_shift_pipeline(LabeledImageSet& set, const std::vector<ShiftBlock>& blocks,
                          std::uint64_t pipeline_seed, Resample resample) {
  const int L = set.num_classes;
  int flip_count = 0;
  std::size_t i = 0;
  while (i < blocks.size()) {
    const ShiftBlock& b = blocks[i];
    if (is_rotation_kind(b)) {
      // fuse the run of consecutive rotations into one net angle per class
      std::vector<double> net_deg(L, 0.0);
      std::size_t j = i;
      for (; j < blocks.size() && is_rotation_kind(blocks[j]); ++j) {
        const ShiftBlock& rb = blocks[j];
        for (int c = 0; c < L; ++c) {
          RotationDirection dir;
          if (rb.kind == ShiftKind::kRotation) {
            dir = rb.direction;
          } else if (rb.direction_map.empty()) {
            dir = default_direction_for_class(c);
          } else {
            dir = rb.direction_map.at(static_cast<std::size_t>(c));
          }
          net_deg[c] += dir == RotationDirection::kCCW ? rb.degrees : -rb.degrees;
        }
      }
      for (std::size_t s = 0; s < set.size(); ++s) {
        const double deg = net_deg[set.labels[s]];
        if (deg != 0.0) set.images[s] = rotate_image(set.images[s], deg, resample);
      }
      i = j;
      continue;
    }
    switch (b.kind) {
      case ShiftKind::kCorruption:
        for (std::size_t s = 0; s < set.size(); ++s) {
          Rng rng(Rng::derive(pipeline_seed, "corrupt", i, s));
          set.images[s] = apply_corruption(set.images[s], b.noise_lo, b.noise_hi, rng);
        }
        break;
      case ShiftKind::kRedTint:
        for (auto& img : set.images) img = apply_red_tint(img, b.tint_amount);
        break;
      case ShiftKind::kLabelFlip:
        ++flip_count;
        set.labels = apply_label_flip(set.labels, flip_count, L);
        break;
      case ShiftKind::kSubPopulation:
        break;  // draw-time filter, nothing to do on pixels
      default:
        break;
    }
    ++i;
  }
}

SequenceData materialize_sequence(const SequenceSpec& spec, const BaseCorpus& corpus) {
  spec.validate();
  if (corpus.name != spec.base_corpus)
    throw std::invalid_argument("spec expects corpus '" + spec.base_corpus +
                                "' but got '" + corpus.name + "'");

  bool needs_subpop = false;
  for (const auto& step : spec.steps)
    if (subpop_stage(step.shifts) >= 0) needs_subpop = true;
  SubPopSchedule sched;
  if (needs_subpop)
    sched = spec.subpop_schedule ? *spec.subpop_schedule
                                 : SubPopSchedule::default_for(corpus);

  SequenceData data;
  data.spec = spec;
  for (std::size_t t = 0; t < spec.steps.size(); ++t) {
    const auto& step = spec.steps[t];
    const std::uint64_t draw_seed = Rng::derive(spec.master_seed, "step", t);
    const int stage = subpop_stage(step.shifts);
    LabeledImageSet set =
        stage >= 0
            ? draw_step_samples_filtered(corpus, step.train_count, spec.balanced,
                                         draw_seed, sched.active_fine(stage))
            : draw_step_samples(corpus, step.train_count, spec.balanced, draw_seed);
    set.step_index = static_cast<int>(t);
    apply_shift_pipeline(set, step.shifts, Rng::derive(spec.master_seed, "pipeline", t),
                         spec.rotation_resample);
    auto [train, val] =
        split_train_val(set, spec.val_fraction, Rng::derive(spec.master_seed, "valsplit", t));
    data.steps.push_back({std::move(train), std::move(val)});
  }

  const auto& final_step = spec.steps.back();
  const int final_stage = subpop_stage(final_step.shifts);
  LabeledImageSet test =
      final_stage >= 0
          ? draw_test_samples_filtered(corpus, spec.test_count_final, spec.balanced,
                                       Rng::derive(spec.master_seed, "test"),
                                       sched.active_fine(final_stage))
          : draw_test_samples(corpus, spec.test_count_final, spec.balanced,
                              Rng::derive(spec.master_seed, "test"));
  test.step_index = static_cast<int>(spec.steps.size()) - 1;
  apply_shift_pipeline(test, final_step.shifts,
                       Rng::derive(spec.master_seed, "pipeline_test"),
                       spec.rotation_resample);
  data.final_test = std::move(test);
  return data;
}

StepData materialize_oracle(const SequenceSpec& spec, const BaseCorpus& corpus) {
  spec.validate();
  int total = 0;
  for (const auto& step : spec.steps) total += step.train_count;

  bool needs_subpop = false;
  for (const auto& step : spec.steps)
    if (subpop_stage(step.shifts) >= 0) needs_subpop = true;
  SubPopSchedule sched;
  if (needs_subpop)
    sched = spec.subpop_schedule ? *spec.subpop_schedule
                                 : SubPopSchedule::default_for(corpus);

  const auto& final_step = spec.steps.back();
  const int stage = subpop_stage(final_step.shifts);
  const std::uint64_t seed = Rng::derive(spec.master_seed, "oracle");
  LabeledImageSet set =
      stage >= 0 ? draw_step_samples_filtered(corpus, total, spec.balanced, seed,
                                              sched.active_fine(stage))
                 : draw_step_samples(corpus, total, spec.balanced, seed);
  set.step_index = static_cast<int>(spec.steps.size()) - 1;
  apply_shift_pipeline(set, final_step.shifts,
                       Rng::derive(spec.master_seed, "pipeline_oracle"),
                       spec.rotation_resample);
  auto [train, val] = split_train_val(set, spec.val_fraction,
                                      Rng::derive(spec.master_seed, "valsplit_oracle"));
  return {std::move(train), std::move(val)};
}

namespace {

ShiftBlock rotation_block(double deg, RotationDirection dir) {
  ShiftBlock b;
  b.kind = ShiftKind::kRotation;
  b.degrees = deg;
  b.direction = dir;
  return b;
}

ShiftBlock simple_block(ShiftKind kind) {
  ShiftBlock b;
  b.kind = kind;
  return b;
}

SequenceSpec chain_preset(const std::string& name, const std::string& corpus,
                          const std::vector<ShiftBlock>& additions,
                          const std::vector<int>& sizes, int test_count,
                          std::uint64_t master_seed, int scale) {
  SequenceSpec spec;
  spec.name = name;
  spec.base_corpus = corpus;
  spec.master_seed = master_seed;
  std::vector<ShiftBlock> cumulative;
  for (std::size_t t = 0; t < sizes.size(); ++t) {
    if (t > 0 && t - 1 < additions.size()) cumulative.push_back(additions[t - 1]);
    StepSpec step;
    step.shifts = cumulative;
    if (sizes[t] % scale != 0)
      throw std::invalid_argument("sample_scale does not divide step size");
    step.train_count = sizes[t] / scale;
    spec.steps.push_back(std::move(step));
  }
  if (test_count % scale != 0)
    throw std::invalid_argument("sample_scale does not divide test size");
  spec.test_count_final = test_count / scale;
  return spec;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"CLR", "RCL", "rrr", "TTT", "sss", "rot2", "rot3", "rot4", "rot5",
          "rot6", "rot7", "rot8"};
}

SequenceSpec make_preset(const std::string& name, std::uint64_t master_seed,
                         int sample_scale) {
  const std::vector<int> fixed_sizes = {6000, 4000, 6000, 4000};
  if (name == "CLR") {
    return chain_preset(name, "cifar10",
                        {simple_block(ShiftKind::kCorruption),
                         simple_block(ShiftKind::kLabelFlip),
                         rotation_block(30.0, RotationDirection::kCCW)},
                        fixed_sizes, 5000, master_seed, sample_scale);
  }
  if (name == "RCL") {
    return chain_preset(name, "cifar10",
                        {rotation_block(30.0, RotationDirection::kCCW),
                         simple_block(ShiftKind::kCorruption),
                         simple_block(ShiftKind::kLabelFlip)},
                        fixed_sizes, 5000, master_seed, sample_scale);
  }
  if (name == "rrr") {
    ShiftBlock r = simple_block(ShiftKind::kConditionalRotation);
    r.degrees = 30.0;
    return chain_preset(name, "cifar10", {r, r, r}, fixed_sizes, 5000, master_seed,
                        sample_scale);
  }
  if (name == "TTT") {
    ShiftBlock t = simple_block(ShiftKind::kRedTint);
    return chain_preset(name, "cifar10", {t, t, t}, fixed_sizes, 5000, master_seed,
                        sample_scale);
  }
  if (name == "sss") {
    ShiftBlock s = simple_block(ShiftKind::kSubPopulation);
    SequenceSpec spec = chain_preset(name, "cifar100", {s, s, s}, fixed_sizes, 5000,
                                     master_seed, sample_scale);
    // step 0 already draws from the stage-0 active sub-classes
    for (auto& step : spec.steps)
      step.shifts.insert(step.shifts.begin(), s);
    return spec;
  }
  if (name.rfind("rot", 0) == 0 && name.size() == 4) {
    const int n_steps = name[3] - '0';
    static const std::vector<std::vector<int>> kRotationSizes = {
        {16000, 4000},
        {10000, 6000, 4000},
        {6000, 4000, 6000, 4000},
        {4000, 4000, 4000, 4000, 4000},
        {4000, 3000, 3000, 3000, 3000, 4000},
        {4000, 2000, 3000, 2000, 3000, 2000, 4000},
        {4000, 2000, 2000, 2000, 2000, 2000, 2000, 4000}};
    if (n_steps >= 2 && n_steps <= 8) {
      std::vector<ShiftBlock> additions(
          static_cast<std::size_t>(n_steps - 1),
          rotation_block(30.0, RotationDirection::kCCW));
      return chain_preset(name, "cifar10", additions, kRotationSizes[n_steps - 2],
                          5000, master_seed, sample_scale);
    }
  }
  throw std::invalid_argument("unknown preset: " + name);
}

std::string serialize_spec(const SequenceSpec& spec) {
  // Global block table = cumulative list of the final step (earlier steps
  // are prefixes; validate() enforces that).
  const auto& all_blocks = spec.steps.back().shifts;
  std::ostringstream out;
  out << "[sequence]\n";
  out << "name = " << spec.name << "\n";
  out << "base_corpus = " << spec.base_corpus << "\n";
  out << "test_count = " << spec.test_count_final << "\n";
  out << "master_seed = " << spec.master_seed << "\n";
  out << "val_fraction = " << format_double(spec.val_fraction) << "\n";
  out << "balanced = " << (spec.balanced ? 1 : 0) << "\n";
  out << "rotation_resample = "
      << (spec.rotation_resample == Resample::kBilinear ? "bilinear" : "nearest")
      << "\n";
  for (std::size_t t = 0; t < spec.steps.size(); ++t) {
    out << "\n[steps." << t << "]\n";
    out << "train_count = " << spec.steps[t].train_count << "\n";
    out << "shifts =";
    for (std::size_t k = 0; k < spec.steps[t].shifts.size(); ++k)
      out << (k ? "," : " ") << k;
    out << "\n";
  }
  for (std::size_t k = 0; k < all_blocks.size(); ++k) {
    const ShiftBlock& b = all_blocks[k];
    out << "\n[shift." << k << "]\n";
    out << "kind = " << shift_kind_name(b.kind) << "\n";
    switch (b.kind) {
      case ShiftKind::kCorruption:
        out << "noise_lo = " << b.noise_lo << "\n";
        out << "noise_hi = " << b.noise_hi << "\n";
        break;
      case ShiftKind::kRotation:
        out << "degrees = " << format_double(b.degrees) << "\n";
        out << "direction = " << (b.direction == RotationDirection::kCCW ? "ccw" : "cw")
            << "\n";
        break;
      case ShiftKind::kConditionalRotation: {
        out << "degrees = " << format_double(b.degrees) << "\n";
        out << "direction_map =";
        for (std::size_t c = 0; c < b.direction_map.size(); ++c)
          out << (c ? "," : " ")
              << (b.direction_map[c] == RotationDirection::kCCW ? "ccw" : "cw");
        out << "\n";
        break;
      }
      case ShiftKind::kRedTint:
        out << "amount = " << b.tint_amount << "\n";
        break;
      case ShiftKind::kLabelFlip:
        break;
      case ShiftKind::kSubPopulation:
        out << "schedule = " << b.schedule << "\n";
        break;
    }
  }
  if (spec.subpop_schedule) {
    out << "\n[subpop]\n";
    const auto& order = spec.subpop_schedule->fine_order;
    for (std::size_t c = 0; c < order.size(); ++c) {
      out << "coarse." << c << " =";
      for (std::size_t j = 0; j < order[c].size(); ++j)
        out << (j ? "," : " ") << order[c][j];
      out << "\n";
    }
  }
  return out.str();
}

SequenceSpec parse_spec(const std::string& text) {
  const TextConfig cfg = TextConfig::parse(text);
  SequenceSpec spec;
  spec.name = cfg.get_or("sequence", "name", "custom");
  spec.base_corpus = cfg.get("sequence", "base_corpus");
  spec.test_count_final = static_cast<int>(cfg.get_int("sequence", "test_count"));
  spec.master_seed = static_cast<std::uint64_t>(
      std::stoull(cfg.get("sequence", "master_seed")));
  spec.val_fraction = cfg.get_double("sequence", "val_fraction");
  spec.balanced = cfg.get_int("sequence", "balanced") != 0;
  spec.rotation_resample =
      cfg.get_or("sequence", "rotation_resample", "bilinear") == "nearest"
          ? Resample::kNearest
          : Resample::kBilinear;

  std::vector<ShiftBlock> blocks;
  for (int k = 0;; ++k) {
    const std::string section = "shift." + std::to_string(k);
    if (!cfg.sections.count(section)) break;
    ShiftBlock b;
    b.kind = shift_kind_from_name(cfg.get(section, "kind"));
    switch (b.kind) {
      case ShiftKind::kCorruption:
        b.noise_lo = static_cast<int>(cfg.get_int(section, "noise_lo"));
        b.noise_hi = static_cast<int>(cfg.get_int(section, "noise_hi"));
        break;
      case ShiftKind::kRotation:
        b.degrees = cfg.get_double(section, "degrees");
        b.direction = cfg.get_or(section, "direction", "ccw") == "cw"
                          ? RotationDirection::kCW
                          : RotationDirection::kCCW;
        break;
      case ShiftKind::kConditionalRotation: {
        b.degrees = cfg.get_double(section, "degrees");
        for (const auto& tok : split_list(cfg.get_or(section, "direction_map", "")))
          b.direction_map.push_back(tok == "cw" ? RotationDirection::kCW
                                                : RotationDirection::kCCW);
        break;
      }
      case ShiftKind::kRedTint:
        b.tint_amount = static_cast<int>(cfg.get_int(section, "amount"));
        break;
      case ShiftKind::kLabelFlip:
        break;
      case ShiftKind::kSubPopulation:
        b.schedule = static_cast<int>(cfg.get_int(section, "schedule"));
        break;
    }
    blocks.push_back(std::move(b));
  }

  for (int t = 0;; ++t) {
    const std::string section = "steps." + std::to_string(t);
    if (!cfg.sections.count(section)) break;
    StepSpec step;
    step.train_count = static_cast<int>(cfg.get_int(section, "train_count"));
    for (const auto& tok : split_list(cfg.get_or(section, "shifts", "")))
      step.shifts.push_back(blocks.at(static_cast<std::size_t>(std::stoi(tok))));
    spec.steps.push_back(std::move(step));
  }

  if (cfg.sections.count("subpop")) {
    SubPopSchedule sched;
    for (int c = 0;; ++c) {
      const std::string key = "coarse." + std::to_string(c);
      if (!cfg.has("subpop", key)) break;
      std::vector<int> order;
      for (const auto& tok : split_list(cfg.get("subpop", key)))
        order.push_back(std::stoi(tok));
      sched.fine_order.push_back(std::move(order));
    }
    spec.subpop_schedule = std::move(sched);
  }
  spec.validate();
  return spec;
}

std::uint64_t spec_hash(const SequenceSpec& spec) {
  return Rng::hash_tag(serialize_spec(spec));
}

namespace {

std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

json set_manifest(const LabeledImageSet& set, const std::string& file) {
  json j;
  j["file"] = file;
  j["count"] = set.size();
  j["source_ids"] = set.source_ids;
  return j;
}

LabeledImageSet load_set(const std::string& dir, const json& j, int num_classes,
                         int step_index, Split split) {
  const auto bytes = read_file_bytes(dir + "/" + j.at("file").get<std::string>());
  const auto records = parse_cifar10_records(bytes);
  LabeledImageSet set;
  set.num_classes = num_classes;
  set.step_index = step_index;
  set.split = split;
  for (const auto& rec : records) {
    set.images.push_back(rec.image);
    set.labels.push_back(rec.label);
  }
  set.source_ids = j.at("source_ids").get<std::vector<std::int64_t>>();
  if (set.source_ids.size() != set.images.size())
    throw std::runtime_error("manifest source_ids do not match " +
                             j.at("file").get<std::string>());
  return set;
}

}  // namespace

void save_sequence(const SequenceData& data, const std::string& dir) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["format"] = 1;
  const std::string spec_text = serialize_spec(data.spec);
  manifest["spec"] = spec_text;
  manifest["spec_hash"] = hash_hex(Rng::hash_tag(spec_text));
  manifest["num_classes"] = data.final_test.num_classes;
  json steps = json::array();
  for (std::size_t t = 0; t < data.steps.size(); ++t) {
    const std::string train_file = "step" + std::to_string(t) + "_train.bin";
    const std::string val_file = "step" + std::to_string(t) + "_val.bin";
    write_file_bytes(dir + "/" + train_file, to_cifar_bytes(data.steps[t].train));
    write_file_bytes(dir + "/" + val_file, to_cifar_bytes(data.steps[t].val));
    json j;
    j["train"] = set_manifest(data.steps[t].train, train_file);
    j["val"] = set_manifest(data.steps[t].val, val_file);
    steps.push_back(std::move(j));
  }
  manifest["steps"] = std::move(steps);
  write_file_bytes(dir + "/test.bin", to_cifar_bytes(data.final_test));
  manifest["test"] = set_manifest(data.final_test, "test.bin");

  std::ofstream out(dir + "/manifest.json", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest in " + dir);
  out << manifest.dump(2) << "\n";
}

SequenceData load_sequence(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw std::runtime_error("no manifest.json in " + dir);
  json manifest = json::parse(in);

  const std::string spec_text = manifest.at("spec").get<std::string>();
  if (hash_hex(Rng::hash_tag(spec_text)) != manifest.at("spec_hash").get<std::string>())
    throw std::runtime_error("manifest spec hash mismatch in " + dir);

  SequenceData data;
  data.spec = parse_spec(spec_text);
  const int L = manifest.at("num_classes").get<int>();
  const auto& steps = manifest.at("steps");
  for (std::size_t t = 0; t < steps.size(); ++t) {
    StepData step;
    step.train = load_set(dir, steps[t].at("train"), L, static_cast<int>(t), Split::kTrain);
    step.val = load_set(dir, steps[t].at("val"), L, static_cast<int>(t), Split::kVal);
    data.steps.push_back(std::move(step));
  }
  data.final_test = load_set(dir, manifest.at("test"), L,
                             static_cast<int>(steps.size()) - 1, Split::kTest);
  return data;
}

}  // namespace seqshift
