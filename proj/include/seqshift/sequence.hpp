#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seqshift/image.hpp"
#include "seqshift/shift.hpp"

namespace seqshift {

// One time step: the cumulative list of shift blocks in force plus the
// number of training samples drawn at that step.
struct StepSpec {
  std::vector<ShiftBlock> shifts;
  int train_count = 0;
};

struct SequenceSpec {
  std::string name;          // preset name or "custom"
  std::string base_corpus;   // cifar10 | cifar100 | synth10 | synth100
  std::vector<StepSpec> steps;
  int test_count_final = 0;
  std::uint64_t master_seed = 0;
  double val_fraction = 0.2;
  bool balanced = true;
  Resample rotation_resample = Resample::kBilinear;
  std::optional<SubPopSchedule> subpop_schedule;  // default order when absent

  void validate() const;  // throws on inconsistent cumulative lists
};

struct StepData {
  LabeledImageSet train;
  LabeledImageSet val;
};

struct SequenceData {
  SequenceSpec spec;
  std::vector<StepData> steps;
  LabeledImageSet final_test;
};

// Applies the cumulative block list to a drawn set, in declared order.
// Consecutive rotation blocks are fused into one resampled rotation per
// class so repeated 30-degree turns reach exact quarter turns instead of
// stacking interpolation loss and black corners.
void apply_shift_pipeline(LabeledImageSet& set, const std::vector<ShiftBlock>& blocks,
                          std::uint64_t pipeline_seed, Resample resample);

SequenceData materialize_sequence(const SequenceSpec& spec, const BaseCorpus& corpus);

// Independent draw from the final distribution sized like the whole
// sequence (the oracle's training data), split train/val.
StepData materialize_oracle(const SequenceSpec& spec, const BaseCorpus& corpus);

// Preset names: CLR, RCL, rrr, TTT, sss, rot2..rot8. sample_scale divides
// every sample count (must preserve divisibility by the class count).
SequenceSpec make_preset(const std::string& name, std::uint64_t master_seed,
                         int sample_scale = 1);
std::vector<std::string> preset_names();

// Sectioned text form ([sequence], [steps.N], [shift.N]) and its hash.
std::string serialize_spec(const SequenceSpec& spec);
SequenceSpec parse_spec(const std::string& text);
std::uint64_t spec_hash(const SequenceSpec& spec);

// Persists per-step CIFAR-layout binaries plus a JSON manifest recording
// the spec text, its hash, seeds and source ids. Rebuilding with the same
// spec is byte-identical.
void save_sequence(const SequenceData& data, const std::string& dir);
SequenceData load_sequence(const std::string& dir);

}  // namespace seqshift
