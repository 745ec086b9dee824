#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace seqshift {

// One experiment file: which sequence, which (method x arch x seed) grid,
// desk-scale knobs, training defaults. CLI flags override file values.
struct ExperimentConfig {
  std::string preset;        // e.g. "CLR"; empty when spec/sequence_dir given
  std::string spec_path;     // path to a serialized SequenceSpec
  std::string sequence_dir;  // pre-built sequence directory
  std::string base_corpus;   // override (e.g. synth10 instead of cifar10)
  std::vector<std::string> methods;
  std::vector<std::string> architectures;
  std::vector<std::uint64_t> seeds;
  int scale_factor = 4;    // divides architecture channel counts
  int sample_scale = 4;    // divides preset sample counts
  bool downscale_images = true;  // 32x32 -> 16x16 for training
  int workers = 1;
  std::string out_dir = "runs";

  int epochs = 30;
  int batch_size = 64;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  bool augment = true;

  static ExperimentConfig from_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
  // Deterministic serialization used for run-id hashing.
  std::string canonical_text() const;
};

}  // namespace seqshift
