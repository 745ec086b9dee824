#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqshift/tensor.hpp"

namespace seqshift {

// Flat, named, shape-tagged parameter storage. Includes batch-norm
// running statistics (marked trainable = false).
struct WeightEntry {
  std::string name;
  std::vector<int> shape;
  std::vector<real> data;
  bool trainable = true;
};

struct WeightVector {
  std::vector<WeightEntry> entries;

  std::size_t total_count() const;
  bool same_schema(const WeightVector& o) const;
  const WeightEntry* find(const std::string& name) const;

  // elementwise ops over matching schemas
  void add_scaled(const WeightVector& o, real scale);  // this += scale * o
  void scale(real s);
  real dot(const WeightVector& o, bool trainable_only = true) const;
  real squared_norm(bool trainable_only = true) const;
};

WeightVector lerp(const WeightVector& a, const WeightVector& b, real s);

// Checkpoint format: magic "SQSF", u32 version, u32 entry count, then per
// entry u32 name length, name bytes, u8 trainable, u32 rank, u32 dims,
// then little-endian 32-bit reals. Byte-exact round-trip.
void save_checkpoint(const std::string& path, const WeightVector& w);
WeightVector load_checkpoint(const std::string& path);

}  // namespace seqshift
