#include "seqshift/weights.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace seqshift {

std::size_t WeightVector::total_count() const {
  std::size_t total = 0;
  for (const auto& e : entries) total += e.data.size();
  return total;
}

bool WeightVector::same_schema(const WeightVector& o) const {
  if (entries.size() != o.entries.size()) return false;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].name != o.entries[i].name || entries[i].shape != o.entries[i].shape)
      return false;
  return true;
}

const WeightEntry* WeightVector::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

void WeightVector::add_scaled(const WeightVector& o, real scale) {
  if (!same_schema(o)) throw std::invalid_argument("weight schema mismatch");
  for (std::size_t i = 0; i < entries.size(); ++i)
    for (std::size_t k = 0; k < entries[i].data.size(); ++k)
      entries[i].data[k] += scale * o.entries[i].data[k];
}

void WeightVector::scale(real s) {
  for (auto& e : entries)
    for (auto& v : e.data) v *= s;
}

real WeightVector::dot(const WeightVector& o, bool trainable_only) const {
  if (!same_schema(o)) throw std::invalid_argument("weight schema mismatch");
  real acc = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (trainable_only && !entries[i].trainable) continue;
    for (std::size_t k = 0; k < entries[i].data.size(); ++k)
      acc += entries[i].data[k] * o.entries[i].data[k];
  }
  return acc;
}

real WeightVector::squared_norm(bool trainable_only) const {
  return dot(*this, trainable_only);
}

WeightVector lerp(const WeightVector& a, const WeightVector& b, real s) {
  if (!a.same_schema(b)) throw std::invalid_argument("weight schema mismatch");
  WeightVector out = a;
  for (std::size_t i = 0; i < out.entries.size(); ++i)
    for (std::size_t k = 0; k < out.entries[i].data.size(); ++k)
      out.entries[i].data[k] =
          (real(1) - s) * a.entries[i].data[k] + s * b.entries[i].data[k];
  return out;
}

namespace {

template <class T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("truncated checkpoint");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const WeightVector& w) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out.write("SQSF", 4);
  write_pod<std::uint32_t>(out, 1);  // version
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(w.entries.size()));
  for (const auto& e : w.entries) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    write_pod<std::uint8_t>(out, e.trainable ? 1 : 0);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(e.shape.size()));
    for (int d : e.shape) write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (real v : e.data) write_pod<float>(out, static_cast<float>(v));
  }
}

WeightVector load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SQSF", 4) != 0)
    throw std::runtime_error("bad checkpoint magic in " + path);
  const auto version = read_pod<std::uint32_t>(in);
  if (version != 1) throw std::runtime_error("unsupported checkpoint version");
  const auto count = read_pod<std::uint32_t>(in);
  WeightVector w;
  w.entries.resize(count);
  for (auto& e : w.entries) {
    const auto name_len = read_pod<std::uint32_t>(in);
    e.name.resize(name_len);
    in.read(e.name.data(), name_len);
    e.trainable = read_pod<std::uint8_t>(in) != 0;
    const auto rank = read_pod<std::uint32_t>(in);
    e.shape.resize(rank);
    std::size_t total = 1;
    for (auto& d : e.shape) {
      d = static_cast<int>(read_pod<std::uint32_t>(in));
      total *= static_cast<std::size_t>(d);
    }
    e.data.resize(total);
    for (auto& v : e.data) v = static_cast<real>(read_pod<float>(in));
  }
  return w;
}

}  // namespace seqshift
