#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seqshift/image.hpp"

namespace seqshift {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what + " at byte offset " +
                           std::to_string(byte_offset)),
        byte_offset(byte_offset) {}
  std::size_t byte_offset;
};

// One CIFAR-10 record: 1 label octet + 3072 pixel octets (R, G, B planes,
// row-major). Throws ParseError on truncation or label >= 10.
std::vector<BaseRecord> parse_cifar10_records(std::span<const std::uint8_t> bytes);

// One CIFAR-100 record: coarse octet, fine octet, 3072 pixel octets.
// coarse in [0,20), fine in [0,100).
std::vector<BaseRecord> parse_cifar100_records(std::span<const std::uint8_t> bytes);

// Assembles a corpus from separate train/test streams.
BaseCorpus parse_cifar10(std::span<const std::uint8_t> train_bytes,
                         std::span<const std::uint8_t> test_bytes);
BaseCorpus parse_cifar100(std::span<const std::uint8_t> train_bytes,
                          std::span<const std::uint8_t> test_bytes);

// Reads the binary batch files under `dir` (data_batch_1..5.bin + test_batch.bin
// for CIFAR-10, train.bin + test.bin for CIFAR-100).
BaseCorpus load_cifar10_dir(const std::string& dir);
BaseCorpus load_cifar100_dir(const std::string& dir);

// Serializes a labelled set in the CIFAR-10 record layout (label + planes).
std::vector<std::uint8_t> to_cifar_bytes(const LabeledImageSet& set);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace seqshift
