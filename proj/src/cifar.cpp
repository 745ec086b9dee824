#include "seqshift/cifar.hpp"

#include <fstream>

namespace seqshift {

namespace {

constexpr std::size_t kPixelBytes = 3 * 32 * 32;

ImageTensor decode_pixels(const std::uint8_t* p) {
  ImageTensor img(3, 32, 32);
  std::copy(p, p + kPixelBytes, img.data.begin());
  return img;
}

}  // namespace

std::vector<BaseRecord> parse_cifar10_records(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kRecord = 1 + kPixelBytes;
  if (bytes.size() % kRecord != 0)
    throw ParseError("truncated CIFAR-10 record", bytes.size() - bytes.size() % kRecord);
  std::vector<BaseRecord> out;
  out.reserve(bytes.size() / kRecord);
  for (std::size_t off = 0; off < bytes.size(); off += kRecord) {
    BaseRecord rec;
    rec.label = bytes[off];
    if (rec.label >= 10)
      throw ParseError("CIFAR-10 label out of range", off);
    rec.image = decode_pixels(bytes.data() + off + 1);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<BaseRecord> parse_cifar100_records(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kRecord = 2 + kPixelBytes;
  if (bytes.size() % kRecord != 0)
    throw ParseError("truncated CIFAR-100 record", bytes.size() - bytes.size() % kRecord);
  std::vector<BaseRecord> out;
  out.reserve(bytes.size() / kRecord);
  for (std::size_t off = 0; off < bytes.size(); off += kRecord) {
    BaseRecord rec;
    rec.label = bytes[off];
    rec.fine_label = bytes[off + 1];
    if (rec.label >= 20)
      throw ParseError("CIFAR-100 coarse label out of range", off);
    if (rec.fine_label >= 100)
      throw ParseError("CIFAR-100 fine label out of range", off + 1);
    rec.image = decode_pixels(bytes.data() + off + 2);
    out.push_back(std::move(rec));
  }
  return out;
}

BaseCorpus parse_cifar10(std::span<const std::uint8_t> train_bytes,
                         std::span<const std::uint8_t> test_bytes) {
  BaseCorpus corpus;
  corpus.name = "cifar10";
  corpus.num_classes = 10;
  corpus.train_records = parse_cifar10_records(train_bytes);
  corpus.test_records = parse_cifar10_records(test_bytes);
  return corpus;
}

BaseCorpus parse_cifar100(std::span<const std::uint8_t> train_bytes,
                          std::span<const std::uint8_t> test_bytes) {
  BaseCorpus corpus;
  corpus.name = "cifar100";
  corpus.num_classes = 20;
  corpus.num_fine_classes = 100;
  corpus.train_records = parse_cifar100_records(train_bytes);
  corpus.test_records = parse_cifar100_records(test_bytes);
  corpus.fine_to_coarse.assign(100, -1);
  for (const auto& rec : corpus.train_records)
    corpus.fine_to_coarse[rec.fine_label] = rec.label;
  return corpus;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

BaseCorpus load_cifar10_dir(const std::string& dir) {
  std::vector<std::uint8_t> train;
  for (int i = 1; i <= 5; ++i) {
    auto batch = read_file_bytes(dir + "/data_batch_" + std::to_string(i) + ".bin");
    train.insert(train.end(), batch.begin(), batch.end());
  }
  auto test = read_file_bytes(dir + "/test_batch.bin");
  return parse_cifar10(train, test);
}

BaseCorpus load_cifar100_dir(const std::string& dir) {
  auto train = read_file_bytes(dir + "/train.bin");
  auto test = read_file_bytes(dir + "/test.bin");
  return parse_cifar100(train, test);
}

std::vector<std::uint8_t> to_cifar_bytes(const LabeledImageSet& set) {
  std::vector<std::uint8_t> out;
  out.reserve(set.size() * (1 + kPixelBytes));
  for (std::size_t i = 0; i < set.size(); ++i) {
    out.push_back(static_cast<std::uint8_t>(set.labels[i]));
    const auto& img = set.images[i];
    out.insert(out.end(), img.data.begin(), img.data.end());
  }
  return out;
}

}  // namespace seqshift
