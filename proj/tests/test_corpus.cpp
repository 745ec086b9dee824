#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "seqshift/augment.hpp"
#include "seqshift/cifar.hpp"
#include "seqshift/imgops.hpp"
#include "seqshift/sampling.hpp"
#include "seqshift/synth.hpp"

using namespace seqshift;

namespace {

// Corpus of tiny 1-channel images for draw statistics (cheap to copy).
BaseCorpus tiny_corpus(int train, int test, int num_classes) {
  BaseCorpus c;
  c.name = "tiny";
  c.num_classes = num_classes;
  for (int i = 0; i < train; ++i) {
    BaseRecord r;
    r.image = ImageTensor(1, 1, 1);
    r.label = i % num_classes;
    c.train_records.push_back(std::move(r));
  }
  for (int i = 0; i < test; ++i) {
    BaseRecord r;
    r.image = ImageTensor(1, 1, 1);
    r.label = i % num_classes;
    c.test_records.push_back(std::move(r));
  }
  return c;
}

}  // namespace

TEST_CASE("cifar10 parses a zero record as label 0, all black") {
  std::vector<std::uint8_t> bytes(3073, 0);
  const auto records = parse_cifar10_records(bytes);
  REQUIRE(records.size() == 1);
  CHECK(records[0].label == 0);
  for (auto px : records[0].image.data) CHECK(px == 0);
}

TEST_CASE("cifar10 reads labels from the first octet of each record") {
  std::vector<std::uint8_t> bytes(2 * 3073, 0);
  bytes[0] = 3;
  bytes[3073] = 7;
  const auto records = parse_cifar10_records(bytes);
  REQUIRE(records.size() == 2);
  CHECK(records[0].label == 3);
  CHECK(records[1].label == 7);
}

TEST_CASE("cifar10 rejects truncated streams and bad labels") {
  std::vector<std::uint8_t> bytes(3072, 0);
  CHECK_THROWS_AS(parse_cifar10_records(bytes), ParseError);
  std::vector<std::uint8_t> bad(3073, 0);
  bad[0] = 10;
  CHECK_THROWS_AS(parse_cifar10_records(bad), ParseError);
}

TEST_CASE("cifar100 parses coarse/fine pairs and validates bounds") {
  std::vector<std::uint8_t> bytes(3074, 0);
  const auto records = parse_cifar100_records(bytes);
  REQUIRE(records.size() == 1);
  CHECK(records[0].label == 0);
  CHECK(records[0].fine_label == 0);

  std::vector<std::uint8_t> bad_fine(3074, 0);
  bad_fine[1] = 100;
  CHECK_THROWS_AS(parse_cifar100_records(bad_fine), ParseError);
}

TEST_CASE("synthetic corpora have the expected shape") {
  const auto c10 = make_synthetic_cifar10(200, 50, 1);
  CHECK(c10.train_records.size() == 200);
  CHECK(c10.test_records.size() == 50);
  CHECK(c10.num_classes == 10);
  const auto c100 = make_synthetic_cifar100(200, 50, 1);
  CHECK(c100.num_classes == 20);
  CHECK(c100.num_fine_classes == 100);
  for (const auto& rec : c100.train_records) {
    CHECK(rec.fine_label / 5 == rec.label);
  }
}

TEST_CASE("draw_step_samples: n=0, determinism, balance") {
  const auto corpus = tiny_corpus(5000, 100, 10);

  const auto empty = draw_step_samples(corpus, 0, false, 3);
  CHECK(empty.size() == 0);

  const auto a = draw_step_samples(corpus, 500, false, 3);
  const auto b = draw_step_samples(corpus, 500, false, 3);
  CHECK(a.source_ids == b.source_ids);

  const auto bal = draw_step_samples(corpus, 500, true, 3);
  std::map<int, int> hist;
  for (int y : bal.labels) ++hist[y];
  for (int c = 0; c < 10; ++c) CHECK(hist[c] == 50);

  CHECK_THROWS(draw_step_samples(corpus, 6000, false, 3));
}

TEST_CASE("two draws of 5000 from 50000 overlap by about 500") {
  const auto corpus = tiny_corpus(50000, 100, 10);
  double total = 0.0;
  const int trials = 100;
  for (int s = 0; s < trials; ++s) {
    const auto a = draw_step_samples(corpus, 5000, true, 1000 + 2 * s);
    const auto b = draw_step_samples(corpus, 5000, true, 1001 + 2 * s);
    std::set<std::int64_t> ids(a.source_ids.begin(), a.source_ids.end());
    int overlap = 0;
    for (auto id : b.source_ids) overlap += ids.count(id);
    total += overlap;
  }
  const double mean = total / trials;
  CHECK(mean > 500 - 75);
  CHECK(mean < 500 + 75);
}

TEST_CASE("split_train_val partitions disjointly and deterministically") {
  const auto corpus = tiny_corpus(5000, 100, 10);
  auto set = draw_step_samples(corpus, 4000, true, 5);
  const auto [train, val] = split_train_val(set, 0.2, 9);
  CHECK(train.size() == 3200);
  CHECK(val.size() == 800);
  std::set<std::int64_t> train_ids(train.source_ids.begin(), train.source_ids.end());
  for (auto id : val.source_ids) CHECK(train_ids.count(id) == 0);

  const auto [train2, val2] = split_train_val(set, 0.2, 9);
  CHECK(train.source_ids == train2.source_ids);

  const auto [all_train, no_val] = split_train_val(set, 0.0, 9);
  CHECK(all_train.size() == 4000);
  CHECK(no_val.size() == 0);
}

TEST_CASE("rotation by multiples of 90 degrees is an exact permutation") {
  ImageTensor img(1, 32, 32);
  img.at(0, 0, 31) = 255;
  const auto rot = rotate_image(img, 90.0);
  CHECK(rot.at(0, 0, 0) == 255);
  int nonzero = 0;
  for (auto px : rot.data) nonzero += px != 0;
  CHECK(nonzero == 1);
}

TEST_CASE("360-degree rotation is the identity up to resampling error") {
  const auto corpus = make_synthetic_cifar10(1, 0, 7);
  const auto& img = corpus.train_records[0].image;
  const auto rot = rotate_image(img, 360.0);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    CHECK(std::abs(int(rot.data[i]) - int(img.data[i])) < 2);
}

TEST_CASE("flip twice is the identity") {
  const auto corpus = make_synthetic_cifar10(1, 0, 8);
  const auto& img = corpus.train_records[0].image;
  CHECK(flip_horizontal(flip_horizontal(img)).data == img.data);
}

TEST_CASE("augment is deterministic under a fixed seed and keeps shape") {
  const auto corpus = make_synthetic_cifar10(1, 0, 9);
  const auto& img = corpus.train_records[0].image;
  const auto a = augment(img, 77);
  const auto b = augment(img, 77);
  CHECK(a.data == b.data);
  CHECK(a.same_shape(img));
}

TEST_CASE("zero-degree rotation and centered crop act as identity") {
  const auto corpus = make_synthetic_cifar10(1, 0, 10);
  const auto& img = corpus.train_records[0].image;
  CHECK(rotate_image(img, 0.0).data == img.data);
  CHECK(pad_crop(img, 4, 4, 4).data == img.data);
}
