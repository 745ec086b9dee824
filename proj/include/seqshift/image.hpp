#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqshift {

// 8-bit planar image, channels-major (all R, then G, then B).
struct ImageTensor {
  int channels = 3;
  int height = 32;
  int width = 32;
  std::vector<std::uint8_t> data;

  ImageTensor() = default;
  ImageTensor(int c, int h, int w)
      : channels(c), height(h), width(w),
        data(static_cast<std::size_t>(c) * h * w, 0) {}

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
  std::uint8_t& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  std::uint8_t at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  bool same_shape(const ImageTensor& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

enum class Split { kTrain, kVal, kTest };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

// Samples for one (step, split). fine_labels is populated only for
// corpora with a fine/coarse hierarchy.
struct LabeledImageSet {
  std::vector<ImageTensor> images;
  std::vector<int> labels;
  std::vector<int> fine_labels;
  std::vector<std::int64_t> source_ids;
  int step_index = 0;
  Split split = Split::kTrain;
  int num_classes = 10;

  std::size_t size() const { return images.size(); }

  void check_consistent() const {
    if (labels.size() != images.size() || source_ids.size() != images.size())
      throw std::invalid_argument("LabeledImageSet: list lengths differ");
    if (!fine_labels.empty() && fine_labels.size() != images.size())
      throw std::invalid_argument("LabeledImageSet: fine label length differs");
    for (int y : labels)
      if (y < 0 || y >= num_classes)
        throw std::invalid_argument("LabeledImageSet: label out of range");
  }
};

struct BaseRecord {
  ImageTensor image;
  int label = 0;        // coarse label
  int fine_label = -1;  // -1 when the corpus has no fine labels
};

struct BaseCorpus {
  std::string name;
  int num_classes = 10;
  int num_fine_classes = 0;  // 0 when no hierarchy
  std::vector<BaseRecord> train_records;
  std::vector<BaseRecord> test_records;
  // fine -> coarse, filled for hierarchical corpora.
  std::vector<int> fine_to_coarse;

  bool has_fine() const { return num_fine_classes > 0; }
};

}  // namespace seqshift
