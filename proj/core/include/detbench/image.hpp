#pragma once

#include <cstdint>
#include <vector>

#include "detbench/boxes.hpp"
#include "detbench/memtrack.hpp"

namespace detbench {

// Dense 3-channel image, interleaved RGB, row-major, values in [0,1].
class Image {
 public:
  Image() = default;
  Image(int height, int width, double fill = 0.0)
      : height_(height),
        width_(width),
        data_(static_cast<size_t>(height) * width * 3, fill),
        charge_(data_.size() * sizeof(double)) {}

  int height() const { return height_; }
  int width() const { return width_; }

  double& at(int y, int x, int c) { return data_[(static_cast<size_t>(y) * width_ + x) * 3 + c]; }
  double at(int y, int x, int c) const {
    return data_[(static_cast<size_t>(y) * width_ + x) * 3 + c];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_size(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }
  bool operator==(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_ && data_ == other.data_;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
  memtrack::Charge charge_;
};

struct LabeledImage {
  Image image;
  std::vector<GroundTruth> labels;
};

}  // namespace detbench
