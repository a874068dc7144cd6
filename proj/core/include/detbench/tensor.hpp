#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "detbench/memtrack.hpp"

namespace detbench {

// Minimal dense n-dimensional array, row-major doubles. Serialized forms
// (weight and tensor files) store float32; math runs in double.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape, double fill = 0.0);

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t dim(size_t i) const { return shape_[i]; }
  size_t rank() const { return shape_.size(); }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  // 3-d accessor for [C,H,W] feature maps.
  double& at3(int64_t c, int64_t y, int64_t x) {
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }
  double at3(int64_t c, int64_t y, int64_t x) const {
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool operator==(const Tensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

  static int64_t shape_numel(std::span<const int64_t> shape);

 private:
  std::vector<int64_t> shape_;
  std::vector<double> data_;
  memtrack::Charge charge_;
};

}  // namespace detbench
