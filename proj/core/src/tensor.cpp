#include "detbench/tensor.hpp"

#include "detbench/errors.hpp"

namespace detbench {

Tensor::Tensor(std::vector<int64_t> shape, double fill) : shape_(std::move(shape)) {
  const int64_t n = shape_numel(shape_);
  data_.assign(static_cast<size_t>(n), fill);
  charge_ = memtrack::Charge(data_.size() * sizeof(double));
}

int64_t Tensor::shape_numel(std::span<const int64_t> shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d < 1) throw input_error("Tensor: shape dimensions must be positive");
    n *= d;
  }
  return n;
}

}  // namespace detbench
