#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "mil/common.hpp"

namespace mil {

/// Dense row-major tensor of real_t. Rank is dynamic; shapes up to rank 4 are
/// used in practice (N, C, H, W).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::int64_t> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<std::size_t>(numel_of(shape_)), real_t{0});
  }
  Tensor(std::initializer_list<std::int64_t> shape)
      : Tensor(std::vector<std::int64_t>(shape)) {}

  static Tensor zeros(std::vector<std::int64_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<std::int64_t> shape, real_t v) {
    Tensor t(std::move(shape));
    t.fill(v);
    return t;
  }

  const std::vector<std::int64_t>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::int64_t dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  real_t* data() { return data_.data(); }
  const real_t* data() const { return data_.data(); }
  std::vector<real_t>& vec() { return data_; }
  const std::vector<real_t>& vec() const { return data_; }

  void fill(real_t v) { std::fill(data_.begin(), data_.end(), v); }
  void zero() { fill(real_t{0}); }

  real_t& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  real_t operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  real_t& operator()(std::int64_t i, std::int64_t j) {
    return data_[static_cast<std::size_t>(i * shape_[1] + j)];
  }
  real_t operator()(std::int64_t i, std::int64_t j) const {
    return data_[static_cast<std::size_t>(i * shape_[1] + j)];
  }
  real_t& operator()(std::int64_t n, std::int64_t c, std::int64_t y, std::int64_t x) {
    return data_[static_cast<std::size_t>(((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x)];
  }
  real_t operator()(std::int64_t n, std::int64_t c, std::int64_t y, std::int64_t x) const {
    return data_[static_cast<std::size_t>(((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x)];
  }

  /// Reinterprets the buffer under a new shape with the same element count.
  void reshape(std::vector<std::int64_t> shape) {
    if (numel_of(shape) != numel())
      throw InvalidInputError("reshape: element count mismatch");
    shape_ = std::move(shape);
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  static std::int64_t numel_of(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (std::int64_t d : shape) {
      if (d < 0) throw InvalidInputError("tensor shape must be non-negative");
      n *= d;
    }
    return n;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += ", ";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

 private:
  std::vector<std::int64_t> shape_;
  std::vector<real_t> data_;
};

}  // namespace mil
