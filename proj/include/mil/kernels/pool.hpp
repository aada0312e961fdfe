#pragma once

#include <cstdint>
#include <vector>

#include "mil/common.hpp"
#include "mil/tensor.hpp"

namespace mil::kernels {

struct PoolGeom {
  int ksize = 2;
  int stride = 2;
  int pad = 0;

  int out_extent(int in) const { return (in + 2 * pad - ksize) / stride + 1; }
};

/// Max pooling. `argmax` receives, per output cell, the linear index of the
/// winning element within the full input tensor (ties: first in scan order).
void maxpool2d_forward_serial(const Tensor& x, const PoolGeom& g, Tensor& y,
                              std::vector<std::int64_t>& argmax);
void maxpool2d_forward_parallel(const Tensor& x, const PoolGeom& g, Tensor& y,
                                std::vector<std::int64_t>& argmax);
void maxpool2d_forward(const Tensor& x, const PoolGeom& g, Tensor& y,
                       std::vector<std::int64_t>& argmax);

void maxpool2d_backward_serial(const Tensor& dy, const std::vector<std::int64_t>& argmax,
                               Tensor& dx);
void maxpool2d_backward_parallel(const Tensor& dy, const std::vector<std::int64_t>& argmax,
                                 Tensor& dx);
void maxpool2d_backward(const Tensor& dy, const std::vector<std::int64_t>& argmax, Tensor& dx);

/// Global average pool (N,C,H,W) -> (N,C).
void gap_forward_serial(const Tensor& x, Tensor& y);
void gap_forward_parallel(const Tensor& x, Tensor& y);
void gap_forward(const Tensor& x, Tensor& y);

void gap_backward_serial(const Tensor& dy, std::int64_t H, std::int64_t W, Tensor& dx);
void gap_backward_parallel(const Tensor& dy, std::int64_t H, std::int64_t W, Tensor& dx);
void gap_backward(const Tensor& dy, std::int64_t H, std::int64_t W, Tensor& dx);

}  // namespace mil::kernels
