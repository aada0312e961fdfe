#pragma once

#include <cstdint>

#include "mil/common.hpp"
#include "mil/tensor.hpp"

namespace mil::kernels {

/// Static geometry of a 2-d convolution.
struct ConvGeom {
  int in_c = 0;
  int out_c = 0;
  int ksize = 0;
  int stride = 1;
  int pad = 0;

  int out_extent(int in) const { return (in + 2 * pad - ksize) / stride + 1; }
  std::int64_t patch_len() const { return static_cast<std::int64_t>(in_c) * ksize * ksize; }
};

/// Unfolds one sample (C,H,W) into columns (C*k*k, OH*OW). Out-of-image taps
/// contribute zeros.
void im2col(const real_t* in, int C, int H, int W, const ConvGeom& g, real_t* cols);

/// Adjoint of im2col: folds columns back, summing overlapping taps. Gather
/// formulation, deterministic for any parallel split over pixels.
void col2im(const real_t* cols, int C, int H, int W, const ConvGeom& g, real_t* grad_in);

/// y(N,OC,OH,OW) = conv(x(N,C,H,W), w(OC,C*k*k)) + b. `cols_cache`, when not
/// null, receives the per-sample im2col buffers (N, C*k*k, OH*OW) for the
/// weight-gradient pass. `b` may be null.
void conv2d_forward_serial(const Tensor& x, const Tensor& w, const real_t* b, const ConvGeom& g,
                           Tensor& y, Tensor* cols_cache);
void conv2d_forward_parallel(const Tensor& x, const Tensor& w, const real_t* b, const ConvGeom& g,
                             Tensor& y, Tensor* cols_cache);
void conv2d_forward(const Tensor& x, const Tensor& w, const real_t* b, const ConvGeom& g,
                    Tensor& y, Tensor* cols_cache);

/// dx(N,C,H,W) from dy(N,OC,OH,OW) and w(OC,C*k*k).
void conv2d_backward_input_serial(const Tensor& dy, const Tensor& w, const ConvGeom& g,
                                  Tensor& dx);
void conv2d_backward_input_parallel(const Tensor& dy, const Tensor& w, const ConvGeom& g,
                                    Tensor& dx);
void conv2d_backward_input(const Tensor& dy, const Tensor& w, const ConvGeom& g, Tensor& dx);

/// dw(OC,C*k*k) += sum over samples, db(OC) += row sums. `db` may be null.
/// Accumulates into dw/db (callers zero them at the start of a step).
void conv2d_backward_weights_serial(const Tensor& dy, const Tensor& cols_cache, Tensor& dw,
                                    real_t* db);
void conv2d_backward_weights_parallel(const Tensor& dy, const Tensor& cols_cache, Tensor& dw,
                                      real_t* db);
void conv2d_backward_weights(const Tensor& dy, const Tensor& cols_cache, Tensor& dw, real_t* db);

}  // namespace mil::kernels
