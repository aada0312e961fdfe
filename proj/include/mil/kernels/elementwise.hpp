#pragma once

#include <cstdint>

#include "mil/common.hpp"

namespace mil::kernels {

void relu_forward_serial(const real_t* x, real_t* y, std::int64_t n);
void relu_forward_parallel(const real_t* x, real_t* y, std::int64_t n);
void relu_forward(const real_t* x, real_t* y, std::int64_t n);

/// dx = dy where x > 0, else 0.
void relu_backward_serial(const real_t* x, const real_t* dy, real_t* dx, std::int64_t n);
void relu_backward_parallel(const real_t* x, const real_t* dy, real_t* dx, std::int64_t n);
void relu_backward(const real_t* x, const real_t* dy, real_t* dx, std::int64_t n);

void tanh_forward_serial(const real_t* x, real_t* y, std::int64_t n);
void tanh_forward_parallel(const real_t* x, real_t* y, std::int64_t n);
void tanh_forward(const real_t* x, real_t* y, std::int64_t n);

/// dx = dy * (1 - y^2), with y the cached forward output.
void tanh_backward_serial(const real_t* y, const real_t* dy, real_t* dx, std::int64_t n);
void tanh_backward_parallel(const real_t* y, const real_t* dy, real_t* dx, std::int64_t n);
void tanh_backward(const real_t* y, const real_t* dy, real_t* dx, std::int64_t n);

}  // namespace mil::kernels
