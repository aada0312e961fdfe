#include "mil/kernels/elementwise.hpp"

#include <cmath>

#include "mil/parallel.hpp"

namespace mil::kernels {

void relu_forward_serial(const real_t* x, real_t* y, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) y[i] = x[i] > 0 ? x[i] : 0;
}

void relu_forward_parallel(const real_t* x, real_t* y, std::int64_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) y[i] = x[i] > 0 ? x[i] : 0;
}

void relu_forward(const real_t* x, real_t* y, std::int64_t n) {
  if (parallel::enabled())
    relu_forward_parallel(x, y, n);
  else
    relu_forward_serial(x, y, n);
}

void relu_backward_serial(const real_t* x, const real_t* dy, real_t* dx, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) dx[i] = x[i] > 0 ? dy[i] : 0;
}

void relu_backward_parallel(const real_t* x, const real_t* dy, real_t* dx, std::int64_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) dx[i] = x[i] > 0 ? dy[i] : 0;
}

void relu_backward(const real_t* x, const real_t* dy, real_t* dx, std::int64_t n) {
  if (parallel::enabled())
    relu_backward_parallel(x, dy, dx, n);
  else
    relu_backward_serial(x, dy, dx, n);
}

void tanh_forward_serial(const real_t* x, real_t* y, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void tanh_forward_parallel(const real_t* x, real_t* y, std::int64_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void tanh_forward(const real_t* x, real_t* y, std::int64_t n) {
  if (parallel::enabled())
    tanh_forward_parallel(x, y, n);
  else
    tanh_forward_serial(x, y, n);
}

void tanh_backward_serial(const real_t* y, const real_t* dy, real_t* dx, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) dx[i] = dy[i] * (1 - y[i] * y[i]);
}

void tanh_backward_parallel(const real_t* y, const real_t* dy, real_t* dx, std::int64_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) dx[i] = dy[i] * (1 - y[i] * y[i]);
}

void tanh_backward(const real_t* y, const real_t* dy, real_t* dx, std::int64_t n) {
  if (parallel::enabled())
    tanh_backward_parallel(y, dy, dx, n);
  else
    tanh_backward_serial(y, dy, dx, n);
}

}  // namespace mil::kernels
