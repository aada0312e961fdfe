#include "mil/kernels/batchnorm.hpp"

#include <cmath>

#include "mil/parallel.hpp"

namespace mil::kernels {

namespace {

// All loops are per-channel; parallel variants split over channels so the
// per-channel accumulation order never changes.

void forward_train_channel(const Tensor& x, const Tensor& gamma, const Tensor& beta, real_t eps,
                           real_t momentum, Tensor& running_mean, Tensor& running_var, Tensor& y,
                           BnCache& cache, std::int64_t c) {
  const std::int64_t N = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
  const std::int64_t m = N * HW;

  real_t sum = 0;
  for (std::int64_t n = 0; n < N; ++n) {
    const real_t* plane = x.data() + (n * C + c) * HW;
    for (std::int64_t p = 0; p < HW; ++p) sum += plane[p];
  }
  const real_t mean = sum / static_cast<real_t>(m);

  real_t var_sum = 0;
  for (std::int64_t n = 0; n < N; ++n) {
    const real_t* plane = x.data() + (n * C + c) * HW;
    for (std::int64_t p = 0; p < HW; ++p) {
      const real_t d = plane[p] - mean;
      var_sum += d * d;
    }
  }
  const real_t var = var_sum / static_cast<real_t>(m);
  const real_t inv_std = real_t{1} / std::sqrt(var + eps);

  cache.mean[c] = mean;
  cache.inv_std[c] = inv_std;

  const real_t g = gamma[c], b = beta[c];
  for (std::int64_t n = 0; n < N; ++n) {
    const real_t* xin = x.data() + (n * C + c) * HW;
    real_t* xh = cache.xhat.data() + (n * C + c) * HW;
    real_t* out = y.data() + (n * C + c) * HW;
    for (std::int64_t p = 0; p < HW; ++p) {
      xh[p] = (xin[p] - mean) * inv_std;
      out[p] = g * xh[p] + b;
    }
  }

  const real_t unbiased = m > 1 ? var_sum / static_cast<real_t>(m - 1) : var;
  running_mean[c] = (1 - momentum) * running_mean[c] + momentum * mean;
  running_var[c] = (1 - momentum) * running_var[c] + momentum * unbiased;
}

void forward_eval_channel(const Tensor& x, const Tensor& gamma, const Tensor& beta, real_t eps,
                          const Tensor& running_mean, const Tensor& running_var, Tensor& y,
                          std::int64_t c) {
  const std::int64_t N = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
  const real_t inv_std = real_t{1} / std::sqrt(running_var[c] + eps);
  const real_t g = gamma[c], b = beta[c], mean = running_mean[c];
  for (std::int64_t n = 0; n < N; ++n) {
    const real_t* xin = x.data() + (n * C + c) * HW;
    real_t* out = y.data() + (n * C + c) * HW;
    for (std::int64_t p = 0; p < HW; ++p) out[p] = g * (xin[p] - mean) * inv_std + b;
  }
}

void backward_channel(const Tensor& dy, const Tensor& gamma, const BnCache& cache, Tensor& dx,
                      Tensor& dgamma, Tensor& dbeta, std::int64_t c) {
  const std::int64_t N = dy.dim(0), C = dy.dim(1), HW = dy.dim(2) * dy.dim(3);
  const std::int64_t m = N * HW;

  real_t sum_dy = 0, sum_dy_xhat = 0;
  for (std::int64_t n = 0; n < N; ++n) {
    const real_t* g = dy.data() + (n * C + c) * HW;
    const real_t* xh = cache.xhat.data() + (n * C + c) * HW;
    for (std::int64_t p = 0; p < HW; ++p) {
      sum_dy += g[p];
      sum_dy_xhat += g[p] * xh[p];
    }
  }
  dgamma[c] += sum_dy_xhat;
  dbeta[c] += sum_dy;

  const real_t scale = gamma[c] * cache.inv_std[c] / static_cast<real_t>(m);
  for (std::int64_t n = 0; n < N; ++n) {
    const real_t* g = dy.data() + (n * C + c) * HW;
    const real_t* xh = cache.xhat.data() + (n * C + c) * HW;
    real_t* out = dx.data() + (n * C + c) * HW;
    for (std::int64_t p = 0; p < HW; ++p)
      out[p] = scale * (static_cast<real_t>(m) * g[p] - sum_dy - xh[p] * sum_dy_xhat);
  }
}

}  // namespace

void batchnorm_forward_train_serial(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                                    real_t eps, real_t momentum, Tensor& running_mean,
                                    Tensor& running_var, Tensor& y, BnCache& cache) {
  const std::int64_t C = x.dim(1);
  for (std::int64_t c = 0; c < C; ++c)
    forward_train_channel(x, gamma, beta, eps, momentum, running_mean, running_var, y, cache, c);
}

void batchnorm_forward_train_parallel(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                                      real_t eps, real_t momentum, Tensor& running_mean,
                                      Tensor& running_var, Tensor& y, BnCache& cache) {
  const std::int64_t C = x.dim(1);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < C; ++c)
    forward_train_channel(x, gamma, beta, eps, momentum, running_mean, running_var, y, cache, c);
}

void batchnorm_forward_train(const Tensor& x, const Tensor& gamma, const Tensor& beta, real_t eps,
                             real_t momentum, Tensor& running_mean, Tensor& running_var, Tensor& y,
                             BnCache& cache) {
  if (parallel::enabled())
    batchnorm_forward_train_parallel(x, gamma, beta, eps, momentum, running_mean, running_var, y,
                                     cache);
  else
    batchnorm_forward_train_serial(x, gamma, beta, eps, momentum, running_mean, running_var, y,
                                   cache);
}

void batchnorm_forward_eval_serial(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                                   real_t eps, const Tensor& running_mean,
                                   const Tensor& running_var, Tensor& y) {
  const std::int64_t C = x.dim(1);
  for (std::int64_t c = 0; c < C; ++c)
    forward_eval_channel(x, gamma, beta, eps, running_mean, running_var, y, c);
}

void batchnorm_forward_eval_parallel(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                                     real_t eps, const Tensor& running_mean,
                                     const Tensor& running_var, Tensor& y) {
  const std::int64_t C = x.dim(1);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < C; ++c)
    forward_eval_channel(x, gamma, beta, eps, running_mean, running_var, y, c);
}

void batchnorm_forward_eval(const Tensor& x, const Tensor& gamma, const Tensor& beta, real_t eps,
                            const Tensor& running_mean, const Tensor& running_var, Tensor& y) {
  if (parallel::enabled())
    batchnorm_forward_eval_parallel(x, gamma, beta, eps, running_mean, running_var, y);
  else
    batchnorm_forward_eval_serial(x, gamma, beta, eps, running_mean, running_var, y);
}

void batchnorm_backward_serial(const Tensor& dy, const Tensor& gamma, const BnCache& cache,
                               Tensor& dx, Tensor& dgamma, Tensor& dbeta) {
  const std::int64_t C = dy.dim(1);
  for (std::int64_t c = 0; c < C; ++c)
    backward_channel(dy, gamma, cache, dx, dgamma, dbeta, c);
}

void batchnorm_backward_parallel(const Tensor& dy, const Tensor& gamma, const BnCache& cache,
                                 Tensor& dx, Tensor& dgamma, Tensor& dbeta) {
  const std::int64_t C = dy.dim(1);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < C; ++c)
    backward_channel(dy, gamma, cache, dx, dgamma, dbeta, c);
}

void batchnorm_backward(const Tensor& dy, const Tensor& gamma, const BnCache& cache, Tensor& dx,
                        Tensor& dgamma, Tensor& dbeta) {
  if (parallel::enabled())
    batchnorm_backward_parallel(dy, gamma, cache, dx, dgamma, dbeta);
  else
    batchnorm_backward_serial(dy, gamma, cache, dx, dgamma, dbeta);
}

}  // namespace mil::kernels
