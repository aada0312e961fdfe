#pragma once

#include <cstdint>

#include "mil/common.hpp"
#include "mil/tensor.hpp"

namespace mil::kernels {

/// Per-channel batch statistics and normalization caches for one forward.
struct BnCache {
  Tensor xhat;     // same shape as input
  Tensor inv_std;  // (C)
  Tensor mean;     // (C)
};

/// Training-mode forward over (N,C,H,W): biased batch variance, running
/// stats updated with `momentum` (running_var gets the unbiased estimate).
void batchnorm_forward_train_serial(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                                    real_t eps, real_t momentum, Tensor& running_mean,
                                    Tensor& running_var, Tensor& y, BnCache& cache);
void batchnorm_forward_train_parallel(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                                      real_t eps, real_t momentum, Tensor& running_mean,
                                      Tensor& running_var, Tensor& y, BnCache& cache);
void batchnorm_forward_train(const Tensor& x, const Tensor& gamma, const Tensor& beta, real_t eps,
                             real_t momentum, Tensor& running_mean, Tensor& running_var, Tensor& y,
                             BnCache& cache);

/// Inference-mode forward using running statistics.
void batchnorm_forward_eval_serial(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                                   real_t eps, const Tensor& running_mean,
                                   const Tensor& running_var, Tensor& y);
void batchnorm_forward_eval_parallel(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                                     real_t eps, const Tensor& running_mean,
                                     const Tensor& running_var, Tensor& y);
void batchnorm_forward_eval(const Tensor& x, const Tensor& gamma, const Tensor& beta, real_t eps,
                            const Tensor& running_mean, const Tensor& running_var, Tensor& y);

/// Training-mode backward. dgamma/dbeta are accumulated into.
void batchnorm_backward_serial(const Tensor& dy, const Tensor& gamma, const BnCache& cache,
                               Tensor& dx, Tensor& dgamma, Tensor& dbeta);
void batchnorm_backward_parallel(const Tensor& dy, const Tensor& gamma, const BnCache& cache,
                                 Tensor& dx, Tensor& dgamma, Tensor& dbeta);
void batchnorm_backward(const Tensor& dy, const Tensor& gamma, const BnCache& cache, Tensor& dx,
                        Tensor& dgamma, Tensor& dbeta);

}  // namespace mil::kernels
