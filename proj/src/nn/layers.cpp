#include "mil/nn/layers.hpp"

#include <cmath>

#include "mil/kernels/elementwise.hpp"

namespace mil::nn {

// ---- Conv2d ----

Conv2d::Conv2d(std::string name, int in_c, int out_c, int ksize, int stride, int pad, bool bias)
    : geom_{in_c, out_c, ksize, stride, pad},
      weight_(name + ".weight", {out_c, static_cast<std::int64_t>(in_c) * ksize * ksize}),
      bias_(name + ".bias", {bias ? out_c : 0}),
      has_bias_(bias) {}

void Conv2d::init(rng::Engine& eng) {
  const real_t std = std::sqrt(real_t{2} / static_cast<real_t>(geom_.patch_len()));
  for (auto& v : weight_.value.vec()) v = rng::normal(eng, 0.0, std);
  if (has_bias_) bias_.value.zero();
}

Tensor Conv2d::forward(const Tensor& x, bool train) {
  if (x.rank() != 4 || x.dim(1) != geom_.in_c)
    throw InvalidInputError("conv '" + weight_.name + "': input shape " + x.shape_str());
  const int OH = geom_.out_extent(static_cast<int>(x.dim(2)));
  const int OW = geom_.out_extent(static_cast<int>(x.dim(3)));
  Tensor y({x.dim(0), geom_.out_c, OH, OW});
  Tensor* cache = nullptr;
  if (train) {
    in_shape_ = x.shape();
    cols_cache_ =
        Tensor({x.dim(0), geom_.patch_len(), static_cast<std::int64_t>(OH) * OW});
    cache = &cols_cache_;
  }
  kernels::conv2d_forward(x, weight_.value, has_bias_ ? bias_.value.data() : nullptr, geom_, y,
                          cache);
  return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
  kernels::conv2d_backward_weights(dy, cols_cache_, weight_.grad,
                                   has_bias_ ? bias_.grad.data() : nullptr);
  Tensor dx(in_shape_);
  kernels::conv2d_backward_input(dy, weight_.value, geom_, dx);
  return dx;
}

void Conv2d::collect_params(std::vector<Param*>& out) {
  out.push_back(&weight_);
  if (has_bias_) out.push_back(&bias_);
}

// ---- Linear ----

Linear::Linear(std::string name, int in_dim, int out_dim)
    : weight_(name + ".weight", {out_dim, in_dim}), bias_(name + ".bias", {out_dim}) {}

void Linear::init(rng::Engine& eng) {
  const real_t std = std::sqrt(real_t{1} / static_cast<real_t>(weight_.value.dim(1)));
  for (auto& v : weight_.value.vec()) v = rng::normal(eng, 0.0, std);
  bias_.value.zero();
}

Tensor Linear::forward(const Tensor& x, bool train) {
  if (x.rank() != 2 || x.dim(1) != weight_.value.dim(1))
    throw InvalidInputError("linear '" + weight_.name + "': input shape " + x.shape_str());
  if (train) input_ = x;
  const std::int64_t N = x.dim(0), out = weight_.value.dim(0), in = weight_.value.dim(1);
  Tensor y({N, out});
  kernels::gemm_nt(N, out, in, x.data(), weight_.value.data(), y.data());
  for (std::int64_t n = 0; n < N; ++n)
    for (std::int64_t o = 0; o < out; ++o) y(n, o) += bias_.value[o];
  return y;
}

Tensor Linear::backward(const Tensor& dy) {
  const std::int64_t N = dy.dim(0), out = weight_.value.dim(0), in = weight_.value.dim(1);
  kernels::gemm_tn(out, in, N, dy.data(), input_.data(), weight_.grad.data(), true);
  for (std::int64_t n = 0; n < N; ++n)
    for (std::int64_t o = 0; o < out; ++o) bias_.grad[o] += dy(n, o);
  Tensor dx({N, in});
  kernels::gemm_nn(N, in, out, dy.data(), weight_.value.data(), dx.data());
  return dx;
}

void Linear::collect_params(std::vector<Param*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// ---- ReLU ----

Tensor ReLU::forward(const Tensor& x, bool train) {
  if (train) input_ = x;
  Tensor y(x.shape());
  kernels::relu_forward(x.data(), y.data(), x.numel());
  return y;
}

Tensor ReLU::backward(const Tensor& dy) {
  Tensor dx(dy.shape());
  kernels::relu_backward(input_.data(), dy.data(), dx.data(), dy.numel());
  return dx;
}

// ---- MaxPool2d ----

Tensor MaxPool2d::forward(const Tensor& x, bool train) {
  const int OH = geom_.out_extent(static_cast<int>(x.dim(2)));
  const int OW = geom_.out_extent(static_cast<int>(x.dim(3)));
  Tensor y({x.dim(0), x.dim(1), OH, OW});
  argmax_.assign(static_cast<std::size_t>(y.numel()), -1);
  if (train) in_shape_ = x.shape();
  kernels::maxpool2d_forward(x, geom_, y, argmax_);
  return y;
}

Tensor MaxPool2d::backward(const Tensor& dy) {
  Tensor dx(in_shape_);
  kernels::maxpool2d_backward(dy, argmax_, dx);
  return dx;
}

// ---- GlobalAvgPool ----

Tensor GlobalAvgPool::forward(const Tensor& x, bool train) {
  if (train) in_shape_ = x.shape();
  Tensor y({x.dim(0), x.dim(1)});
  kernels::gap_forward(x, y);
  return y;
}

Tensor GlobalAvgPool::backward(const Tensor& dy) {
  Tensor dx(in_shape_);
  kernels::gap_backward(dy, in_shape_[2], in_shape_[3], dx);
  return dx;
}

// ---- BatchNorm2d ----

BatchNorm2d::BatchNorm2d(std::string name, int channels, real_t eps, real_t momentum)
    : name_(std::move(name)),
      gamma_(name_ + ".gamma", {channels}),
      beta_(name_ + ".beta", {channels}),
      running_mean_({channels}),
      running_var_({channels}),
      eps_(eps),
      momentum_(momentum) {
  gamma_.value.fill(1);
  running_var_.fill(1);
}

Tensor BatchNorm2d::forward(const Tensor& x, bool train) {
  Tensor y(x.shape());
  if (train) {
    cache_.xhat = Tensor(x.shape());
    cache_.inv_std = Tensor({x.dim(1)});
    cache_.mean = Tensor({x.dim(1)});
    kernels::batchnorm_forward_train(x, gamma_.value, beta_.value, eps_, momentum_, running_mean_,
                                     running_var_, y, cache_);
  } else {
    kernels::batchnorm_forward_eval(x, gamma_.value, beta_.value, eps_, running_mean_,
                                    running_var_, y);
  }
  return y;
}

Tensor BatchNorm2d::backward(const Tensor& dy) {
  Tensor dx(dy.shape());
  kernels::batchnorm_backward(dy, gamma_.value, cache_, dx, gamma_.grad, beta_.grad);
  return dx;
}

void BatchNorm2d::collect_params(std::vector<Param*>& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
}

void BatchNorm2d::collect_buffers(std::vector<NamedBuffer>& out) {
  out.push_back({name_ + ".running_mean", &running_mean_});
  out.push_back({name_ + ".running_var", &running_var_});
}

// ---- ChannelNormalize ----

Tensor ChannelNormalize::forward(const Tensor& x, bool) {
  Tensor y(x.shape());
  const std::int64_t N = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
  for (std::int64_t n = 0; n < N; ++n) {
    for (std::int64_t c = 0; c < C; ++c) {
      const real_t m = mean_[static_cast<std::size_t>(c)];
      const real_t s = stddev_[static_cast<std::size_t>(c)];
      const real_t* in = x.data() + (n * C + c) * HW;
      real_t* out = y.data() + (n * C + c) * HW;
      for (std::int64_t p = 0; p < HW; ++p) out[p] = (in[p] - m) / s;
    }
  }
  return y;
}

Tensor ChannelNormalize::backward(const Tensor& dy) {
  Tensor dx(dy.shape());
  const std::int64_t N = dy.dim(0), C = dy.dim(1), HW = dy.dim(2) * dy.dim(3);
  for (std::int64_t n = 0; n < N; ++n) {
    for (std::int64_t c = 0; c < C; ++c) {
      const real_t s = stddev_[static_cast<std::size_t>(c)];
      const real_t* in = dy.data() + (n * C + c) * HW;
      real_t* out = dx.data() + (n * C + c) * HW;
      for (std::int64_t p = 0; p < HW; ++p) out[p] = in[p] / s;
    }
  }
  return dx;
}

}  // namespace mil::nn
