#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mil/kernels/batchnorm.hpp"
#include "mil/kernels/conv.hpp"
#include "mil/kernels/pool.hpp"
#include "mil/rng.hpp"
#include "mil/tensor.hpp"

namespace mil::nn {

/// A trainable tensor with its gradient accumulator.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  explicit Param(std::string n, std::vector<std::int64_t> shape)
      : name(std::move(n)), value(shape), grad(std::move(shape)) {}

  void zero_grad() { grad.zero(); }
};

/// Non-trainable state that still belongs in checkpoints (e.g. running
/// batch-norm statistics).
struct NamedBuffer {
  std::string name;
  Tensor* tensor;
};

/// Stateful layer: forward(train=true) caches what backward needs;
/// forward(train=false) is cache-free. backward accumulates parameter
/// gradients and returns the input gradient.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, bool train) = 0;
  virtual Tensor backward(const Tensor& dy) = 0;
  virtual void collect_params(std::vector<Param*>&) {}
  virtual void collect_buffers(std::vector<NamedBuffer>&) {}
};

class Conv2d : public Layer {
 public:
  Conv2d(std::string name, int in_c, int out_c, int ksize, int stride, int pad, bool bias);

  void init(rng::Engine& eng);  // He-normal weights, zero bias
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
  void collect_params(std::vector<Param*>& out) override;

  const kernels::ConvGeom& geom() const { return geom_; }
  Param& weight() { return weight_; }

 private:
  kernels::ConvGeom geom_;
  Param weight_;
  Param bias_;
  bool has_bias_;
  Tensor cols_cache_;
  std::vector<std::int64_t> in_shape_;
};

class Linear : public Layer {
 public:
  Linear(std::string name, int in_dim, int out_dim);

  void init(rng::Engine& eng);
  Tensor forward(const Tensor& x, bool train) override;  // (N,in) -> (N,out)
  Tensor backward(const Tensor& dy) override;
  void collect_params(std::vector<Param*>& out) override;

  Param& weight() { return weight_; }
  Param& bias() { return bias_; }

 private:
  Param weight_;  // out x in
  Param bias_;    // out
  Tensor input_;
};

class ReLU : public Layer {
 public:
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;

 private:
  Tensor input_;
};

class MaxPool2d : public Layer {
 public:
  MaxPool2d(int ksize, int stride, int pad = 0) : geom_{ksize, stride, pad} {}

  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;

 private:
  kernels::PoolGeom geom_;
  std::vector<std::int64_t> argmax_;
  std::vector<std::int64_t> in_shape_;
};

class GlobalAvgPool : public Layer {
 public:
  Tensor forward(const Tensor& x, bool train) override;  // (N,C,H,W) -> (N,C)
  Tensor backward(const Tensor& dy) override;

 private:
  std::vector<std::int64_t> in_shape_;
};

class BatchNorm2d : public Layer {
 public:
  BatchNorm2d(std::string name, int channels, real_t eps = 1e-5, real_t momentum = 0.1);

  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
  void collect_params(std::vector<Param*>& out) override;
  void collect_buffers(std::vector<NamedBuffer>& out) override;

 private:
  std::string name_;
  Param gamma_;
  Param beta_;
  Tensor running_mean_;
  Tensor running_var_;
  real_t eps_;
  real_t momentum_;
  kernels::BnCache cache_;
};

/// Fixed per-channel (x - mean) / std, used in front of pretrained stacks.
class ChannelNormalize : public Layer {
 public:
  ChannelNormalize(std::vector<real_t> mean, std::vector<real_t> stddev)
      : mean_(std::move(mean)), stddev_(std::move(stddev)) {}

  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;

 private:
  std::vector<real_t> mean_;
  std::vector<real_t> stddev_;
};

}  // namespace mil::nn
