#pragma once

#include <cstdint>
#include <vector>

#include "mil/nn/layers.hpp"

namespace mil::nn {

/// Adam with parameter groups (one learning rate per group) and bias
/// correction. Moments live alongside the referenced params so the whole
/// state round-trips through checkpoints.
class Adam {
 public:
  struct Group {
    std::vector<Param*> params;
    real_t lr = 1e-4;
  };

  explicit Adam(std::vector<Group> groups, real_t beta1 = 0.9, real_t beta2 = 0.999,
                real_t eps = 1e-8);

  void step();

  void set_lr(std::size_t group, real_t lr) { groups_[group].lr = lr; }
  real_t lr(std::size_t group) const { return groups_[group].lr; }
  std::int64_t step_count() const { return t_; }

  // checkpoint plumbing
  struct MomentRef {
    const Param* param;
    Tensor* m;
    Tensor* v;
  };
  std::vector<MomentRef> moments();
  void restore_step_count(std::int64_t t) { t_ = t; }

 private:
  std::vector<Group> groups_;
  std::vector<std::vector<Tensor>> m_;
  std::vector<std::vector<Tensor>> v_;
  real_t beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
};

}  // namespace mil::nn
