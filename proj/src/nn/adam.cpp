#include "mil/nn/adam.hpp"

#include <cmath>

namespace mil::nn {

Adam::Adam(std::vector<Group> groups, real_t beta1, real_t beta2, real_t eps)
    : groups_(std::move(groups)), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.resize(groups_.size());
  v_.resize(groups_.size());
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    for (Param* p : groups_[g].params) {
      m_[g].emplace_back(p->value.shape());
      v_[g].emplace_back(p->value.shape());
    }
  }
}

void Adam::step() {
  ++t_;
  const real_t bc1 = 1 - std::pow(beta1_, static_cast<real_t>(t_));
  const real_t bc2 = 1 - std::pow(beta2_, static_cast<real_t>(t_));
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const real_t lr = groups_[g].lr;
    for (std::size_t i = 0; i < groups_[g].params.size(); ++i) {
      Param* p = groups_[g].params[i];
      Tensor& m = m_[g][i];
      Tensor& v = v_[g][i];
      const std::int64_t n = p->value.numel();
      for (std::int64_t j = 0; j < n; ++j) {
        const real_t grad = p->grad[j];
        m[j] = beta1_ * m[j] + (1 - beta1_) * grad;
        v[j] = beta2_ * v[j] + (1 - beta2_) * grad * grad;
        const real_t mhat = m[j] / bc1;
        const real_t vhat = v[j] / bc2;
        p->value[j] -= lr * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }
}

std::vector<Adam::MomentRef> Adam::moments() {
  std::vector<MomentRef> out;
  for (std::size_t g = 0; g < groups_.size(); ++g)
    for (std::size_t i = 0; i < groups_[g].params.size(); ++i)
      out.push_back({groups_[g].params[i], &m_[g][i], &v_[g][i]});
  return out;
}

}  // namespace mil::nn
