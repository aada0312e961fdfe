#include "mil/model/model.hpp"

#include <algorithm>
#include <cmath>

#include "mil/kernels/elementwise.hpp"
#include "mil/kernels/gemm.hpp"

namespace mil::model {

std::vector<real_t> softmax(const std::vector<real_t>& scores) {
  if (scores.empty()) throw InvalidInputError("softmax: empty scores");
  for (real_t s : scores)
    if (!std::isfinite(s)) throw NumericError("softmax: non-finite attention score");
  const real_t max = *std::max_element(scores.begin(), scores.end());
  std::vector<real_t> out(scores.size());
  real_t sum = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - max);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

std::vector<real_t> attention_scores(const Tensor& h, const Tensor& v, const Tensor& w) {
  if (h.rank() != 2 || v.rank() != 2 || h.dim(1) != v.dim(1) || v.dim(0) != w.numel())
    throw InvalidInputError("attention: inconsistent shapes H" + h.shape_str() + " V" +
                            v.shape_str());
  const std::int64_t k = h.dim(0), l = v.dim(0), m = h.dim(1);
  Tensor u({k, l});
  kernels::gemm_nt(k, l, m, h.data(), v.data(), u.data());
  kernels::tanh_forward(u.data(), u.data(), u.numel());
  std::vector<real_t> scores(static_cast<std::size_t>(k));
  for (std::int64_t i = 0; i < k; ++i) {
    real_t acc = 0;
    for (std::int64_t j = 0; j < l; ++j) acc += w[j] * u(i, j);
    scores[static_cast<std::size_t>(i)] = acc;
  }
  return scores;
}

std::vector<real_t> attention_weights(const Tensor& h, const Tensor& v, const Tensor& w) {
  return softmax(attention_scores(h, v, w));
}

std::vector<real_t> pool_embedding(const Tensor& h, const std::vector<real_t>& weights) {
  if (h.rank() != 2 || static_cast<std::int64_t>(weights.size()) != h.dim(0))
    throw InvalidInputError("pool_embedding: weight count does not match bag size");
  const std::int64_t k = h.dim(0), m = h.dim(1);
  std::vector<real_t> z(static_cast<std::size_t>(m), 0);
  for (std::int64_t i = 0; i < k; ++i) {
    const real_t a = weights[static_cast<std::size_t>(i)];
    const real_t* row = h.data() + i * m;
    for (std::int64_t j = 0; j < m; ++j) z[static_cast<std::size_t>(j)] += a * row[j];
  }
  return z;
}

std::pair<real_t, real_t> classify(const std::vector<real_t>& z, const Tensor& cls_weight,
                                   real_t cls_bias) {
  if (static_cast<std::int64_t>(z.size()) != cls_weight.numel())
    throw InvalidInputError("classify: embedding width mismatch");
  real_t logit = cls_bias;
  for (std::size_t j = 0; j < z.size(); ++j) logit += cls_weight[static_cast<std::int64_t>(j)] * z[j];
  if (!std::isfinite(logit)) throw NumericError("classify: non-finite logit");
  return {logit, sigmoid(logit)};
}

void ModelConfig::validate() const {
  if (embed_dim < 1) throw InvalidInputError("model: embed_dim must be >= 1");
  if (attn_dim < 1) throw InvalidInputError("model: attn_dim must be >= 1");
  if (patch_size < 1) throw InvalidInputError("model: patch_size must be >= 1");
  if (backbone.kind != nn::kBackboneSmallCnn && backbone.kind != nn::kBackboneResNet34)
    throw InvalidInputError("model: unknown backbone kind '" + backbone.kind + "'");
}

namespace {

std::unique_ptr<nn::Backbone> build_backbone(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  rng::Engine eng = rng::make_engine(rng::derive_seed(seed, 0, "backbone"));
  return nn::make_backbone(config.backbone, eng);
}

}  // namespace

MilModel::MilModel(ModelConfig config, std::uint64_t init_seed)
    : MilModel(config, build_backbone(config, init_seed), init_seed) {}

MilModel::MilModel(ModelConfig config, std::unique_ptr<nn::Backbone> backbone,
                   std::uint64_t head_seed)
    : config_(std::move(config)),
      backbone_(std::move(backbone)),
      projection_("projection", backbone_->feature_dim(), config_.embed_dim),
      attn_v_("attention.V", {config_.attn_dim, config_.embed_dim}),
      attn_w_("attention.w", {config_.attn_dim}),
      cls_weight_("classifier.weight", {config_.embed_dim}),
      cls_bias_("classifier.bias", {1}) {
  config_.validate();
  frozen_ = config_.backbone.frozen;
  init_head(head_seed);
}

std::unique_ptr<MilModel> MilModel::skeleton(const ModelConfig& config) {
  config.validate();
  rng::Engine eng = rng::make_engine(0);
  auto backbone = nn::make_backbone_skeleton(config.backbone.kind, eng);
  return std::unique_ptr<MilModel>(new MilModel(config, std::move(backbone), 0));
}

void MilModel::init_head(std::uint64_t seed) {
  rng::Engine eng = rng::make_engine(rng::derive_seed(seed, 0, "head"));
  projection_.init(eng);
  const real_t v_std = std::sqrt(real_t{1} / static_cast<real_t>(config_.embed_dim));
  for (auto& v : attn_v_.value.vec()) v = rng::normal(eng, 0.0, v_std);
  const real_t w_std = std::sqrt(real_t{1} / static_cast<real_t>(config_.attn_dim));
  for (auto& v : attn_w_.value.vec()) v = rng::normal(eng, 0.0, w_std);
  const real_t c_std = std::sqrt(real_t{1} / static_cast<real_t>(config_.embed_dim));
  for (auto& v : cls_weight_.value.vec()) v = rng::normal(eng, 0.0, c_std);
  cls_bias_.value.zero();
}

Tensor MilModel::extract_features(const Tensor& patches, bool train) {
  if (patches.rank() != 4 || patches.dim(1) != 3 || patches.dim(2) != config_.patch_size ||
      patches.dim(3) != config_.patch_size)
    throw InvalidInputError("extract_features: expected (K,3," +
                            std::to_string(config_.patch_size) + "," +
                            std::to_string(config_.patch_size) + "), got " + patches.shape_str());
  // frozen backbone runs in inference mode: no gradients, no stat updates
  Tensor features = backbone_->forward(patches, train && !frozen_);
  return projection_.forward(features, train);
}

AttentionOutput MilModel::attend_and_classify(const Tensor& h, bool cache) {
  std::vector<real_t> scores = attention_scores(h, attn_v_.value, attn_w_.value);
  std::vector<real_t> a = softmax(scores);
  std::vector<real_t> z = pool_embedding(h, a);
  auto [logit, prob] = classify(z, cls_weight_.value, cls_bias_.value[0]);

  if (cache) {
    const std::int64_t k = h.dim(0), l = config_.attn_dim, m = config_.embed_dim;
    h_ = h;
    tanh_u_ = Tensor({k, l});
    kernels::gemm_nt(k, l, m, h.data(), attn_v_.value.data(), tanh_u_.data());
    kernels::tanh_forward(tanh_u_.data(), tanh_u_.data(), tanh_u_.numel());
    weights_ = a;
    z_ = z;
    have_cache_ = true;
  }

  AttentionOutput out;
  out.weights = std::move(a);
  out.z = std::move(z);
  out.logit = logit;
  out.probability = prob;
  return out;
}

AttentionOutput MilModel::forward_train(const patchbag::PatchBag& bag) {
  if (bag.size() < 1) throw InvalidInputError("forward: empty bag");
  const Tensor h = extract_features(bag.patches, true);
  return attend_and_classify(h, true);
}

AttentionOutput MilModel::forward_eval(const patchbag::PatchBag& bag, std::int64_t chunk) {
  const std::int64_t k = bag.size();
  if (k < 1) throw InvalidInputError("forward: empty bag");
  if (chunk < 1) chunk = k;
  const int d = config_.patch_size;
  const std::int64_t patch_len = 3LL * d * d;

  Tensor h({k, config_.embed_dim});
  for (std::int64_t start = 0; start < k; start += chunk) {
    const std::int64_t n = std::min<std::int64_t>(chunk, k - start);
    Tensor slice({n, 3, d, d});
    std::copy(bag.patches.data() + start * patch_len,
              bag.patches.data() + (start + n) * patch_len, slice.data());
    const Tensor hs = extract_features(slice, false);
    std::copy(hs.data(), hs.data() + hs.numel(), h.data() + start * config_.embed_dim);
  }
  return attend_and_classify(h, false);
}

void MilModel::backward(real_t dlogit) {
  if (!have_cache_) throw InvalidInputError("backward: no cached forward pass");
  const std::int64_t k = h_.dim(0), l = config_.attn_dim, m = config_.embed_dim;

  // classifier: logit = c . z + b
  for (std::int64_t j = 0; j < m; ++j) cls_weight_.grad[j] += dlogit * z_[static_cast<std::size_t>(j)];
  cls_bias_.grad[0] += dlogit;

  // dz, then the two attention paths
  std::vector<real_t> dz(static_cast<std::size_t>(m));
  for (std::int64_t j = 0; j < m; ++j) dz[static_cast<std::size_t>(j)] = dlogit * cls_weight_.value[j];

  // da_k = h_k . dz ; softmax backward to scores
  std::vector<real_t> da(static_cast<std::size_t>(k));
  real_t weighted = 0;
  for (std::int64_t i = 0; i < k; ++i) {
    const real_t* row = h_.data() + i * m;
    real_t acc = 0;
    for (std::int64_t j = 0; j < m; ++j) acc += row[j] * dz[static_cast<std::size_t>(j)];
    da[static_cast<std::size_t>(i)] = acc;
    weighted += weights_[static_cast<std::size_t>(i)] * acc;
  }
  std::vector<real_t> ds(static_cast<std::size_t>(k));
  for (std::int64_t i = 0; i < k; ++i)
    ds[static_cast<std::size_t>(i)] =
        weights_[static_cast<std::size_t>(i)] * (da[static_cast<std::size_t>(i)] - weighted);

  // dw += sum_k ds_k tanh(u_k);  dU_k = ds_k (1 - tanh^2) w
  Tensor du({k, l});
  for (std::int64_t i = 0; i < k; ++i) {
    const real_t dsk = ds[static_cast<std::size_t>(i)];
    const real_t* trow = tanh_u_.data() + i * l;
    real_t* durow = du.data() + i * l;
    for (std::int64_t j = 0; j < l; ++j) {
      attn_w_.grad[j] += dsk * trow[j];
      durow[j] = dsk * (1 - trow[j] * trow[j]) * attn_w_.value[j];
    }
  }

  // dV += dU^T H ; dH = a dz^T + dU V
  kernels::gemm_tn(l, m, k, du.data(), h_.data(), attn_v_.grad.data(), true);
  Tensor dh({k, m});
  kernels::gemm_nn(k, m, l, du.data(), attn_v_.value.data(), dh.data());
  for (std::int64_t i = 0; i < k; ++i) {
    const real_t a = weights_[static_cast<std::size_t>(i)];
    real_t* row = dh.data() + i * m;
    for (std::int64_t j = 0; j < m; ++j) row[j] += a * dz[static_cast<std::size_t>(j)];
  }

  const Tensor dfeatures = projection_.backward(dh);
  if (!frozen_) backbone_->backward(dfeatures);
  have_cache_ = false;
}

void MilModel::zero_grad() {
  for (nn::Param* p : all_params()) p->zero_grad();
}

std::vector<nn::Param*> MilModel::head_params() {
  std::vector<nn::Param*> out;
  projection_.collect_params(out);
  out.push_back(&attn_v_);
  out.push_back(&attn_w_);
  out.push_back(&cls_weight_);
  out.push_back(&cls_bias_);
  return out;
}

std::vector<nn::Param*> MilModel::backbone_params() {
  std::vector<nn::Param*> out;
  backbone_->collect_params(out);
  return out;
}

std::vector<nn::Param*> MilModel::all_params() {
  std::vector<nn::Param*> out = backbone_params();
  for (nn::Param* p : head_params()) out.push_back(p);
  return out;
}

std::vector<nn::NamedBuffer> MilModel::buffers() {
  std::vector<nn::NamedBuffer> out;
  backbone_->collect_buffers(out);
  return out;
}

}  // namespace mil::model
