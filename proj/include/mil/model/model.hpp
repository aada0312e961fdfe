#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mil/nn/backbone.hpp"
#include "mil/patchbag/patchbag.hpp"
#include "mil/tensor.hpp"

namespace mil::model {

/// Attention weights, bag embedding and classifier output for one bag.
struct AttentionOutput {
  std::vector<real_t> weights;  // a_k, non-negative, sums to 1
  std::vector<real_t> z;        // bag embedding, M entries
  real_t logit = 0;
  real_t probability = 0.5;
};

inline real_t sigmoid(real_t x) {
  return x >= 0 ? real_t{1} / (real_t{1} + std::exp(-x))
                : std::exp(x) / (real_t{1} + std::exp(x));
}

/// Numerically stable softmax. Throws NumericError on non-finite scores.
std::vector<real_t> softmax(const std::vector<real_t>& scores);

/// Pre-softmax attention scores s_k = w^T tanh(V h_k) for H (K x M),
/// V (L x M), w (L).
std::vector<real_t> attention_scores(const Tensor& h, const Tensor& v, const Tensor& w);

/// Softmax-normalized attention weights over the bag.
std::vector<real_t> attention_weights(const Tensor& h, const Tensor& v, const Tensor& w);

/// z = sum_k a_k h_k. weights must have one entry per row of H and sum to 1.
std::vector<real_t> pool_embedding(const Tensor& h, const std::vector<real_t>& weights);

/// Affine classifier logit = c^T z + b and its sigmoid probability.
std::pair<real_t, real_t> classify(const std::vector<real_t>& z, const Tensor& cls_weight,
                                   real_t cls_bias);

struct ModelConfig {
  nn::BackboneConfig backbone;
  int embed_dim = 128;  // M
  int attn_dim = 128;   // L
  int patch_size = 64;  // d

  void validate() const;
};

/// The bag classifier: per-patch backbone features, affine projection to the
/// embedding width, attention pooling, and a single-logit head.
class MilModel {
 public:
  MilModel(ModelConfig config, std::uint64_t init_seed);

  /// Constructs a model whose tensors will all be overwritten by a
  /// checkpoint; skips the pretrained-weights requirement.
  static std::unique_ptr<MilModel> skeleton(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  /// Per-patch embeddings H (K x M). train=true caches for backward.
  Tensor extract_features(const Tensor& patches, bool train);

  /// Full forward pass caching intermediates; backward(dlogit) consumes them.
  AttentionOutput forward_train(const patchbag::PatchBag& bag);

  /// Cache-free forward; features are computed in chunks so dense bags do
  /// not materialize large activation sets.
  AttentionOutput forward_eval(const patchbag::PatchBag& bag, std::int64_t chunk = 256);

  /// Accumulates gradients for d(loss)/d(logit). Backbone gradients are
  /// skipped while frozen.
  void backward(real_t dlogit);

  void zero_grad();

  void set_frozen(bool frozen) { frozen_ = frozen; }
  bool frozen() const { return frozen_; }

  /// Projection + attention + classifier parameters.
  std::vector<nn::Param*> head_params();
  std::vector<nn::Param*> backbone_params();
  std::vector<nn::Param*> all_params();
  std::vector<nn::NamedBuffer> buffers();

  nn::Backbone& backbone() { return *backbone_; }

 private:
  ModelConfig config_;
  std::unique_ptr<nn::Backbone> backbone_;
  nn::Linear projection_;
  nn::Param attn_v_;       // L x M
  nn::Param attn_w_;       // L
  nn::Param cls_weight_;   // M
  nn::Param cls_bias_;     // 1
  bool frozen_ = false;

  // caches from forward_train
  Tensor h_;                      // K x M
  Tensor tanh_u_;                 // K x L
  std::vector<real_t> weights_;   // K
  std::vector<real_t> z_;         // M
  bool have_cache_ = false;

  MilModel(ModelConfig config, std::unique_ptr<nn::Backbone> backbone, std::uint64_t head_seed);
  void init_head(std::uint64_t seed);
  AttentionOutput attend_and_classify(const Tensor& h, bool cache);
};

}  // namespace mil::model
