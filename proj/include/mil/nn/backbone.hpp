#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mil/nn/layers.hpp"

namespace mil::nn {

inline constexpr const char* kBackboneSmallCnn = "small-cnn";
inline constexpr const char* kBackboneResNet34 = "resnet34-pretrained";

struct BackboneConfig {
  std::string kind = kBackboneSmallCnn;
  bool frozen = false;
  // Archive of pretrained tensors; required when kind is resnet34-pretrained.
  std::string pretrained_weights;
};

/// Per-patch feature extractor: (K, 3, d, d) -> (K, F).
class Backbone {
 public:
  virtual ~Backbone() = default;
  virtual Tensor forward(const Tensor& patches, bool train) = 0;
  /// Accumulates parameter gradients from the feature gradient (K, F).
  virtual void backward(const Tensor& dfeatures) = 0;
  virtual int feature_dim() const = 0;
  virtual const std::string& kind() const = 0;
  virtual void collect_params(std::vector<Param*>& out) = 0;
  virtual void collect_buffers(std::vector<NamedBuffer>& out) = 0;
};

/// Three conv/pool blocks and a global average pool; inputs are raw [0,1]
/// patches with side >= 8. Feature width 96.
std::unique_ptr<Backbone> make_small_cnn(rng::Engine& init_rng);

/// Standard 34-layer residual network to a 512-wide pooled feature, with the
/// usual channel statistics applied to the [0,1] inputs. Weights come from
/// `pretrained_weights` (see tools/convert_resnet34_weights.py).
std::unique_ptr<Backbone> make_resnet34(const std::string& pretrained_weights);

std::unique_ptr<Backbone> make_backbone(const BackboneConfig& config, rng::Engine& init_rng);

/// Structure-only construction with random weights, for loaders that will
/// overwrite every tensor from a checkpoint.
std::unique_ptr<Backbone> make_backbone_skeleton(const std::string& kind, rng::Engine& init_rng);

}  // namespace mil::nn
