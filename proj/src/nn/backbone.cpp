#include "mil/nn/backbone.hpp"

#include <optional>

#include "mil/nn/archive.hpp"

namespace mil::nn {

namespace {

// ---- small-cnn ----

class SmallCnn : public Backbone {
 public:
  explicit SmallCnn(rng::Engine& eng) : kind_(kBackboneSmallCnn) {
    auto add_block = [&](const std::string& name, int in_c, int out_c) {
      auto conv = std::make_unique<Conv2d>(name, in_c, out_c, 3, 1, 1, true);
      conv->init(eng);
      layers_.push_back(std::move(conv));
      layers_.push_back(std::make_unique<ReLU>());
      layers_.push_back(std::make_unique<MaxPool2d>(2, 2));
    };
    add_block("backbone.conv1", 3, 24);
    add_block("backbone.conv2", 24, 48);
    add_block("backbone.conv3", 48, 96);
    layers_.push_back(std::make_unique<GlobalAvgPool>());
  }

  Tensor forward(const Tensor& patches, bool train) override {
    if (patches.rank() != 4 || patches.dim(1) != 3 || patches.dim(2) < 8 || patches.dim(3) < 8)
      throw InvalidInputError("small-cnn: patches must be (K,3,d,d) with d >= 8, got " +
                              patches.shape_str());
    Tensor x = patches;
    for (auto& layer : layers_) x = layer->forward(x, train);
    return x;
  }

  void backward(const Tensor& dfeatures) override {
    Tensor g = dfeatures;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  }

  int feature_dim() const override { return 96; }
  const std::string& kind() const override { return kind_; }

  void collect_params(std::vector<Param*>& out) override {
    for (auto& layer : layers_) layer->collect_params(out);
  }
  void collect_buffers(std::vector<NamedBuffer>& out) override {
    for (auto& layer : layers_) layer->collect_buffers(out);
  }

 private:
  std::string kind_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

// ---- resnet-34 ----

struct BasicBlock {
  Conv2d conv1;
  BatchNorm2d bn1;
  ReLU relu1;
  Conv2d conv2;
  BatchNorm2d bn2;
  std::optional<Conv2d> down_conv;
  std::optional<BatchNorm2d> down_bn;
  ReLU relu_out;

  BasicBlock(const std::string& name, int in_c, int out_c, int stride)
      : conv1(name + ".conv1", in_c, out_c, 3, stride, 1, false),
        bn1(name + ".bn1", out_c),
        conv2(name + ".conv2", out_c, out_c, 3, 1, 1, false),
        bn2(name + ".bn2", out_c) {
    if (stride != 1 || in_c != out_c) {
      down_conv.emplace(name + ".downsample.conv", in_c, out_c, 1, stride, 0, false);
      down_bn.emplace(name + ".downsample.bn", out_c);
    }
  }

  Tensor forward(const Tensor& x, bool train) {
    Tensor main = bn2.forward(conv2.forward(relu1.forward(bn1.forward(conv1.forward(x, train), train), train), train), train);
    Tensor skip = down_conv ? down_bn->forward(down_conv->forward(x, train), train) : x;
    for (std::int64_t i = 0; i < main.numel(); ++i) main[i] += skip[i];
    return relu_out.forward(main, train);
  }

  Tensor backward(const Tensor& dy) {
    const Tensor d = relu_out.backward(dy);
    Tensor dx_main = conv1.backward(bn1.backward(relu1.backward(conv2.backward(bn2.backward(d)))));
    if (down_conv) {
      const Tensor dx_skip = down_conv->backward(down_bn->backward(d));
      for (std::int64_t i = 0; i < dx_main.numel(); ++i) dx_main[i] += dx_skip[i];
    } else {
      for (std::int64_t i = 0; i < dx_main.numel(); ++i) dx_main[i] += d[i];
    }
    return dx_main;
  }

  void collect_params(std::vector<Param*>& out) {
    conv1.collect_params(out);
    bn1.collect_params(out);
    conv2.collect_params(out);
    bn2.collect_params(out);
    if (down_conv) down_conv->collect_params(out);
    if (down_bn) down_bn->collect_params(out);
  }
  void collect_buffers(std::vector<NamedBuffer>& out) {
    bn1.collect_buffers(out);
    bn2.collect_buffers(out);
    if (down_bn) down_bn->collect_buffers(out);
  }
};

class ResNet34 : public Backbone {
 public:
  ResNet34()
      : kind_(kBackboneResNet34),
        normalize_({0.485, 0.456, 0.406}, {0.229, 0.224, 0.225}),
        conv1_("backbone.conv1", 3, 64, 7, 2, 3, false),
        bn1_("backbone.bn1", 64),
        maxpool_(3, 2, 1) {
    const int counts[4] = {3, 4, 6, 3};
    const int widths[4] = {64, 128, 256, 512};
    int in_c = 64;
    for (int stage = 0; stage < 4; ++stage) {
      for (int b = 0; b < counts[stage]; ++b) {
        const int stride = (stage > 0 && b == 0) ? 2 : 1;
        blocks_.emplace_back("backbone.layer" + std::to_string(stage + 1) + "." +
                                 std::to_string(b),
                             in_c, widths[stage], stride);
        in_c = widths[stage];
      }
    }
  }

  void init_random(rng::Engine& eng) {
    std::vector<Param*> params;
    collect_params(params);
    for (Param* p : params) {
      if (p->name.find(".bn") != std::string::npos ||
          p->name.find("downsample.bn") != std::string::npos)
        continue;  // keep batch-norm at identity
      const real_t fan_in = static_cast<real_t>(p->value.numel() / p->value.dim(0));
      const real_t std = std::sqrt(real_t{2} / fan_in);
      for (auto& v : p->value.vec()) v = rng::normal(eng, 0.0, std);
    }
  }

  void load_weights(const TensorArchive& archive) {
    std::vector<Param*> params;
    collect_params(params);
    for (Param* p : params) {
      const Tensor& t = archive.get(p->name);
      if (t.numel() != p->value.numel())
        throw IoError("weights: size mismatch for '" + p->name + "'");
      p->value.vec() = t.vec();
    }
    std::vector<NamedBuffer> buffers;
    collect_buffers(buffers);
    for (const NamedBuffer& b : buffers) {
      const Tensor& t = archive.get(b.name);
      if (t.numel() != b.tensor->numel())
        throw IoError("weights: size mismatch for '" + b.name + "'");
      b.tensor->vec() = t.vec();
    }
  }

  Tensor forward(const Tensor& patches, bool train) override {
    if (patches.rank() != 4 || patches.dim(1) != 3 || patches.dim(2) < 32 || patches.dim(3) < 32)
      throw InvalidInputError("resnet34: patches must be (K,3,d,d) with d >= 32, got " +
                              patches.shape_str());
    Tensor x = normalize_.forward(patches, train);
    x = maxpool_.forward(relu1_.forward(bn1_.forward(conv1_.forward(x, train), train), train),
                         train);
    for (auto& block : blocks_) x = block.forward(x, train);
    return gap_.forward(x, train);
  }

  void backward(const Tensor& dfeatures) override {
    Tensor g = gap_.backward(dfeatures);
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) g = it->backward(g);
    g = conv1_.backward(bn1_.backward(relu1_.backward(maxpool_.backward(g))));
  }

  int feature_dim() const override { return 512; }
  const std::string& kind() const override { return kind_; }

  void collect_params(std::vector<Param*>& out) override {
    conv1_.collect_params(out);
    bn1_.collect_params(out);
    for (auto& b : blocks_) b.collect_params(out);
  }
  void collect_buffers(std::vector<NamedBuffer>& out) override {
    bn1_.collect_buffers(out);
    for (auto& b : blocks_) b.collect_buffers(out);
  }

 private:
  std::string kind_;
  ChannelNormalize normalize_;
  Conv2d conv1_;
  BatchNorm2d bn1_;
  ReLU relu1_;
  MaxPool2d maxpool_;
  std::vector<BasicBlock> blocks_;
  GlobalAvgPool gap_;
};

}  // namespace

std::unique_ptr<Backbone> make_small_cnn(rng::Engine& init_rng) {
  return std::make_unique<SmallCnn>(init_rng);
}

std::unique_ptr<Backbone> make_resnet34(const std::string& pretrained_weights) {
  if (pretrained_weights.empty())
    throw InvalidInputError(
        "resnet34-pretrained requires a pretrained weights archive "
        "(train.pretrained_weights)");
  auto net = std::make_unique<ResNet34>();
  net->load_weights(TensorArchive::load(pretrained_weights));
  return net;
}

std::unique_ptr<Backbone> make_backbone(const BackboneConfig& config, rng::Engine& init_rng) {
  if (config.kind == kBackboneSmallCnn) return make_small_cnn(init_rng);
  if (config.kind == kBackboneResNet34) return make_resnet34(config.pretrained_weights);
  throw InvalidInputError("unknown backbone kind '" + config.kind + "'");
}

std::unique_ptr<Backbone> make_backbone_skeleton(const std::string& kind, rng::Engine& init_rng) {
  if (kind == kBackboneSmallCnn) return make_small_cnn(init_rng);
  if (kind == kBackboneResNet34) {
    auto net = std::make_unique<ResNet34>();
    net->init_random(init_rng);
    return net;
  }
  throw InvalidInputError("unknown backbone kind '" + kind + "'");
}

}  // namespace mil::nn
