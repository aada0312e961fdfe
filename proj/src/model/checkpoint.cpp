#include "mil/model/checkpoint.hpp"

#include <json.hpp>

#include "mil/nn/archive.hpp"

namespace mil::model {

namespace {

nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"backbone", c.backbone.kind},
          {"pretrained_weights", c.backbone.pretrained_weights},
          {"embed_dim", c.embed_dim},
          {"attn_dim", c.attn_dim},
          {"patch_size", c.patch_size}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.backbone.kind = j.at("backbone").get<std::string>();
  c.backbone.pretrained_weights = j.value("pretrained_weights", std::string{});
  c.embed_dim = j.at("embed_dim").get<int>();
  c.attn_dim = j.at("attn_dim").get<int>();
  c.patch_size = j.at("patch_size").get<int>();
  return c;
}

}  // namespace

void save_checkpoint(const std::string& path, MilModel& model, const nn::Adam* optimizer,
                     std::int64_t epoch) {
  nn::TensorArchive ar;
  ar.meta = {{"kind", "mil-checkpoint"},
             {"epoch", epoch},
             {"model", config_to_json(model.config())},
             {"has_optimizer", optimizer != nullptr}};
  for (nn::Param* p : model.all_params()) ar.add(p->name, p->value);
  for (const nn::NamedBuffer& b : model.buffers()) ar.add(b.name, *b.tensor);
  if (optimizer) {
    ar.meta["optimizer_step"] = optimizer->step_count();
    for (const auto& ref : const_cast<nn::Adam*>(optimizer)->moments()) {
      ar.add("adam.m." + ref.param->name, *ref.m);
      ar.add("adam.v." + ref.param->name, *ref.v);
    }
  }
  ar.save(path);
}

CheckpointInfo peek_checkpoint(const std::string& path) {
  const nlohmann::json meta = nn::TensorArchive::peek_meta(path);
  if (meta.value("kind", std::string{}) != "mil-checkpoint")
    throw IoError("not a checkpoint: " + path);
  CheckpointInfo info;
  info.config = config_from_json(meta.at("model"));
  info.epoch = meta.at("epoch").get<std::int64_t>();
  info.has_optimizer = meta.value("has_optimizer", false);
  return info;
}

std::unique_ptr<MilModel> load_model(const std::string& path, CheckpointInfo* info_out) {
  const nn::TensorArchive ar = nn::TensorArchive::load(path);
  if (ar.meta.value("kind", std::string{}) != "mil-checkpoint")
    throw IoError("not a checkpoint: " + path);
  CheckpointInfo info;
  info.config = config_from_json(ar.meta.at("model"));
  info.epoch = ar.meta.at("epoch").get<std::int64_t>();
  info.has_optimizer = ar.meta.value("has_optimizer", false);

  std::unique_ptr<MilModel> model = MilModel::skeleton(info.config);
  for (nn::Param* p : model->all_params()) {
    const Tensor& t = ar.get(p->name);
    if (t.numel() != p->value.numel())
      throw IoError("checkpoint: size mismatch for '" + p->name + "' in " + path);
    p->value.vec() = t.vec();
  }
  for (const nn::NamedBuffer& b : model->buffers()) {
    const Tensor& t = ar.get(b.name);
    if (t.numel() != b.tensor->numel())
      throw IoError("checkpoint: size mismatch for '" + b.name + "' in " + path);
    b.tensor->vec() = t.vec();
  }
  if (info_out) *info_out = info;
  return model;
}

void load_optimizer(const std::string& path, nn::Adam& optimizer) {
  const nn::TensorArchive ar = nn::TensorArchive::load(path);
  if (!ar.meta.value("has_optimizer", false))
    throw IoError("checkpoint has no optimizer state: " + path);
  for (const auto& ref : optimizer.moments()) {
    const Tensor& m = ar.get("adam.m." + ref.param->name);
    const Tensor& v = ar.get("adam.v." + ref.param->name);
    if (m.numel() != ref.m->numel() || v.numel() != ref.v->numel())
      throw IoError("checkpoint: optimizer shape mismatch for '" + ref.param->name + "'");
    ref.m->vec() = m.vec();
    ref.v->vec() = v.vec();
  }
  optimizer.restore_step_count(ar.meta.at("optimizer_step").get<std::int64_t>());
}

}  // namespace mil::model
