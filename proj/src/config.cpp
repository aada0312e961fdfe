#include "mil/config.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace mil::config {

namespace {

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void RunConfig::merge_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config file not readable: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config parse error in " + path + ": " + e.what());
  }

  try {
    maybe(j, "seed", seed);
    maybe(j, "workers", workers);
    maybe(j, "output_dir", output_dir);
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      maybe(d, "target_size", dataset.target_size);
      maybe(d, "pixel_threshold", dataset.pixel_threshold);
      maybe(d, "manifest", dataset.manifest);
      maybe(d, "raw_images_train", dataset.raw_images_train);
      maybe(d, "raw_masks_train", dataset.raw_masks_train);
      maybe(d, "raw_images_test", dataset.raw_images_test);
      maybe(d, "raw_masks_test", dataset.raw_masks_test);
      maybe(d, "synth_images", dataset.synth_images);
      if (d.contains("meta_class")) {
        const auto& m = d.at("meta_class");
        dataset.meta_class.name = m.at("name").get<std::string>();
        dataset.meta_class.member_class_ids.clear();
        for (int id : m.at("member_class_ids").get<std::vector<int>>())
          dataset.meta_class.member_class_ids.insert(id);
      }
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      maybe(t, "total_epochs", train.total_epochs);
      maybe(t, "frozen_epochs", train.frozen_epochs);
      maybe(t, "bag_size", train.bag_size);
      maybe(t, "patch_size", train.patch_size);
      maybe(t, "train_overlap", train.train_overlap);
      maybe(t, "batch_size", train.batch_size);
      maybe(t, "head_lr", train.head_lr);
      maybe(t, "backbone_lr", train.backbone_lr);
      maybe(t, "oversample", train.oversample);
      maybe(t, "checkpoint_every", train.checkpoint_every);
      maybe(t, "backbone", train.backbone);
      maybe(t, "pretrained_weights", train.pretrained_weights);
      maybe(t, "embed_dim", train.embed_dim);
      maybe(t, "attn_dim", train.attn_dim);
      maybe(t, "preload_images", train.preload_images);
    }
    if (j.contains("inference")) {
      const auto& i = j.at("inference");
      maybe(i, "test_overlap", inference.test_overlap);
      maybe(i, "seg_threshold", inference.seg_threshold);
      maybe(i, "cls_threshold", inference.cls_threshold);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config field error in " + path + ": " + e.what());
  }
}

RunConfig RunConfig::from_file(const std::string& path) {
  RunConfig c;
  c.merge_json_file(path);
  return c;
}

std::string RunConfig::manifest_path() const {
  if (!dataset.manifest.empty()) return dataset.manifest;
  return (std::filesystem::path(output_dir) / "data" / "manifest.tsv").string();
}

std::string RunConfig::checkpoint_path() const {
  return (std::filesystem::path(output_dir) / "checkpoint.milckpt").string();
}

dataset::DatasetConfig RunConfig::dataset_config() const {
  dataset::DatasetConfig c;
  c.target_size = dataset.target_size;
  c.pixel_threshold = dataset.pixel_threshold;
  c.meta_class = dataset.meta_class;
  c.oversample_positives = train.oversample;
  return c;
}

training::TrainConfig RunConfig::train_config() const {
  training::TrainConfig c;
  c.total_epochs = train.total_epochs;
  c.frozen_epochs = train.frozen_epochs;
  c.bag_size = train.bag_size;
  c.patch_size = train.patch_size;
  c.train_overlap = train.train_overlap;
  c.batch_size = train.batch_size;
  c.head_lr = static_cast<real_t>(train.head_lr);
  c.backbone_lr = static_cast<real_t>(train.backbone_lr);
  c.seed = seed;
  c.oversample = train.oversample;
  c.checkpoint_every = train.checkpoint_every;
  return c;
}

model::ModelConfig RunConfig::model_config() const {
  model::ModelConfig c;
  c.backbone.kind = train.backbone;
  c.backbone.pretrained_weights = train.pretrained_weights;
  c.backbone.frozen = train.frozen_epochs > 0;
  c.embed_dim = train.embed_dim;
  c.attn_dim = train.attn_dim;
  c.patch_size = train.patch_size;
  return c;
}

void RunConfig::validate_common() const {
  try {
    dataset_config().validate();
    train_config().validate();
    model_config().validate();
  } catch (const InvalidInputError& e) {
    throw ValidationError(e.what());
  }
  if (workers < 0) throw ValidationError("workers must be >= 0");
  if (dataset.target_size < train.patch_size)
    throw ValidationError("patch_size exceeds target_size");
  if (!(inference.test_overlap >= 0.0 && inference.test_overlap < 1.0))
    throw ValidationError("test_overlap must be in [0, 1)");
  if (!(inference.seg_threshold >= 0.0 && inference.seg_threshold <= 1.0))
    throw ValidationError("seg_threshold must be in [0, 1]");
  if (!(inference.cls_threshold > 0.0 && inference.cls_threshold < 1.0))
    throw ValidationError("cls_threshold must be in (0, 1)");
  if (output_dir.empty()) throw ValidationError("output_dir must not be empty");
}

}  // namespace mil::config
