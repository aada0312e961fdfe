#pragma once

#include <cstdint>
#include <string>

#include "mil/dataset/dataset.hpp"
#include "mil/model/model.hpp"
#include "mil/training/training.hpp"

namespace mil::config {

/// Declarative run configuration: one JSON file with dataset, train and
/// inference sections; command-line flags override individual fields.
struct RunConfig {
  std::uint64_t seed = 7;
  int workers = 0;  // 0 = all hardware threads
  std::string output_dir = "runs/default";

  struct DatasetSection {
    int target_size = 512;
    std::int64_t pixel_threshold = 20000;
    dataset::MetaClassMap meta_class{"SyntheticTarget", {1}};
    std::string manifest;  // defaults to <output_dir>/data/manifest.tsv
    std::string raw_images_train;
    std::string raw_masks_train;
    std::string raw_images_test;
    std::string raw_masks_test;
    int synth_images = 400;
  } dataset;

  struct TrainSection {
    int total_epochs = 130;
    int frozen_epochs = 50;
    int bag_size = 50;
    int patch_size = 64;
    double train_overlap = 0.75;
    int batch_size = 8;
    double head_lr = 1e-4;
    double backbone_lr = 1e-5;
    bool oversample = true;
    int checkpoint_every = 10;
    std::string backbone = "resnet34-pretrained";
    std::string pretrained_weights;
    int embed_dim = 128;
    int attn_dim = 128;
    bool preload_images = true;
  } train;

  struct InferenceSection {
    double test_overlap = 0.875;
    double seg_threshold = 0.3;
    double cls_threshold = 0.5;
  } inference;

  static RunConfig from_file(const std::string& path);
  void merge_json_file(const std::string& path);

  std::string manifest_path() const;
  std::string checkpoint_path() const;

  dataset::DatasetConfig dataset_config() const;
  training::TrainConfig train_config() const;
  model::ModelConfig model_config() const;

  /// Shared numeric/shape validation; throws ValidationError.
  void validate_common() const;
};

}  // namespace mil::config
