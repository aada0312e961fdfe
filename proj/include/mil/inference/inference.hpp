#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mil/dataset/dataset.hpp"
#include "mil/model/model.hpp"
#include "mil/patchbag/patchbag.hpp"

namespace mil::inference {

struct Prediction {
  std::string image_id;
  real_t probability = 0;
  bool positive = false;     // probability >= threshold
  real_t threshold = 0.5;
};

/// Attention field over the image: per-pixel mean of the attention weights
/// of all covering patches, rescaled so the maximum is 1. Pixels no patch
/// covers stay 0.
struct Heatmap {
  int size = 0;  // D
  std::vector<real_t> values;
  std::vector<std::int32_t> coverage;
  std::optional<BinaryMask> segmentation;
  real_t seg_threshold = 0.3;

  real_t at(int y, int x) const { return values[static_cast<std::size_t>(y) * size + x]; }
};

struct InferenceResult {
  Prediction prediction;
  model::AttentionOutput attention;
  std::vector<patchbag::Origin> origins;
};

/// Dense-bag forward pass and thresholded class decision.
InferenceResult predict(const dataset::ImageRecord& record, model::MilModel& model,
                        const patchbag::GridSpec& dense_spec, real_t cls_threshold = 0.5);

/// Spreads each weight over its patch footprint, averages per pixel by
/// coverage, and max-normalizes onto [0,1]. Weights must sum to 1.
Heatmap accumulate_heatmap(const std::vector<real_t>& weights,
                           const std::vector<patchbag::Origin>& origins,
                           const patchbag::GridSpec& spec);

/// Binary mask of values >= a. a must lie in [0,1].
BinaryMask segment(const Heatmap& heatmap, real_t a);

struct ExportPaths {
  std::string heatmap_png;
  std::string segmentation_png;
  std::string sidecar_json;
};

/// Writes <id>.heat.png (16-bit gray, value = round(65535*v)), <id>.seg.png
/// (1-bit), and <id>.meta.json with the prediction and grid parameters.
/// Uses heatmap.segmentation if present, else thresholds at seg_threshold.
ExportPaths export_outputs(const Prediction& prediction, const Heatmap& heatmap,
                           const patchbag::GridSpec& spec, const std::string& out_dir);

}  // namespace mil::inference
