#include "mil/inference/inference.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mil/image_io.hpp"

namespace mil::inference {

InferenceResult predict(const dataset::ImageRecord& record, model::MilModel& model,
                        const patchbag::GridSpec& dense_spec, real_t cls_threshold) {
  patchbag::PatchBag bag = patchbag::dense_bag(record, dense_spec);
  InferenceResult result;
  result.attention = model.forward_eval(bag);
  result.origins = std::move(bag.origins);
  result.prediction.image_id = record.image_id;
  result.prediction.probability = result.attention.probability;
  result.prediction.threshold = cls_threshold;
  result.prediction.positive = result.attention.probability >= cls_threshold;
  return result;
}

Heatmap accumulate_heatmap(const std::vector<real_t>& weights,
                           const std::vector<patchbag::Origin>& origins,
                           const patchbag::GridSpec& spec) {
  if (weights.empty() || origins.empty())
    throw InvalidInputError("heatmap: empty bag");
  if (weights.size() != origins.size())
    throw InvalidInputError("heatmap: weight/origin count mismatch");
  real_t sum = 0;
  for (real_t w : weights) {
    if (!std::isfinite(w) || w < 0) throw InvalidInputError("heatmap: bad attention weight");
    sum += w;
  }
  if (std::abs(sum - 1) > 1e-6)
    throw InvalidInputError("heatmap: attention weights must sum to 1");

  const int d = spec.image_size;
  const int p = spec.patch_size;
  Heatmap heat;
  heat.size = d;
  heat.values.assign(static_cast<std::size_t>(d) * d, 0);
  heat.coverage.assign(static_cast<std::size_t>(d) * d, 0);

  for (std::size_t k = 0; k < origins.size(); ++k) {
    const auto& o = origins[k];
    if (o.row < 0 || o.col < 0 || o.row + p > d || o.col + p > d)
      throw InvalidInputError("heatmap: patch crosses the image border");
    const real_t w = weights[k];
    for (int y = o.row; y < o.row + p; ++y) {
      real_t* row = heat.values.data() + static_cast<std::size_t>(y) * d;
      std::int32_t* cov = heat.coverage.data() + static_cast<std::size_t>(y) * d;
      for (int x = o.col; x < o.col + p; ++x) {
        row[x] += w;
        cov[x] += 1;
      }
    }
  }

  real_t max_val = 0;
  for (std::size_t i = 0; i < heat.values.size(); ++i) {
    if (heat.coverage[i] > 0) heat.values[i] /= static_cast<real_t>(heat.coverage[i]);
    max_val = std::max(max_val, heat.values[i]);
  }
  if (max_val > 0)
    for (auto& v : heat.values) v /= max_val;
  return heat;
}

BinaryMask segment(const Heatmap& heatmap, real_t a) {
  if (!(a >= 0 && a <= 1)) throw InvalidInputError("segment: threshold must be in [0, 1]");
  BinaryMask mask(heatmap.size, heatmap.size);
  for (std::size_t i = 0; i < heatmap.values.size(); ++i)
    mask.data[i] = heatmap.values[i] >= a ? 1 : 0;
  return mask;
}

ExportPaths export_outputs(const Prediction& prediction, const Heatmap& heatmap,
                           const patchbag::GridSpec& spec, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  ExportPaths paths;
  paths.heatmap_png = (fs::path(out_dir) / (prediction.image_id + ".heat.png")).string();
  paths.segmentation_png = (fs::path(out_dir) / (prediction.image_id + ".seg.png")).string();
  paths.sidecar_json = (fs::path(out_dir) / (prediction.image_id + ".meta.json")).string();

  std::vector<std::uint16_t> gray(heatmap.values.size());
  for (std::size_t i = 0; i < heatmap.values.size(); ++i)
    gray[i] = static_cast<std::uint16_t>(std::lround(heatmap.values[i] * 65535.0));
  io::save_gray16(paths.heatmap_png, heatmap.size, heatmap.size, gray);

  const BinaryMask seg = heatmap.segmentation ? *heatmap.segmentation
                                              : segment(heatmap, heatmap.seg_threshold);
  io::save_bilevel(paths.segmentation_png, seg);

  nlohmann::json meta = {
      {"image_id", prediction.image_id},
      {"y_prob", prediction.probability},
      {"y_hat", prediction.positive ? "positive" : "negative"},
      {"cls_threshold", prediction.threshold},
      {"seg_threshold", heatmap.seg_threshold},
      {"grid", {{"image_size", spec.image_size},
                {"patch_size", spec.patch_size},
                {"overlap", spec.overlap}}}};
  std::ofstream out(paths.sidecar_json, std::ios::trunc);
  if (!out) throw IoError("sidecar write failed: " + paths.sidecar_json);
  out << meta.dump(2) << '\n';
  if (!out.flush()) throw IoError("sidecar write failed: " + paths.sidecar_json);
  return paths;
}

}  // namespace mil::inference
