#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mil/dataset/dataset.hpp"
#include "mil/image.hpp"
#include "mil/inference/inference.hpp"

namespace mil::metrics {

/// Binary confusion counts; rows are ground truth, columns prediction.
struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t fn = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fn + fp + tn; }
};

/// Derived fractions. A metric whose denominator is zero is absent rather
/// than reported as 0.
struct ClassificationScores {
  real_t accuracy = 0;
  std::optional<real_t> precision;
  std::optional<real_t> recall;
  std::optional<real_t> f1;
};

ClassificationScores classification_metrics(const ConfusionMatrix& cm);

/// Intersection over union. Both masks empty -> 1, exactly one empty -> 0.
real_t iou(const BinaryMask& prediction, const BinaryMask& ground_truth);

/// Average precision of the pixel ranking induced by descending heatmap
/// value; ties resolve in row-major pixel order. AP = mean of precision at
/// each relevant rank. Ground truth must contain at least one positive.
real_t pixel_ap(const std::vector<real_t>& values, const BinaryMask& ground_truth);

struct MetricsReport {
  ConfusionMatrix confusion;
  ClassificationScores scores;
  std::optional<real_t> mean_iou;
  std::optional<real_t> mean_ap;
  std::int64_t n_images_pixel_eval = 0;
};

/// Classification metrics over every test record plus pixel metrics (IoU at
/// threshold a, AP) averaged over ground-truth-positive records. Heatmaps
/// are keyed by image id and must exist for every ground-truth positive
/// unless skip_pixel is set. Records need their masks available.
MetricsReport evaluate_testset(const std::vector<dataset::ImageRecord>& records,
                               const std::map<std::string, inference::Prediction>& predictions,
                               const std::map<std::string, inference::Heatmap>& heatmaps,
                               const dataset::MetaClassMap& meta, real_t a,
                               bool skip_pixel = false);

/// key=value lines plus the confusion matrix in ground-truth-rows
/// orientation.
void write_report_text(const std::string& path, const MetricsReport& report);
void write_report_json(const std::string& path, const MetricsReport& report);
std::string format_report(const MetricsReport& report);

}  // namespace mil::metrics
