#include "mil/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace mil::metrics {

ClassificationScores classification_metrics(const ConfusionMatrix& cm) {
  if (cm.tp < 0 || cm.fn < 0 || cm.fp < 0 || cm.tn < 0)
    throw InvalidInputError("metrics: negative confusion count");
  const std::int64_t total = cm.total();
  if (total == 0) throw InvalidInputError("metrics: empty confusion matrix");

  ClassificationScores s;
  s.accuracy = static_cast<real_t>(cm.tp + cm.tn) / static_cast<real_t>(total);
  if (cm.tp + cm.fp > 0)
    s.precision = static_cast<real_t>(cm.tp) / static_cast<real_t>(cm.tp + cm.fp);
  if (cm.tp + cm.fn > 0)
    s.recall = static_cast<real_t>(cm.tp) / static_cast<real_t>(cm.tp + cm.fn);
  if (s.precision && s.recall && (*s.precision + *s.recall) > 0)
    s.f1 = 2 * (*s.precision) * (*s.recall) / (*s.precision + *s.recall);
  return s;
}

real_t iou(const BinaryMask& prediction, const BinaryMask& ground_truth) {
  if (prediction.h != ground_truth.h || prediction.w != ground_truth.w)
    throw InvalidInputError("iou: mask shapes differ");
  std::int64_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < prediction.data.size(); ++i) {
    const bool p = prediction.data[i] != 0;
    const bool g = ground_truth.data[i] != 0;
    inter += p && g;
    uni += p || g;
  }
  if (uni == 0) return 1;  // both empty
  return static_cast<real_t>(inter) / static_cast<real_t>(uni);
}

real_t pixel_ap(const std::vector<real_t>& values, const BinaryMask& ground_truth) {
  const std::size_t n = static_cast<std::size_t>(ground_truth.h) * ground_truth.w;
  if (values.size() != n) throw InvalidInputError("pixel_ap: value/mask size mismatch");
  std::int64_t positives = 0;
  for (auto v : ground_truth.data) positives += v != 0;
  if (positives == 0) throw InvalidInputError("pixel_ap: ground truth has no positive pixels");

  std::vector<std::int64_t> order(n);
  std::iota(order.begin(), order.end(), std::int64_t{0});
  std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    const real_t va = values[static_cast<std::size_t>(a)];
    const real_t vb = values[static_cast<std::size_t>(b)];
    if (va != vb) return va > vb;
    return a < b;  // row-major tie order
  });

  real_t precision_sum = 0;
  std::int64_t hits = 0;
  for (std::size_t rank = 0; rank < n; ++rank) {
    if (ground_truth.data[static_cast<std::size_t>(order[rank])] != 0) {
      ++hits;
      precision_sum += static_cast<real_t>(hits) / static_cast<real_t>(rank + 1);
    }
  }
  return precision_sum / static_cast<real_t>(positives);
}

MetricsReport evaluate_testset(const std::vector<dataset::ImageRecord>& records,
                               const std::map<std::string, inference::Prediction>& predictions,
                               const std::map<std::string, inference::Heatmap>& heatmaps,
                               const dataset::MetaClassMap& meta, real_t a, bool skip_pixel) {
  if (records.empty()) throw InvalidInputError("evaluate: no test records");

  std::vector<std::string> missing_predictions;
  for (const auto& r : records)
    if (predictions.find(r.image_id) == predictions.end())
      missing_predictions.push_back(r.image_id);
  if (!missing_predictions.empty()) {
    std::string msg = "evaluate: missing predictions for:";
    for (const auto& id : missing_predictions) msg += " " + id;
    throw InvalidInputError(msg);
  }

  MetricsReport report;
  for (const auto& r : records) {
    const bool predicted = predictions.at(r.image_id).positive;
    if (r.positive)
      (predicted ? report.confusion.tp : report.confusion.fn) += 1;
    else
      (predicted ? report.confusion.fp : report.confusion.tn) += 1;
  }
  report.scores = classification_metrics(report.confusion);

  if (skip_pixel) return report;

  std::vector<std::string> missing_heatmaps;
  for (const auto& r : records)
    if (r.positive && heatmaps.find(r.image_id) == heatmaps.end())
      missing_heatmaps.push_back(r.image_id);
  if (!missing_heatmaps.empty()) {
    std::string msg = "evaluate: missing heatmaps for ground-truth positives:";
    for (const auto& id : missing_heatmaps) msg += " " + id;
    throw InvalidInputError(msg);
  }

  real_t iou_sum = 0, ap_sum = 0;
  std::int64_t count = 0;
  for (const auto& r : records) {
    if (!r.positive) continue;
    if (!r.mask.has_value())
      throw InvalidInputError("evaluate: record '" + r.image_id + "' has no ground-truth mask");
    const inference::Heatmap& heat = heatmaps.at(r.image_id);
    const BinaryMask gt = dataset::binary_ground_truth(*r.mask, meta);
    if (gt.h != heat.size || gt.w != heat.size)
      throw InvalidInputError("evaluate: heatmap and mask sizes differ for '" + r.image_id + "'");
    iou_sum += iou(inference::segment(heat, a), gt);
    ap_sum += pixel_ap(heat.values, gt);
    ++count;
  }
  report.n_images_pixel_eval = count;
  if (count > 0) {
    report.mean_iou = iou_sum / static_cast<real_t>(count);
    report.mean_ap = ap_sum / static_cast<real_t>(count);
  }
  return report;
}

namespace {

std::string opt_str(const std::optional<real_t>& v) {
  if (!v) return "n/a";
  std::ostringstream ss;
  ss << *v;
  return ss.str();
}

}  // namespace

std::string format_report(const MetricsReport& report) {
  std::ostringstream ss;
  ss << "confusion_matrix (rows: ground truth, cols: prediction)\n";
  ss << "              pred_positive  pred_negative\n";
  ss << "gt_positive   " << report.confusion.tp << "  " << report.confusion.fn << "\n";
  ss << "gt_negative   " << report.confusion.fp << "  " << report.confusion.tn << "\n";
  ss << "accuracy=" << report.scores.accuracy << "\n";
  ss << "precision=" << opt_str(report.scores.precision) << "\n";
  ss << "recall=" << opt_str(report.scores.recall) << "\n";
  ss << "f1=" << opt_str(report.scores.f1) << "\n";
  ss << "mean_iou=" << opt_str(report.mean_iou) << "\n";
  ss << "mean_ap=" << opt_str(report.mean_ap) << "\n";
  ss << "n_images_pixel_eval=" << report.n_images_pixel_eval << "\n";
  return ss.str();
}

void write_report_text(const std::string& path, const MetricsReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("report write failed: " + path);
  out << format_report(report);
  if (!out.flush()) throw IoError("report write failed: " + path);
}

void write_report_json(const std::string& path, const MetricsReport& report) {
  nlohmann::json j;
  j["confusion"] = {{"tp", report.confusion.tp},
                    {"fn", report.confusion.fn},
                    {"fp", report.confusion.fp},
                    {"tn", report.confusion.tn}};
  j["accuracy"] = report.scores.accuracy;
  j["precision"] = report.scores.precision ? nlohmann::json(*report.scores.precision) : nullptr;
  j["recall"] = report.scores.recall ? nlohmann::json(*report.scores.recall) : nullptr;
  j["f1"] = report.scores.f1 ? nlohmann::json(*report.scores.f1) : nullptr;
  j["mean_iou"] = report.mean_iou ? nlohmann::json(*report.mean_iou) : nullptr;
  j["mean_ap"] = report.mean_ap ? nlohmann::json(*report.mean_ap) : nullptr;
  j["n_images_pixel_eval"] = report.n_images_pixel_eval;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("report write failed: " + path);
  out << j.dump(2) << '\n';
  if (!out.flush()) throw IoError("report write failed: " + path);
}

}  // namespace mil::metrics
