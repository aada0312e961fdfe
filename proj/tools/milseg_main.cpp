// milseg: train binary food-class detectors from image-level labels and
// derive segmentations from the attention heatmaps at inference time.
//
// Subcommands: prepare, synth, train, segment, eval. Every run is driven by
// a JSON config (see configs/); flags override individual fields.
// Exit codes: 0 success, 1 configuration/validation failure, 2 runtime
// failure.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "mil/config.hpp"
#include "mil/dataset/synthetic.hpp"
#include "mil/image_io.hpp"
#include "mil/inference/inference.hpp"
#include "mil/metrics/metrics.hpp"
#include "mil/model/checkpoint.hpp"
#include "mil/parallel.hpp"
#include "mil/training/training.hpp"

namespace fs = std::filesystem;
using mil::config::RunConfig;

namespace {

void apply_workers(const RunConfig& cfg) { mil::parallel::set_workers(cfg.workers); }

void require_file(const std::string& path, const std::string& what) {
  if (!fs::exists(path)) throw mil::ValidationError(what + " not found: " + path);
}

void require_dir(const std::string& path, const std::string& what) {
  if (!fs::is_directory(path)) throw mil::ValidationError(what + " is not a directory: " + path);
}

std::vector<mil::dataset::ImageRecord> records_for_split(
    std::vector<mil::dataset::ImageRecord> all, mil::dataset::Split split) {
  std::erase_if(all, [&](const auto& r) { return r.split != split; });
  return all;
}

void write_dataset_to_disk(std::vector<mil::dataset::ImageRecord>& records,
                           const std::string& out_dir) {
  for (auto& r : records) {
    const fs::path img_dir = fs::path(out_dir) / "images" / mil::dataset::to_string(r.split);
    const fs::path mask_dir = fs::path(out_dir) / "masks" / mil::dataset::to_string(r.split);
    fs::create_directories(img_dir);
    fs::create_directories(mask_dir);
    r.image_path = (img_dir / (r.image_id + ".png")).string();
    r.mask_path = (mask_dir / (r.image_id + ".png")).string();
    mil::io::save_image(r.image_path, r.pixels);
    mil::io::save_mask(r.mask_path, *r.mask);
  }
}

void print_counts(const std::vector<mil::dataset::ImageRecord>& records) {
  std::map<mil::dataset::Split, std::pair<std::int64_t, std::int64_t>> counts;
  for (const auto& r : records) {
    auto& [pos, neg] = counts[r.split];
    (r.positive ? pos : neg) += 1;
  }
  for (const auto& [split, c] : counts)
    std::cout << mil::dataset::to_string(split) << ": " << c.first << " positive / " << c.second
              << " negative\n";
}

// ---- commands ----

int cmd_prepare(const RunConfig& cfg) {
  require_dir(cfg.dataset.raw_images_train, "dataset.raw_images_train");
  require_dir(cfg.dataset.raw_masks_train, "dataset.raw_masks_train");
  require_dir(cfg.dataset.raw_images_test, "dataset.raw_images_test");
  require_dir(cfg.dataset.raw_masks_test, "dataset.raw_masks_test");
  apply_workers(cfg);

  const std::string data_dir = (fs::path(cfg.output_dir) / "data").string();
  std::vector<std::string> errors;
  mil::dataset::PrepareStats stats;
  auto records =
      mil::dataset::prepare_split(cfg.dataset.raw_images_train, cfg.dataset.raw_masks_train,
                                  mil::dataset::Split::kTrain, cfg.dataset_config(), data_dir,
                                  errors, &stats);
  auto test = mil::dataset::prepare_split(cfg.dataset.raw_images_test, cfg.dataset.raw_masks_test,
                                          mil::dataset::Split::kTest, cfg.dataset_config(),
                                          data_dir, errors, &stats);
  records.insert(records.end(), std::make_move_iterator(test.begin()),
                 std::make_move_iterator(test.end()));

  if (!errors.empty()) {
    for (const auto& e : errors) std::cerr << "error: " << e << "\n";
    return 2;
  }
  if (records.empty()) {
    std::cerr << "error: no usable images found\n";
    return 2;
  }
  mil::dataset::save_manifest(cfg.manifest_path(), records);
  std::cout << "meta-class: " << cfg.dataset.meta_class.name << "\n";
  std::cout << "discarded below pixel threshold: " << stats.n_discarded << "\n";
  print_counts(records);
  std::cout << "manifest: " << cfg.manifest_path() << "\n";
  return 0;
}

int cmd_synth(const RunConfig& cfg) {
  apply_workers(cfg);
  auto records = mil::dataset::generate_synthetic(cfg.seed, cfg.dataset.synth_images,
                                                  cfg.dataset.target_size);
  const std::string data_dir = (fs::path(cfg.output_dir) / "data").string();
  write_dataset_to_disk(records, data_dir);
  mil::dataset::save_manifest(cfg.manifest_path(), records);
  print_counts(records);
  std::cout << "manifest: " << cfg.manifest_path() << "\n";
  return 0;
}

int cmd_train(const RunConfig& cfg, bool resume) {
  require_file(cfg.manifest_path(), "manifest");
  if (resume) require_file(cfg.checkpoint_path(), "checkpoint (--resume)");
  apply_workers(cfg);

  auto records = records_for_split(mil::dataset::load_manifest(cfg.manifest_path()),
                                   mil::dataset::Split::kTrain);
  if (cfg.train.preload_images)
    for (auto& r : records) mil::dataset::load_record_content(r, false);

  mil::training::FitOptions options;
  fs::create_directories(cfg.output_dir);
  options.checkpoint_path = cfg.checkpoint_path();
  options.history_log_path = (fs::path(cfg.output_dir) / "history.log").string();
  options.history_json_path = (fs::path(cfg.output_dir) / "history.json").string();
  if (resume) options.resume_from = cfg.checkpoint_path();
  options.on_epoch = [&](int epoch, mil::real_t loss, double secs) {
    std::cout << "epoch " << epoch << ": mean loss " << loss << " (" << secs << " s)\n"
              << std::flush;
  };

  const auto result = mil::training::fit(records, cfg.model_config(), cfg.train_config(), options);
  std::cout << "checkpoint: " << options.checkpoint_path << "\n";
  return 0;
}

mil::patchbag::GridSpec dense_spec_for(const RunConfig& cfg, const mil::model::MilModel& model) {
  return {cfg.dataset.target_size, model.config().patch_size, cfg.inference.test_overlap};
}

int cmd_segment(const RunConfig& cfg, std::vector<std::string> ids, bool all_test) {
  require_file(cfg.checkpoint_path(), "checkpoint");
  require_file(cfg.manifest_path(), "manifest");
  if (ids.empty() && !all_test)
    throw mil::ValidationError("segment: pass image ids or --all-test");
  apply_workers(cfg);

  auto model = mil::model::load_model(cfg.checkpoint_path());
  auto records = mil::dataset::load_manifest(cfg.manifest_path());

  std::vector<const mil::dataset::ImageRecord*> chosen;
  if (all_test) {
    for (const auto& r : records)
      if (r.split == mil::dataset::Split::kTest) chosen.push_back(&r);
  } else {
    std::vector<std::string> unknown;
    for (const auto& id : ids) {
      const auto it = std::find_if(records.begin(), records.end(),
                                   [&](const auto& r) { return r.image_id == id; });
      if (it == records.end())
        unknown.push_back(id);
      else
        chosen.push_back(&*it);
    }
    if (!unknown.empty()) {
      std::cerr << "error: unknown image ids:";
      for (const auto& id : unknown) std::cerr << " " << id;
      std::cerr << "\n";
      return 2;
    }
  }

  const auto spec = dense_spec_for(cfg, *model);
  const std::string out_dir = (fs::path(cfg.output_dir) / "segmentations").string();
  for (const auto* rec_ptr : chosen) {
    mil::dataset::ImageRecord rec = *rec_ptr;
    mil::dataset::load_record_content(rec, false);
    const auto result = mil::inference::predict(rec, *model, spec, cfg.inference.cls_threshold);
    auto heat = mil::inference::accumulate_heatmap(result.attention.weights, result.origins, spec);
    heat.seg_threshold = cfg.inference.seg_threshold;
    heat.segmentation = mil::inference::segment(heat, heat.seg_threshold);
    mil::inference::export_outputs(result.prediction, heat, spec, out_dir);
    std::cout << rec.image_id << ": p=" << result.prediction.probability
              << (result.prediction.positive ? " positive" : " negative") << "\n";
  }
  std::cout << "outputs: " << out_dir << "\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg, bool skip_pixel) {
  require_file(cfg.checkpoint_path(), "checkpoint");
  require_file(cfg.manifest_path(), "manifest");
  apply_workers(cfg);

  auto model = mil::model::load_model(cfg.checkpoint_path());
  auto records = records_for_split(mil::dataset::load_manifest(cfg.manifest_path()),
                                   mil::dataset::Split::kTest);
  if (records.empty()) throw mil::ValidationError("eval: manifest has no test records");

  const auto spec = dense_spec_for(cfg, *model);
  std::map<std::string, mil::inference::Prediction> predictions;
  std::map<std::string, mil::inference::Heatmap> heatmaps;
  std::size_t done = 0;
  for (auto& r : records) {
    mil::dataset::load_record_content(r, true);
    const auto result = mil::inference::predict(r, *model, spec, cfg.inference.cls_threshold);
    predictions[r.image_id] = result.prediction;
    if (r.positive && !skip_pixel)
      heatmaps[r.image_id] =
          mil::inference::accumulate_heatmap(result.attention.weights, result.origins, spec);
    r.pixels = {};  // keep memory flat over large test sets
    if (++done % 25 == 0) std::cout << done << "/" << records.size() << " images\n" << std::flush;
  }

  const auto report = mil::metrics::evaluate_testset(records, predictions, heatmaps,
                                                     cfg.dataset.meta_class,
                                                     cfg.inference.seg_threshold, skip_pixel);
  fs::create_directories(cfg.output_dir);
  const std::string txt = (fs::path(cfg.output_dir) / "report.txt").string();
  const std::string json = (fs::path(cfg.output_dir) / "report.json").string();
  mil::metrics::write_report_text(txt, report);
  mil::metrics::write_report_json(json, report);
  std::cout << mil::metrics::format_report(report);
  std::cout << "report: " << txt << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "milseg: weakly supervised binary food-class detection and segmentation "
      "(attention-based multiple instance learning)"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration");

  // global overrides (applied after the config file)
  std::uint64_t seed = 0;
  int workers = 0;
  std::string output_dir;
  auto* seed_opt = app.add_option("--seed", seed, "master seed (default 7)");
  auto* workers_opt =
      app.add_option("--workers", workers, "worker threads, 0 = all cores (default 0)");
  auto* out_opt = app.add_option("--output-dir", output_dir, "run directory");

  auto* prepare = app.add_subcommand(
      "prepare", "resize a pixel-annotated dataset, derive binary labels, write the manifest");

  auto* synth =
      app.add_subcommand("synth", "generate the synthetic shapes dataset and its manifest");
  int synth_images = 0;
  int synth_size = 0;
  auto* synth_images_opt =
      synth->add_option("--images", synth_images, "number of images (default 400)");
  auto* synth_size_opt = synth->add_option("--size", synth_size, "image side D (default 512)");

  auto* train = app.add_subcommand("train", "train the bag classifier from the manifest");
  int epochs = 0, frozen = 0, bag_size = 0, patch = 0, batch = 0;
  std::string backbone;
  bool resume = false;
  auto* epochs_opt = train->add_option("--epochs", epochs, "total epochs (default 130)");
  auto* frozen_opt =
      train->add_option("--frozen-epochs", frozen, "backbone-frozen epochs (default 50)");
  auto* bag_opt = train->add_option("--bag-size", bag_size, "patches per training bag (default 50)");
  auto* patch_opt = train->add_option("--patch-size", patch, "patch side d (default 64)");
  auto* batch_opt = train->add_option("--batch-size", batch, "bags per optimizer step (default 8)");
  auto* backbone_opt = train->add_option(
      "--backbone", backbone, "small-cnn or resnet34-pretrained (default resnet34-pretrained)");
  train->add_flag("--resume", resume, "continue from the run's checkpoint");

  auto* segment = app.add_subcommand("segment", "write heatmap + segmentation files for images");
  std::vector<std::string> ids;
  bool all_test = false;
  double seg_threshold = -1;
  segment->add_option("ids", ids, "image ids from the manifest");
  segment->add_flag("--all-test", all_test, "process every test-split image");
  auto* seg_thr_opt = segment->add_option(
      "--threshold", seg_threshold, "segmentation threshold a in [0,1] (default 0.3)");

  auto* eval = app.add_subcommand("eval", "classification + pixel metrics over the test split");
  bool skip_pixel = false;
  double eval_threshold = -1;
  eval->add_flag("--skip-pixel", skip_pixel, "classification metrics only");
  auto* eval_thr_opt = eval->add_option(
      "--threshold", eval_threshold, "segmentation threshold a in [0,1] (default 0.3)");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg.merge_json_file(config_path);
    if (seed_opt->count()) cfg.seed = seed;
    if (workers_opt->count()) cfg.workers = workers;
    if (out_opt->count()) cfg.output_dir = output_dir;
    if (synth_images_opt->count()) cfg.dataset.synth_images = synth_images;
    if (synth_size_opt->count()) cfg.dataset.target_size = synth_size;
    if (epochs_opt->count()) cfg.train.total_epochs = epochs;
    if (frozen_opt->count()) cfg.train.frozen_epochs = frozen;
    if (bag_opt->count()) cfg.train.bag_size = bag_size;
    if (patch_opt->count()) cfg.train.patch_size = patch;
    if (batch_opt->count()) cfg.train.batch_size = batch;
    if (backbone_opt->count()) cfg.train.backbone = backbone;
    if (seg_thr_opt->count()) cfg.inference.seg_threshold = seg_threshold;
    if (eval_thr_opt->count()) cfg.inference.seg_threshold = eval_threshold;

    cfg.validate_common();

    if (prepare->parsed()) return cmd_prepare(cfg);
    if (synth->parsed()) return cmd_synth(cfg);
    if (train->parsed()) return cmd_train(cfg, resume);
    if (segment->parsed()) return cmd_segment(cfg, ids, all_test);
    if (eval->parsed()) return cmd_eval(cfg, skip_pixel);
    return 1;
  } catch (const mil::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
