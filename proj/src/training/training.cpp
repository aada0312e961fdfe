#include "mil/training/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "mil/model/checkpoint.hpp"
#include "mil/rng.hpp"

namespace mil::training {

namespace {
constexpr real_t kProbClamp = 1e-7;
}

void TrainConfig::validate() const {
  if (total_epochs < 0) throw InvalidInputError("train: total_epochs must be >= 0");
  if (frozen_epochs < 0 || frozen_epochs > total_epochs)
    throw InvalidInputError("train: need 0 <= frozen_epochs <= total_epochs");
  if (bag_size < 1) throw InvalidInputError("train: bag size K must be >= 1");
  if (patch_size < 1) throw InvalidInputError("train: patch size must be >= 1");
  if (train_overlap < 0.0 || train_overlap >= 1.0)
    throw InvalidInputError("train: overlap must be in [0, 1)");
  if (batch_size < 1) throw InvalidInputError("train: batch_size must be >= 1");
  if (!(head_lr > 0) || !(backbone_lr > 0))
    throw InvalidInputError("train: learning rates must be > 0");
  if (checkpoint_every < 0) throw InvalidInputError("train: checkpoint_every must be >= 0");
}

std::vector<PlanEntry> make_epoch_plan(const std::vector<dataset::ImageRecord>& records,
                                       const TrainConfig& config, int epoch) {
  if (records.empty()) throw InvalidInputError("epoch plan: no records");
  std::vector<const dataset::ImageRecord*> positives, negatives;
  for (const auto& r : records) (r.positive ? positives : negatives).push_back(&r);
  if (positives.empty() || negatives.empty())
    throw InvalidInputError("epoch plan: both classes must be present");

  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.push_back(r.image_id);

  if (config.oversample && positives.size() < negatives.size()) {
    rng::Engine eng = rng::make_engine(
        rng::derive_seed(config.seed, static_cast<std::uint64_t>(epoch), "oversample"));
    const std::size_t extra = negatives.size() - positives.size();
    for (std::size_t i = 0; i < extra; ++i) {
      const std::size_t j =
          static_cast<std::size_t>(rng::uniform_below(eng, positives.size()));
      ids.push_back(positives[j]->image_id);
    }
  }

  rng::Engine shuffle_eng =
      rng::make_engine(rng::derive_seed(config.seed, static_cast<std::uint64_t>(epoch), "plan"));
  rng::shuffle(ids, shuffle_eng);

  std::vector<PlanEntry> plan;
  plan.reserve(ids.size());
  for (auto& id : ids) {
    const std::uint64_t bag_seed =
        rng::derive_seed(config.seed, static_cast<std::uint64_t>(epoch), id);
    plan.push_back({std::move(id), bag_seed});
  }
  return plan;
}

real_t bce_loss(real_t probability, real_t label) {
  const real_t p = std::clamp(probability, kProbClamp, real_t{1} - kProbClamp);
  return -(label * std::log(p) + (1 - label) * std::log(1 - p));
}

real_t train_step(const std::vector<BagExample>& batch, model::MilModel& model,
                  nn::Adam& optimizer) {
  if (batch.empty()) throw InvalidInputError("train_step: empty batch");
  model.zero_grad();
  real_t loss_sum = 0;
  const real_t inv_batch = real_t{1} / static_cast<real_t>(batch.size());
  for (const BagExample& example : batch) {
    const model::AttentionOutput out = model.forward_train(example.bag);
    loss_sum += bce_loss(out.probability, example.label);
    model.backward((out.probability - example.label) * inv_batch);
  }
  const real_t loss = loss_sum * inv_batch;
  if (!std::isfinite(loss))
    throw NumericError("train_step: non-finite batch loss (bag '" +
                       batch.front().bag.source_image_id + "' and " +
                       std::to_string(batch.size() - 1) + " others)");
  optimizer.step();
  return loss;
}

namespace {

const dataset::ImageRecord& find_record(
    const std::unordered_map<std::string, const dataset::ImageRecord*>& by_id,
    const std::string& id) {
  const auto it = by_id.find(id);
  if (it == by_id.end()) throw InvalidInputError("epoch plan references unknown id '" + id + "'");
  return *it->second;
}

patchbag::PatchBag make_train_bag(const dataset::ImageRecord& record,
                                  const patchbag::GridSpec& spec, int k, std::uint64_t seed) {
  if (!record.pixels.empty()) return patchbag::sample_bag(record, spec, k, seed);
  dataset::ImageRecord loaded = record;  // lazy path for corpora too large to pin
  dataset::load_record_content(loaded, false);
  return patchbag::sample_bag(loaded, spec, k, seed);
}

void append_history_line(const std::string& path, int epoch, real_t loss, double seconds) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("history log write failed: " + path);
  out << epoch << '\t' << loss << '\t' << seconds << '\n';
}

void write_history_json(const std::string& path, const History& history) {
  if (path.empty()) return;
  nlohmann::json j;
  j["epoch_loss"] = history.epoch_loss;
  j["epoch_seconds"] = history.epoch_seconds;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("history write failed: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace

FitResult fit(const std::vector<dataset::ImageRecord>& records, const model::ModelConfig& mconfig,
              const TrainConfig& tconfig, const FitOptions& options) {
  tconfig.validate();
  mconfig.validate();
  if (mconfig.patch_size != tconfig.patch_size)
    throw InvalidInputError("fit: model and train patch sizes disagree");

  std::unordered_map<std::string, const dataset::ImageRecord*> by_id;
  int image_size = 0;
  for (const auto& r : records) {
    if (!by_id.emplace(r.image_id, &r).second)
      throw InvalidInputError("fit: duplicate image id '" + r.image_id + "'");
    if (!r.pixels.empty()) {
      if (image_size == 0) image_size = r.pixels.h;
      if (r.pixels.h != image_size || r.pixels.w != image_size)
        throw InvalidInputError("fit: records must share one square image size");
    }
  }
  if (image_size == 0 && !records.empty()) {
    dataset::ImageRecord probe = records.front();
    dataset::load_record_content(probe, false);
    image_size = probe.pixels.h;
  }

  FitResult result;
  std::int64_t start_epoch = 0;
  if (!options.resume_from.empty()) {
    model::CheckpointInfo info;
    result.model = model::load_model(options.resume_from, &info);
    start_epoch = info.epoch;
  } else {
    result.model = std::make_unique<model::MilModel>(mconfig, tconfig.seed);
  }

  nn::Adam optimizer({{result.model->backbone_params(), tconfig.backbone_lr},
                      {result.model->head_params(), tconfig.head_lr}});
  if (!options.resume_from.empty()) {
    const model::CheckpointInfo info = model::peek_checkpoint(options.resume_from);
    if (info.has_optimizer) model::load_optimizer(options.resume_from, optimizer);
  }

  const patchbag::GridSpec grid{image_size, tconfig.patch_size, tconfig.train_overlap};
  if (tconfig.total_epochs > 0) grid.validate();

  for (std::int64_t epoch = start_epoch; epoch < tconfig.total_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    result.model->set_frozen(epoch < tconfig.frozen_epochs);

    const std::vector<PlanEntry> plan =
        make_epoch_plan(records, tconfig, static_cast<int>(epoch));

    real_t loss_sum = 0;
    std::size_t item_count = 0;
    for (std::size_t start = 0; start < plan.size(); start += static_cast<std::size_t>(tconfig.batch_size)) {
      const std::size_t end =
          std::min(plan.size(), start + static_cast<std::size_t>(tconfig.batch_size));
      std::vector<BagExample> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const dataset::ImageRecord& rec = find_record(by_id, plan[i].image_id);
        batch.push_back({make_train_bag(rec, grid, tconfig.bag_size, plan[i].bag_seed),
                         rec.positive ? real_t{1} : real_t{0}});
      }
      const real_t batch_loss = train_step(batch, *result.model, optimizer);
      loss_sum += batch_loss * static_cast<real_t>(batch.size());
      item_count += batch.size();
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const real_t mean_loss = item_count ? loss_sum / static_cast<real_t>(item_count) : 0;
    result.history.epoch_loss.push_back(mean_loss);
    result.history.epoch_seconds.push_back(seconds);
    append_history_line(options.history_log_path, static_cast<int>(epoch), mean_loss, seconds);
    if (options.on_epoch) options.on_epoch(static_cast<int>(epoch), mean_loss, seconds);

    const bool last = epoch + 1 == tconfig.total_epochs;
    const bool cadence =
        tconfig.checkpoint_every > 0 && (epoch + 1) % tconfig.checkpoint_every == 0;
    if (!options.checkpoint_path.empty() && (last || cadence))
      model::save_checkpoint(options.checkpoint_path, *result.model, &optimizer, epoch + 1);
  }

  // a fresh run with zero epochs still leaves a loadable artifact
  if (!options.checkpoint_path.empty() && tconfig.total_epochs == 0)
    model::save_checkpoint(options.checkpoint_path, *result.model, &optimizer, 0);

  write_history_json(options.history_json_path, result.history);
  return result;
}

}  // namespace mil::training
