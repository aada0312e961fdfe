#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mil/dataset/dataset.hpp"
#include "mil/model/model.hpp"
#include "mil/nn/adam.hpp"
#include "mil/patchbag/patchbag.hpp"

namespace mil::training {

struct TrainConfig {
  int total_epochs = 130;
  int frozen_epochs = 50;
  int bag_size = 50;            // K patches per training bag
  int patch_size = 64;          // d
  double train_overlap = 0.75;  // t
  int batch_size = 8;
  real_t head_lr = 1e-4;
  real_t backbone_lr = 1e-5;
  std::uint64_t seed = 0;
  bool oversample = true;
  int checkpoint_every = 10;  // epochs between checkpoint writes; 0 = final only

  void validate() const;
};

/// One bag to draw during an epoch. bag_seed = hash(seed, epoch, image_id),
/// so bags differ across epochs yet reproduce exactly.
struct PlanEntry {
  std::string image_id;
  std::uint64_t bag_seed = 0;
};

/// Shuffled epoch plan. With oversampling, every negative appears exactly
/// once and positives are repeated (drawn with replacement) until the two
/// class counts match; without it, every record appears exactly once.
/// Requires both classes present.
std::vector<PlanEntry> make_epoch_plan(const std::vector<dataset::ImageRecord>& records,
                                       const TrainConfig& config, int epoch);

struct BagExample {
  patchbag::PatchBag bag;
  real_t label = 0;  // 0 or 1
};

/// Clamped binary cross-entropy between probability and label.
real_t bce_loss(real_t probability, real_t label);

/// One optimizer update from a mini-batch of bags: mean BCE over the batch,
/// gradients accumulated per bag, a single Adam step. Throws NumericError if
/// the loss is not finite.
real_t train_step(const std::vector<BagExample>& batch, model::MilModel& model,
                  nn::Adam& optimizer);

struct History {
  std::vector<real_t> epoch_loss;
  std::vector<double> epoch_seconds;
};

struct FitOptions {
  std::string checkpoint_path;    // written every checkpoint_every epochs + at the end
  std::string resume_from;        // continue from this checkpoint
  std::string history_log_path;   // text: epoch, mean loss, seconds
  std::string history_json_path;  // same content, machine-readable
  std::function<void(int epoch, real_t loss, double seconds)> on_epoch;
};

struct FitResult {
  std::unique_ptr<model::MilModel> model;
  History history;
};

/// Two-phase training: the backbone stays immutable (inference mode, no
/// gradients) for the first frozen_epochs, then fine-tunes at backbone_lr
/// while the head keeps head_lr. Bags are re-sampled every epoch from the
/// per-entry seeds. Records must carry pixels or an image_path to load from.
FitResult fit(const std::vector<dataset::ImageRecord>& records, const model::ModelConfig& mconfig,
              const TrainConfig& tconfig, const FitOptions& options = {});

}  // namespace mil::training
