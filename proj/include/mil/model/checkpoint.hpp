#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "mil/model/model.hpp"
#include "mil/nn/adam.hpp"

namespace mil::model {

struct CheckpointInfo {
  ModelConfig config;
  std::int64_t epoch = 0;
  bool has_optimizer = false;
};

/// Writes model parameters, buffers, config and epoch (plus optimizer
/// moments when given) into one archive. Atomic on POSIX rename semantics.
void save_checkpoint(const std::string& path, MilModel& model, const nn::Adam* optimizer,
                     std::int64_t epoch);

CheckpointInfo peek_checkpoint(const std::string& path);

/// Reconstructs the model from the stored config and tensors.
std::unique_ptr<MilModel> load_model(const std::string& path, CheckpointInfo* info = nullptr);

/// Restores optimizer moments saved with the same parameter set. The
/// optimizer must already reference the loaded model's params in the same
/// order (construct it the same way as before saving).
void load_optimizer(const std::string& path, nn::Adam& optimizer);

}  // namespace mil::model
