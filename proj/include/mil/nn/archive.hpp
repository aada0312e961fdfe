#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mil/tensor.hpp"

namespace mil::nn {

/// Self-describing container for named tensors: an eight-byte magic, a JSON
/// header (free-form `meta` plus the tensor directory), then raw float64
/// payload in directory order. Writes go to a temp file renamed into place.
class TensorArchive {
 public:
  nlohmann::json meta;

  void add(std::string name, Tensor tensor);
  bool contains(const std::string& name) const;
  const Tensor& get(const std::string& name) const;  // throws IoError if absent
  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }

  void save(const std::string& path) const;
  static TensorArchive load(const std::string& path);

  /// Reads only the JSON header.
  static nlohmann::json peek_meta(const std::string& path);

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

}  // namespace mil::nn
