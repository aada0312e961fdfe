#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mil/common.hpp"
#include "mil/dataset/dataset.hpp"
#include "mil/tensor.hpp"

namespace mil::patchbag {

/// Square-patch grid over a D x D image: patch side d, overlap fraction in
/// [0, 1). Adjacent origins sit stride = d*(1-overlap) apart.
struct GridSpec {
  int image_size = 512;
  int patch_size = 64;
  double overlap = 0.75;

  double stride() const { return patch_size * (1.0 - overlap); }
  void validate() const;
};

struct Origin {
  int row = 0;
  int col = 0;

  bool operator==(const Origin&) const = default;
};

/// Per-axis origin count: ceil(1 + (D-d)/stride), at least 1.
std::int64_t axis_origin_count(const GridSpec& spec);

/// All patch origins, row-major. Origins are evenly spaced (rounded to
/// integer pixels) from 0 to D-d inclusive, axis_origin_count() per axis.
std::vector<Origin> enumerate_grid(const GridSpec& spec);

/// Patch count as the ceiling of the squared per-axis expression,
///   ceil((1 + (D-d)/(d(1-t)))^2).
/// Equals enumerate_grid().size() whenever the stride divides D-d exactly;
/// for other specs the grid (per-axis ceiling) may contain slightly more.
std::int64_t count_patches(const GridSpec& spec);

/// A bag of K patches plus where they came from. Patch pixels are scaled to
/// [0, 1], stored K x 3 x d x d.
struct PatchBag {
  Tensor patches;
  std::vector<Origin> origins;
  std::string source_image_id;

  std::int64_t size() const { return static_cast<std::int64_t>(origins.size()); }
};

/// Crops one patch (3 x d x d plane order) into `dst`.
void crop_into(const ImageU8& image, const Origin& origin, int patch_size, real_t* dst);

/// Builds a bag from explicit origins.
PatchBag bag_from_origins(const dataset::ImageRecord& image, std::vector<Origin> origins,
                          int patch_size);

/// K origins drawn uniformly without replacement from the grid (with
/// replacement only when the grid is smaller than K). Deterministic in seed.
PatchBag sample_bag(const dataset::ImageRecord& image, const GridSpec& spec, int k,
                    std::uint64_t rng_seed);

/// The exhaustive grid bag in row-major order.
PatchBag dense_bag(const dataset::ImageRecord& image, const GridSpec& spec);

}  // namespace mil::patchbag
