#include "mil/patchbag/patchbag.hpp"

#include <cmath>

#include "mil/rng.hpp"

namespace mil::patchbag {

namespace {
// guards ceil() against floating fuzz when the stride divides D-d exactly
constexpr double kCeilEps = 1e-9;
}

void GridSpec::validate() const {
  if (image_size < 1) throw InvalidInputError("grid: image size must be >= 1");
  if (patch_size < 1 || patch_size > image_size)
    throw InvalidInputError("grid: need 0 < patch size <= image size");
  if (overlap < 0.0 || overlap >= 1.0) throw InvalidInputError("grid: overlap must be in [0, 1)");
  if (!(stride() > 0.0)) throw InvalidInputError("grid: stride must be positive");
}

std::int64_t axis_origin_count(const GridSpec& spec) {
  spec.validate();
  const double span = static_cast<double>(spec.image_size - spec.patch_size);
  const double n = std::ceil(1.0 + span / spec.stride() - kCeilEps);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(n));
}

std::vector<Origin> enumerate_grid(const GridSpec& spec) {
  const std::int64_t n = axis_origin_count(spec);
  const int span = spec.image_size - spec.patch_size;
  std::vector<int> positions(static_cast<std::size_t>(n));
  if (n == 1) {
    positions[0] = 0;
  } else {
    const double spacing = static_cast<double>(span) / static_cast<double>(n - 1);
    for (std::int64_t i = 0; i < n; ++i)
      positions[static_cast<std::size_t>(i)] = static_cast<int>(std::llround(i * spacing));
  }
  std::vector<Origin> origins;
  origins.reserve(static_cast<std::size_t>(n * n));
  for (int r : positions)
    for (int c : positions) origins.push_back({r, c});
  return origins;
}

std::int64_t count_patches(const GridSpec& spec) {
  spec.validate();
  const double span = static_cast<double>(spec.image_size - spec.patch_size);
  const double per_axis = 1.0 + span / spec.stride();
  return static_cast<std::int64_t>(std::ceil(per_axis * per_axis - kCeilEps));
}

void crop_into(const ImageU8& image, const Origin& origin, int patch_size, real_t* dst) {
  const std::int64_t plane = static_cast<std::int64_t>(patch_size) * patch_size;
  for (int c = 0; c < 3; ++c) {
    real_t* out = dst + c * plane;
    for (int y = 0; y < patch_size; ++y)
      for (int x = 0; x < patch_size; ++x)
        *out++ = static_cast<real_t>(image.at(origin.row + y, origin.col + x, c)) / real_t{255};
  }
}

namespace {

void check_image(const dataset::ImageRecord& image, const GridSpec& spec) {
  if (image.pixels.empty())
    throw InvalidInputError("bag: record '" + image.image_id + "' has no pixels loaded");
  if (image.pixels.h != spec.image_size || image.pixels.w != spec.image_size)
    throw InvalidInputError("bag: record '" + image.image_id + "' does not match grid image size");
}

}  // namespace

PatchBag bag_from_origins(const dataset::ImageRecord& image, std::vector<Origin> origins,
                          int patch_size) {
  if (origins.empty()) throw InvalidInputError("bag: needs at least one origin");
  PatchBag bag;
  bag.source_image_id = image.image_id;
  bag.origins = std::move(origins);
  const std::int64_t k = static_cast<std::int64_t>(bag.origins.size());
  bag.patches = Tensor({k, 3, patch_size, patch_size});
  const std::int64_t patch_len = 3LL * patch_size * patch_size;
  for (std::int64_t i = 0; i < k; ++i)
    crop_into(image.pixels, bag.origins[static_cast<std::size_t>(i)], patch_size,
              bag.patches.data() + i * patch_len);
  return bag;
}

PatchBag sample_bag(const dataset::ImageRecord& image, const GridSpec& spec, int k,
                    std::uint64_t rng_seed) {
  if (k < 1) throw InvalidInputError("bag: K must be >= 1");
  check_image(image, spec);
  const std::vector<Origin> grid = enumerate_grid(spec);
  const std::uint64_t g = grid.size();

  rng::Engine eng = rng::make_engine(rng_seed);
  std::vector<Origin> chosen;
  chosen.reserve(static_cast<std::size_t>(k));
  if (static_cast<std::uint64_t>(k) <= g) {
    for (std::uint64_t idx : rng::sample_without_replacement(eng, g, static_cast<std::uint64_t>(k)))
      chosen.push_back(grid[static_cast<std::size_t>(idx)]);
  } else {
    for (int i = 0; i < k; ++i)
      chosen.push_back(grid[static_cast<std::size_t>(rng::uniform_below(eng, g))]);
  }
  return bag_from_origins(image, std::move(chosen), spec.patch_size);
}

PatchBag dense_bag(const dataset::ImageRecord& image, const GridSpec& spec) {
  check_image(image, spec);
  return bag_from_origins(image, enumerate_grid(spec), spec.patch_size);
}

}  // namespace mil::patchbag
