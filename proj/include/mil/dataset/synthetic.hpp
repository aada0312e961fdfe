#pragma once

#include <cstdint>
#include <vector>

#include "mil/dataset/dataset.hpp"

namespace mil::dataset {

// Synthetic desk-scale corpus: textured backgrounds with up to three shapes.
// The target class (mask id 1) is a speckled red disk, large enough that a
// present disk always clears the area threshold; distractors are a blue
// rectangle (id 2) and a green triangle (id 3). Content depends only on
// (seed, image index), so regeneration is byte-identical.

inline constexpr int kSyntheticTargetClassId = 1;

/// Meta-class map matching the generator's target shape.
MetaClassMap synthetic_meta_class();

/// Generates `n_images` records of size D x D with exact masks and labels
/// already binarized against the area-scaled pixel threshold. Every fourth
/// record lands in the test split. n_images must be >= 2.
std::vector<ImageRecord> generate_synthetic(std::uint64_t seed, int n_images, int d);

}  // namespace mil::dataset
