#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mil/common.hpp"
#include "mil/image.hpp"

namespace mil::dataset {

/// A named group of source-dataset class ids treated as one binary target.
struct MetaClassMap {
  std::string name;
  std::set<int> member_class_ids;

  bool contains(std::int32_t id) const { return member_class_ids.count(static_cast<int>(id)) > 0; }

  /// Non-empty, and never includes the background id 0.
  void validate() const;
};

enum class Split { kTrain, kTest };

std::string to_string(Split split);
Split split_from_string(const std::string& s);

/// One image with its binary image-level label and optional ground truth.
struct ImageRecord {
  std::string image_id;
  ImageU8 pixels;  // D x D x 3 once preprocessed; may be unloaded (empty)
  std::optional<MaskImage> mask;
  bool positive = false;
  std::int64_t positive_pixel_count = 0;
  Split split = Split::kTrain;

  // On-disk locations; empty for purely in-memory records.
  std::string image_path;
  std::string mask_path;
};

struct DatasetConfig {
  int target_size = 512;
  std::int64_t pixel_threshold = 20000;
  MetaClassMap meta_class;
  bool oversample_positives = true;

  void validate() const;
};

/// The 20k-pixel rule rescaled to images of side `d` (same area fraction).
std::int64_t scaled_pixel_threshold(std::int64_t threshold_at_512, int d);

/// Bilinear resize of an RGB image to D x D.
ImageU8 resize_image(const ImageU8& image, int d);

/// Nearest-neighbor resize of a class-id mask to D x D.
MaskImage resize_mask(const MaskImage& mask, int d);

struct LabelResult {
  bool positive = false;
  std::int64_t positive_pixel_count = 0;
};

/// Counts member-class pixels; positive iff count >= pixel_threshold.
/// The boundary count itself is positive.
LabelResult binarize_label(const MaskImage& mask, const MetaClassMap& map,
                           std::int64_t pixel_threshold);

/// Member-class pixels of a mask as a 0/1 image.
BinaryMask binary_ground_truth(const MaskImage& mask, const MetaClassMap& map);

/// Drops weak positives: records with at least one member pixel but fewer
/// than the threshold. Pure negatives and full positives are kept.
std::vector<ImageRecord> filter_records(std::vector<ImageRecord> records,
                                        const DatasetConfig& config);

// ---- manifest ----
// One record per line, tab-separated:
//   image_id  image_path  mask_path(or -)  split  label(pos|neg)  positive_pixel_count

void save_manifest(const std::string& path, const std::vector<ImageRecord>& records);
std::vector<ImageRecord> load_manifest(const std::string& path);

/// Loads record.pixels (and mask when a path is set) from disk.
void load_record_content(ImageRecord& record, bool with_mask = true);

// ---- raw-dataset ingestion ----

struct PrepareStats {
  std::int64_t n_positive = 0;
  std::int64_t n_negative = 0;
  std::int64_t n_discarded = 0;  // weak positives removed by the pixel filter
};

/// Preprocesses every image of one split found under `raw_images_dir`
/// (masks matched by stem under `raw_masks_dir`), writes resized images and
/// masks into `out_dir`/images, `out_dir`/masks, and returns the retained
/// records. Per-file problems are collected into `errors`.
std::vector<ImageRecord> prepare_split(const std::string& raw_images_dir,
                                       const std::string& raw_masks_dir, Split split,
                                       const DatasetConfig& config, const std::string& out_dir,
                                       std::vector<std::string>& errors, PrepareStats* stats);

}  // namespace mil::dataset
