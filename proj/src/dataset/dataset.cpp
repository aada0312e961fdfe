#include "mil/dataset/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mil/image_io.hpp"
#include "mil/kernels/resize.hpp"

namespace fs = std::filesystem;

namespace mil::dataset {

void MetaClassMap::validate() const {
  if (name.empty()) throw InvalidInputError("meta-class needs a name");
  if (member_class_ids.empty())
    throw InvalidInputError("meta-class '" + name + "' has no member class ids");
  if (member_class_ids.count(0) > 0)
    throw InvalidInputError("meta-class '" + name + "' must not contain background id 0");
}

std::string to_string(Split split) { return split == Split::kTrain ? "train" : "test"; }

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  throw InvalidInputError("unknown split '" + s + "'");
}

void DatasetConfig::validate() const {
  if (target_size < 1) throw InvalidInputError("target_size must be >= 1");
  if (pixel_threshold < 1) throw InvalidInputError("pixel_threshold must be >= 1");
  meta_class.validate();
}

std::int64_t scaled_pixel_threshold(std::int64_t threshold_at_512, int d) {
  if (d == 512) return threshold_at_512;
  const double fraction = static_cast<double>(threshold_at_512) / (512.0 * 512.0);
  return std::llround(fraction * static_cast<double>(d) * static_cast<double>(d));
}

ImageU8 resize_image(const ImageU8& image, int d) {
  return kernels::resize_bilinear(image, d, d);
}

MaskImage resize_mask(const MaskImage& mask, int d) {
  return kernels::resize_nearest(mask, d, d);
}

LabelResult binarize_label(const MaskImage& mask, const MetaClassMap& map,
                           std::int64_t pixel_threshold) {
  std::int64_t count = 0;
  for (std::int32_t v : mask.data) count += map.contains(v) ? 1 : 0;
  return {count >= pixel_threshold, count};
}

BinaryMask binary_ground_truth(const MaskImage& mask, const MetaClassMap& map) {
  BinaryMask out(mask.h, mask.w);
  for (std::size_t i = 0; i < mask.data.size(); ++i)
    out.data[i] = map.contains(mask.data[i]) ? 1 : 0;
  return out;
}

std::vector<ImageRecord> filter_records(std::vector<ImageRecord> records,
                                        const DatasetConfig& config) {
  std::vector<ImageRecord> kept;
  kept.reserve(records.size());
  for (auto& r : records) {
    const bool weak_positive =
        r.positive_pixel_count > 0 && r.positive_pixel_count < config.pixel_threshold;
    if (!weak_positive) kept.push_back(std::move(r));
  }
  return kept;
}

void save_manifest(const std::string& path, const std::vector<ImageRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("manifest write failed: " + path);
  for (const auto& r : records) {
    out << r.image_id << '\t' << (r.image_path.empty() ? "-" : r.image_path) << '\t'
        << (r.mask_path.empty() ? "-" : r.mask_path) << '\t' << to_string(r.split) << '\t'
        << (r.positive ? "pos" : "neg") << '\t' << r.positive_pixel_count << '\n';
  }
  if (!out.flush()) throw IoError("manifest write failed: " + path);
}

std::vector<ImageRecord> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("manifest read failed: " + path);
  std::vector<ImageRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    ImageRecord r;
    std::string split, label, count;
    if (!std::getline(ss, r.image_id, '\t') || !std::getline(ss, r.image_path, '\t') ||
        !std::getline(ss, r.mask_path, '\t') || !std::getline(ss, split, '\t') ||
        !std::getline(ss, label, '\t') || !std::getline(ss, count))
      throw IoError("manifest parse error at " + path + ":" + std::to_string(lineno));
    if (r.image_path == "-") r.image_path.clear();
    if (r.mask_path == "-") r.mask_path.clear();
    r.split = split_from_string(split);
    if (label != "pos" && label != "neg")
      throw IoError("manifest bad label at " + path + ":" + std::to_string(lineno));
    r.positive = label == "pos";
    r.positive_pixel_count = std::stoll(count);
    records.push_back(std::move(r));
  }
  return records;
}

void load_record_content(ImageRecord& record, bool with_mask) {
  if (record.pixels.empty()) {
    if (record.image_path.empty())
      throw InvalidInputError("record '" + record.image_id + "' has no pixels and no image path");
    record.pixels = io::load_image(record.image_path);
  }
  if (with_mask && !record.mask.has_value() && !record.mask_path.empty())
    record.mask = io::load_mask(record.mask_path);
}

namespace {

bool has_image_extension(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ".jpg" || e == ".jpeg" || e == ".png" || e == ".bmp";
}

}  // namespace

std::vector<ImageRecord> prepare_split(const std::string& raw_images_dir,
                                       const std::string& raw_masks_dir, Split split,
                                       const DatasetConfig& config, const std::string& out_dir,
                                       std::vector<std::string>& errors, PrepareStats* stats) {
  config.validate();
  if (!fs::is_directory(raw_images_dir))
    throw InvalidInputError("not a directory: " + raw_images_dir);
  if (!fs::is_directory(raw_masks_dir)) throw InvalidInputError("not a directory: " + raw_masks_dir);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(raw_images_dir))
    if (entry.is_regular_file() && has_image_extension(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  const fs::path img_out = fs::path(out_dir) / "images" / to_string(split);
  const fs::path mask_out = fs::path(out_dir) / "masks" / to_string(split);
  fs::create_directories(img_out);
  fs::create_directories(mask_out);

  std::vector<ImageRecord> records;
  for (const auto& file : files) {
    const std::string stem = file.stem().string();
    const fs::path mask_file = fs::path(raw_masks_dir) / (stem + ".png");
    if (!fs::exists(mask_file)) {
      errors.push_back("missing mask for " + file.string());
      continue;
    }
    try {
      ImageRecord r;
      r.image_id = stem;
      r.split = split;
      r.pixels = resize_image(io::load_image(file.string()), config.target_size);
      r.mask = resize_mask(io::load_mask(mask_file.string()), config.target_size);
      const LabelResult lr = binarize_label(*r.mask, config.meta_class, config.pixel_threshold);
      r.positive = lr.positive;
      r.positive_pixel_count = lr.positive_pixel_count;
      r.image_path = (img_out / (stem + ".png")).string();
      r.mask_path = (mask_out / (stem + ".png")).string();
      io::save_image(r.image_path, r.pixels);
      io::save_mask(r.mask_path, *r.mask);
      records.push_back(std::move(r));
    } catch (const std::exception& e) {
      errors.push_back(std::string(e.what()) + " (" + file.string() + ")");
    }
  }

  const std::size_t before = records.size();
  records = filter_records(std::move(records), config);
  if (stats) {
    stats->n_discarded += static_cast<std::int64_t>(before - records.size());
    for (const auto& r : records) (r.positive ? stats->n_positive : stats->n_negative) += 1;
  }
  return records;
}

}  // namespace mil::dataset
