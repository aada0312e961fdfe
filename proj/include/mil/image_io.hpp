#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mil/image.hpp"

namespace mil::io {

/// Decodes any common raster format to RGB. Throws IoError on failure.
ImageU8 load_image(const std::string& path);

/// Writes 8-bit RGB; format chosen by extension (.png recommended).
void save_image(const std::string& path, const ImageU8& img);

/// Reads a single-channel class-id mask (8- or 16-bit grayscale PNG).
MaskImage load_mask(const std::string& path);

/// Writes class ids as 8-bit grayscale PNG (ids must fit in a byte).
void save_mask(const std::string& path, const MaskImage& mask);

/// 16-bit grayscale PNG, values given directly.
void save_gray16(const std::string& path, int h, int w, const std::vector<std::uint16_t>& values);
std::vector<std::uint16_t> load_gray16(const std::string& path, int& h, int& w);

/// 1-bit black/white PNG from a 0/1 mask.
void save_bilevel(const std::string& path, const BinaryMask& mask);
BinaryMask load_bilevel(const std::string& path);

}  // namespace mil::io
