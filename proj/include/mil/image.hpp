#pragma once

#include <cstdint>
#include <vector>

#include "mil/common.hpp"

namespace mil {

/// 8-bit RGB image, interleaved HWC layout.
struct ImageU8 {
  int h = 0;
  int w = 0;
  std::vector<std::uint8_t> data;  // size h*w*3

  ImageU8() = default;
  ImageU8(int height, int width) : h(height), w(width), data(static_cast<std::size_t>(height) * width * 3, 0) {}

  bool empty() const { return h == 0 || w == 0; }

  std::uint8_t& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * w + x) * 3 + c];
  }
  std::uint8_t at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * w + x) * 3 + c];
  }

  bool operator==(const ImageU8& o) const = default;
};

/// Single-channel class-id mask.
struct MaskImage {
  int h = 0;
  int w = 0;
  std::vector<std::int32_t> data;  // size h*w

  MaskImage() = default;
  MaskImage(int height, int width) : h(height), w(width), data(static_cast<std::size_t>(height) * width, 0) {}

  bool empty() const { return h == 0 || w == 0; }

  std::int32_t& at(int y, int x) { return data[static_cast<std::size_t>(y) * w + x]; }
  std::int32_t at(int y, int x) const { return data[static_cast<std::size_t>(y) * w + x]; }

  bool operator==(const MaskImage& o) const = default;
};

/// Binary mask stored as 0/1 bytes.
struct BinaryMask {
  int h = 0;
  int w = 0;
  std::vector<std::uint8_t> data;

  BinaryMask() = default;
  BinaryMask(int height, int width) : h(height), w(width), data(static_cast<std::size_t>(height) * width, 0) {}

  bool empty() const { return h == 0 || w == 0; }

  std::uint8_t& at(int y, int x) { return data[static_cast<std::size_t>(y) * w + x]; }
  std::uint8_t at(int y, int x) const { return data[static_cast<std::size_t>(y) * w + x]; }

  std::int64_t count() const {
    std::int64_t n = 0;
    for (auto v : data) n += v != 0;
    return n;
  }

  bool operator==(const BinaryMask& o) const = default;
};

}  // namespace mil
