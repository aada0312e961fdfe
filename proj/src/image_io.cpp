#include "mil/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "mil/common.hpp"

namespace mil::io {

namespace {

[[noreturn]] void fail(const std::string& verb, const std::string& path) {
  throw IoError(verb + " failed: " + path);
}

}  // namespace

ImageU8 load_image(const std::string& path) {
  cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  if (bgr.empty()) fail("image read", path);
  ImageU8 out(bgr.rows, bgr.cols);
  for (int y = 0; y < bgr.rows; ++y) {
    const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      out.at(y, x, 0) = row[x][2];
      out.at(y, x, 1) = row[x][1];
      out.at(y, x, 2) = row[x][0];
    }
  }
  return out;
}

void save_image(const std::string& path, const ImageU8& img) {
  if (img.empty()) throw InvalidInputError("save_image: empty image");
  cv::Mat bgr(img.h, img.w, CV_8UC3);
  for (int y = 0; y < img.h; ++y) {
    cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.w; ++x) {
      row[x][0] = img.at(y, x, 2);
      row[x][1] = img.at(y, x, 1);
      row[x][2] = img.at(y, x, 0);
    }
  }
  if (!cv::imwrite(path, bgr)) fail("image write", path);
}

MaskImage load_mask(const std::string& path) {
  cv::Mat raw = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (raw.empty()) fail("mask read", path);
  cv::Mat single;
  if (raw.channels() == 1) {
    single = raw;
  } else {
    // palette-expanded or color-coded masks: channels must agree
    std::vector<cv::Mat> ch;
    cv::split(raw, ch);
    single = ch[0];
  }
  MaskImage out(single.rows, single.cols);
  for (int y = 0; y < single.rows; ++y) {
    for (int x = 0; x < single.cols; ++x) {
      switch (single.depth()) {
        case CV_8U:
          out.at(y, x) = single.at<std::uint8_t>(y, x);
          break;
        case CV_16U:
          out.at(y, x) = single.at<std::uint16_t>(y, x);
          break;
        default:
          fail("mask read (unsupported depth)", path);
      }
    }
  }
  return out;
}

void save_mask(const std::string& path, const MaskImage& mask) {
  if (mask.empty()) throw InvalidInputError("save_mask: empty mask");
  cv::Mat m(mask.h, mask.w, CV_8UC1);
  for (int y = 0; y < mask.h; ++y) {
    for (int x = 0; x < mask.w; ++x) {
      const std::int32_t v = mask.at(y, x);
      if (v < 0 || v > 255) throw InvalidInputError("save_mask: class id out of byte range");
      m.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(v);
    }
  }
  if (!cv::imwrite(path, m)) fail("mask write", path);
}

void save_gray16(const std::string& path, int h, int w,
                 const std::vector<std::uint16_t>& values) {
  if (h <= 0 || w <= 0 || values.size() != static_cast<std::size_t>(h) * w)
    throw InvalidInputError("save_gray16: bad dimensions");
  cv::Mat m(h, w, CV_16UC1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.at<std::uint16_t>(y, x) = values[static_cast<std::size_t>(y) * w + x];
  if (!cv::imwrite(path, m)) fail("gray16 write", path);
}

std::vector<std::uint16_t> load_gray16(const std::string& path, int& h, int& w) {
  cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (m.empty() || m.channels() != 1 || m.depth() != CV_16U) fail("gray16 read", path);
  h = m.rows;
  w = m.cols;
  std::vector<std::uint16_t> out(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out[static_cast<std::size_t>(y) * w + x] = m.at<std::uint16_t>(y, x);
  return out;
}

void save_bilevel(const std::string& path, const BinaryMask& mask) {
  if (mask.empty()) throw InvalidInputError("save_bilevel: empty mask");
  cv::Mat m(mask.h, mask.w, CV_8UC1);
  for (int y = 0; y < mask.h; ++y)
    for (int x = 0; x < mask.w; ++x) m.at<std::uint8_t>(y, x) = mask.at(y, x) ? 255 : 0;
  if (!cv::imwrite(path, m, {cv::IMWRITE_PNG_BILEVEL, 1})) fail("bilevel write", path);
}

BinaryMask load_bilevel(const std::string& path) {
  cv::Mat m = cv::imread(path, cv::IMREAD_GRAYSCALE);
  if (m.empty()) fail("bilevel read", path);
  BinaryMask out(m.rows, m.cols);
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x) out.at(y, x) = m.at<std::uint8_t>(y, x) >= 128 ? 1 : 0;
  return out;
}

}  // namespace mil::io
