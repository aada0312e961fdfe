#include "mil/kernels/resize.hpp"

#include <algorithm>
#include <cmath>

#include "mil/parallel.hpp"

namespace mil::kernels {

namespace {

struct Tap {
  int lo;
  int hi;
  real_t frac;
};

inline Tap bilinear_tap(int o, int in_len, real_t scale) {
  const real_t src = (static_cast<real_t>(o) + real_t{0.5}) * scale - real_t{0.5};
  const real_t fl = std::floor(src);
  int lo = static_cast<int>(fl);
  real_t frac = src - fl;
  int hi = lo + 1;
  lo = std::clamp(lo, 0, in_len - 1);
  hi = std::clamp(hi, 0, in_len - 1);
  return {lo, hi, frac};
}

void bilinear_row(const ImageU8& in, ImageU8& out, const std::vector<Tap>& xtaps, real_t yscale,
                  int oy) {
  const Tap ty = bilinear_tap(oy, in.h, yscale);
  for (int ox = 0; ox < out.w; ++ox) {
    const Tap& tx = xtaps[static_cast<std::size_t>(ox)];
    for (int c = 0; c < 3; ++c) {
      const real_t v00 = in.at(ty.lo, tx.lo, c);
      const real_t v01 = in.at(ty.lo, tx.hi, c);
      const real_t v10 = in.at(ty.hi, tx.lo, c);
      const real_t v11 = in.at(ty.hi, tx.hi, c);
      const real_t top = v00 + (v01 - v00) * tx.frac;
      const real_t bot = v10 + (v11 - v10) * tx.frac;
      const real_t v = top + (bot - top) * ty.frac;
      out.at(oy, ox, c) =
          static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
    }
  }
}

inline int nearest_src(int o, int in_len, real_t scale) {
  const int s = static_cast<int>(std::floor((static_cast<real_t>(o) + real_t{0.5}) * scale));
  return std::clamp(s, 0, in_len - 1);
}

void check_nonempty(int h, int w) {
  if (h <= 0 || w <= 0) throw InvalidInputError("resize: empty image");
}

}  // namespace

ImageU8 resize_bilinear_serial(const ImageU8& in, int out_h, int out_w) {
  check_nonempty(in.h, in.w);
  check_nonempty(out_h, out_w);
  ImageU8 out(out_h, out_w);
  const real_t ys = static_cast<real_t>(in.h) / out_h;
  const real_t xs = static_cast<real_t>(in.w) / out_w;
  std::vector<Tap> xtaps(static_cast<std::size_t>(out_w));
  for (int ox = 0; ox < out_w; ++ox) xtaps[static_cast<std::size_t>(ox)] = bilinear_tap(ox, in.w, xs);
  for (int oy = 0; oy < out_h; ++oy) bilinear_row(in, out, xtaps, ys, oy);
  return out;
}

ImageU8 resize_bilinear_parallel(const ImageU8& in, int out_h, int out_w) {
  check_nonempty(in.h, in.w);
  check_nonempty(out_h, out_w);
  ImageU8 out(out_h, out_w);
  const real_t ys = static_cast<real_t>(in.h) / out_h;
  const real_t xs = static_cast<real_t>(in.w) / out_w;
  std::vector<Tap> xtaps(static_cast<std::size_t>(out_w));
  for (int ox = 0; ox < out_w; ++ox) xtaps[static_cast<std::size_t>(ox)] = bilinear_tap(ox, in.w, xs);
#pragma omp parallel for schedule(static)
  for (int oy = 0; oy < out_h; ++oy) bilinear_row(in, out, xtaps, ys, oy);
  return out;
}

ImageU8 resize_bilinear(const ImageU8& in, int out_h, int out_w) {
  return parallel::enabled() ? resize_bilinear_parallel(in, out_h, out_w)
                             : resize_bilinear_serial(in, out_h, out_w);
}

MaskImage resize_nearest_serial(const MaskImage& in, int out_h, int out_w) {
  check_nonempty(in.h, in.w);
  check_nonempty(out_h, out_w);
  MaskImage out(out_h, out_w);
  const real_t ys = static_cast<real_t>(in.h) / out_h;
  const real_t xs = static_cast<real_t>(in.w) / out_w;
  for (int oy = 0; oy < out_h; ++oy) {
    const int sy = nearest_src(oy, in.h, ys);
    for (int ox = 0; ox < out_w; ++ox) out.at(oy, ox) = in.at(sy, nearest_src(ox, in.w, xs));
  }
  return out;
}

MaskImage resize_nearest_parallel(const MaskImage& in, int out_h, int out_w) {
  check_nonempty(in.h, in.w);
  check_nonempty(out_h, out_w);
  MaskImage out(out_h, out_w);
  const real_t ys = static_cast<real_t>(in.h) / out_h;
  const real_t xs = static_cast<real_t>(in.w) / out_w;
#pragma omp parallel for schedule(static)
  for (int oy = 0; oy < out_h; ++oy) {
    const int sy = nearest_src(oy, in.h, ys);
    for (int ox = 0; ox < out_w; ++ox) out.at(oy, ox) = in.at(sy, nearest_src(ox, in.w, xs));
  }
  return out;
}

MaskImage resize_nearest(const MaskImage& in, int out_h, int out_w) {
  return parallel::enabled() ? resize_nearest_parallel(in, out_h, out_w)
                             : resize_nearest_serial(in, out_h, out_w);
}

}  // namespace mil::kernels
