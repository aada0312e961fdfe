#include "mil/dataset/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mil/rng.hpp"

namespace mil::dataset {

namespace {

struct Rgb {
  int r, g, b;
};

inline std::uint8_t clamp_u8(int v) {
  return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
}

void paint(ImageU8& img, MaskImage& mask, int y, int x, const Rgb& c, int noise,
           std::int32_t class_id, rng::Engine& eng) {
  const int dr = noise > 0 ? static_cast<int>(rng::uniform_below(eng, 2 * noise + 1)) - noise : 0;
  const int dg = noise > 0 ? static_cast<int>(rng::uniform_below(eng, 2 * noise + 1)) - noise : 0;
  const int db = noise > 0 ? static_cast<int>(rng::uniform_below(eng, 2 * noise + 1)) - noise : 0;
  img.at(y, x, 0) = clamp_u8(c.r + dr);
  img.at(y, x, 1) = clamp_u8(c.g + dg);
  img.at(y, x, 2) = clamp_u8(c.b + db);
  mask.at(y, x) = class_id;
}

void draw_background(ImageU8& img, MaskImage& mask, int d, rng::Engine& eng) {
  const Rgb base{static_cast<int>(60 + rng::uniform_below(eng, 81)),
                 static_cast<int>(60 + rng::uniform_below(eng, 81)),
                 static_cast<int>(60 + rng::uniform_below(eng, 81))};
  const double angle = rng::uniform(eng, 0.0, 2.0 * M_PI);
  const double amp = rng::uniform(eng, 0.0, 30.0);
  const double gx = std::cos(angle), gy = std::sin(angle);
  for (int y = 0; y < d; ++y) {
    for (int x = 0; x < d; ++x) {
      const double t = (gx * x + gy * y) / d;  // in [-1, 1]
      const int shift = static_cast<int>(std::lround(amp * t));
      paint(img, mask, y, x, {base.r + shift, base.g + shift, base.b + shift}, 12, 0, eng);
    }
  }
}

void draw_disk(ImageU8& img, MaskImage& mask, int cy, int cx, int radius, const Rgb& color,
               std::int32_t class_id, rng::Engine& eng) {
  const int r2 = radius * radius;
  for (int y = std::max(0, cy - radius); y <= std::min(img.h - 1, cy + radius); ++y) {
    for (int x = std::max(0, cx - radius); x <= std::min(img.w - 1, cx + radius); ++x) {
      const int dy = y - cy, dx = x - cx;
      if (dy * dy + dx * dx <= r2) paint(img, mask, y, x, color, 20, class_id, eng);
    }
  }
}

void draw_rect(ImageU8& img, MaskImage& mask, int top, int left, int h, int w, const Rgb& color,
               std::int32_t class_id, rng::Engine& eng) {
  for (int y = std::max(0, top); y < std::min(img.h, top + h); ++y)
    for (int x = std::max(0, left); x < std::min(img.w, left + w); ++x)
      paint(img, mask, y, x, color, 20, class_id, eng);
}

void draw_triangle(ImageU8& img, MaskImage& mask, int d, const Rgb& color, std::int32_t class_id,
                   rng::Engine& eng) {
  // vertices at least d/6 apart in bounding box so the fill is visible
  int x0, y0, x1, y1, x2, y2;
  do {
    x0 = static_cast<int>(rng::uniform_below(eng, d));
    y0 = static_cast<int>(rng::uniform_below(eng, d));
    x1 = static_cast<int>(rng::uniform_below(eng, d));
    y1 = static_cast<int>(rng::uniform_below(eng, d));
    x2 = static_cast<int>(rng::uniform_below(eng, d));
    y2 = static_cast<int>(rng::uniform_below(eng, d));
  } while (std::abs((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)) < (d * d) / 18);

  const auto edge = [](int ax, int ay, int bx, int by, int px, int py) {
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
  };
  const int lo_y = std::max(0, std::min({y0, y1, y2}));
  const int hi_y = std::min(img.h - 1, std::max({y0, y1, y2}));
  const int lo_x = std::max(0, std::min({x0, x1, x2}));
  const int hi_x = std::min(img.w - 1, std::max({x0, x1, x2}));
  for (int y = lo_y; y <= hi_y; ++y) {
    for (int x = lo_x; x <= hi_x; ++x) {
      const int e0 = edge(x0, y0, x1, y1, x, y);
      const int e1 = edge(x1, y1, x2, y2, x, y);
      const int e2 = edge(x2, y2, x0, y0, x, y);
      const bool inside = (e0 >= 0 && e1 >= 0 && e2 >= 0) || (e0 <= 0 && e1 <= 0 && e2 <= 0);
      if (inside) paint(img, mask, y, x, color, 20, class_id, eng);
    }
  }
}

}  // namespace

MetaClassMap synthetic_meta_class() {
  return MetaClassMap{"SyntheticTarget", {kSyntheticTargetClassId}};
}

std::vector<ImageRecord> generate_synthetic(std::uint64_t seed, int n_images, int d) {
  if (n_images < 2) throw InvalidInputError("generate_synthetic: n_images must be >= 2");
  if (d < 16) throw InvalidInputError("generate_synthetic: image side too small");

  const MetaClassMap meta = synthetic_meta_class();
  const std::int64_t threshold = scaled_pixel_threshold(20000, d);

  std::vector<ImageRecord> records;
  records.reserve(static_cast<std::size_t>(n_images));
  for (int i = 0; i < n_images; ++i) {
    rng::Engine eng = rng::make_engine(rng::derive_seed(seed, static_cast<std::uint64_t>(i), "synth"));

    ImageRecord rec;
    char id[32];
    std::snprintf(id, sizeof(id), "synth-%05d", i);
    rec.image_id = id;
    rec.split = (i % 4 == 3) ? Split::kTest : Split::kTrain;
    rec.pixels = ImageU8(d, d);
    MaskImage mask(d, d);

    draw_background(rec.pixels, mask, d, eng);

    const bool with_target = rng::uniform01(eng) < 0.5;
    const int n_distractors = static_cast<int>(rng::uniform_below(eng, 3));
    for (int s = 0; s < n_distractors; ++s) {
      if (rng::uniform01(eng) < 0.5) {
        const Rgb blue{static_cast<int>(20 + rng::uniform_below(eng, 71)),
                       static_cast<int>(20 + rng::uniform_below(eng, 71)),
                       static_cast<int>(160 + rng::uniform_below(eng, 71))};
        const int h = static_cast<int>(d * rng::uniform(eng, 0.15, 0.35));
        const int w = static_cast<int>(d * rng::uniform(eng, 0.15, 0.35));
        draw_rect(rec.pixels, mask, static_cast<int>(rng::uniform_below(eng, d)),
                  static_cast<int>(rng::uniform_below(eng, d)), h, w, blue, 2, eng);
      } else {
        const Rgb green{static_cast<int>(20 + rng::uniform_below(eng, 71)),
                        static_cast<int>(150 + rng::uniform_below(eng, 71)),
                        static_cast<int>(20 + rng::uniform_below(eng, 71))};
        draw_triangle(rec.pixels, mask, d, green, 3, eng);
      }
    }

    if (with_target) {
      // radius floor keeps a full disk above the area threshold
      const int r = static_cast<int>(std::lround(d * rng::uniform(eng, 0.17, 0.28)));
      const int cy = r + 2 + static_cast<int>(rng::uniform_below(eng, static_cast<std::uint64_t>(d - 2 * r - 3)));
      const int cx = r + 2 + static_cast<int>(rng::uniform_below(eng, static_cast<std::uint64_t>(d - 2 * r - 3)));
      const Rgb red{static_cast<int>(180 + rng::uniform_below(eng, 61)),
                    static_cast<int>(20 + rng::uniform_below(eng, 61)),
                    static_cast<int>(20 + rng::uniform_below(eng, 61))};
      draw_disk(rec.pixels, mask, cy, cx, r, red, kSyntheticTargetClassId, eng);
    }

    const LabelResult lr = binarize_label(mask, meta, threshold);
    rec.positive = lr.positive;
    rec.positive_pixel_count = lr.positive_pixel_count;
    rec.mask = std::move(mask);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace mil::dataset
