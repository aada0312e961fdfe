#pragma once

#include "mil/common.hpp"
#include "mil/image.hpp"

namespace mil::kernels {

// Resampling convention (both kernels): pixel centers sit at half-integer
// coordinates, so a destination pixel `o` maps to source coordinate
// (o + 0.5) * in/out - 0.5. Bilinear taps outside the image clamp to the
// border; channel values round to nearest (half away from zero).

/// Bilinear RGB resize.
ImageU8 resize_bilinear_serial(const ImageU8& in, int out_h, int out_w);
ImageU8 resize_bilinear_parallel(const ImageU8& in, int out_h, int out_w);
ImageU8 resize_bilinear(const ImageU8& in, int out_h, int out_w);

/// Nearest-neighbor class-id resize. Only source ids appear in the output.
MaskImage resize_nearest_serial(const MaskImage& in, int out_h, int out_w);
MaskImage resize_nearest_parallel(const MaskImage& in, int out_h, int out_w);
MaskImage resize_nearest(const MaskImage& in, int out_h, int out_w);

}  // namespace mil::kernels
