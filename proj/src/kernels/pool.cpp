#include "mil/kernels/pool.hpp"

#include <limits>

#include "mil/parallel.hpp"

namespace mil::kernels {

namespace {

void maxpool_sample(const Tensor& x, const PoolGeom& g, Tensor& y,
                    std::vector<std::int64_t>& argmax, std::int64_t n) {
  const std::int64_t C = x.dim(1);
  const int H = static_cast<int>(x.dim(2));
  const int W = static_cast<int>(x.dim(3));
  const int OH = g.out_extent(H);
  const int OW = g.out_extent(W);
  for (std::int64_t c = 0; c < C; ++c) {
    const std::int64_t plane_base = (n * C + c) * H * W;
    const real_t* plane = x.data() + plane_base;
    real_t* out = y.data() + (n * C + c) * OH * OW;
    std::int64_t* amax = argmax.data() + (n * C + c) * OH * OW;
    std::int64_t p = 0;
    for (int oy = 0; oy < OH; ++oy) {
      for (int ox = 0; ox < OW; ++ox, ++p) {
        real_t best = -std::numeric_limits<real_t>::infinity();
        std::int64_t best_idx = -1;
        for (int ky = 0; ky < g.ksize; ++ky) {
          const int yy = oy * g.stride - g.pad + ky;
          if (yy < 0 || yy >= H) continue;
          for (int kx = 0; kx < g.ksize; ++kx) {
            const int xx = ox * g.stride - g.pad + kx;
            if (xx < 0 || xx >= W) continue;
            const real_t v = plane[yy * W + xx];
            if (v > best) {
              best = v;
              best_idx = plane_base + yy * W + xx;
            }
          }
        }
        out[p] = best;
        amax[p] = best_idx;
      }
    }
  }
}

void maxpool_backward_sample(const Tensor& dy, const std::vector<std::int64_t>& argmax,
                             Tensor& dx, std::int64_t n) {
  const std::int64_t per_sample_out = dy.dim(1) * dy.dim(2) * dy.dim(3);
  const std::int64_t per_sample_in = dx.dim(1) * dx.dim(2) * dx.dim(3);
  real_t* gx = dx.data();
  std::fill(gx + n * per_sample_in, gx + (n + 1) * per_sample_in, real_t{0});
  const real_t* gy = dy.data() + n * per_sample_out;
  const std::int64_t* amax = argmax.data() + n * per_sample_out;
  for (std::int64_t i = 0; i < per_sample_out; ++i) {
    if (amax[i] >= 0) gx[amax[i]] += gy[i];
  }
}

}  // namespace

void maxpool2d_forward_serial(const Tensor& x, const PoolGeom& g, Tensor& y,
                              std::vector<std::int64_t>& argmax) {
  const std::int64_t N = x.dim(0);
  for (std::int64_t n = 0; n < N; ++n) maxpool_sample(x, g, y, argmax, n);
}

void maxpool2d_forward_parallel(const Tensor& x, const PoolGeom& g, Tensor& y,
                                std::vector<std::int64_t>& argmax) {
  const std::int64_t N = x.dim(0);
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < N; ++n) maxpool_sample(x, g, y, argmax, n);
}

void maxpool2d_forward(const Tensor& x, const PoolGeom& g, Tensor& y,
                       std::vector<std::int64_t>& argmax) {
  if (parallel::enabled())
    maxpool2d_forward_parallel(x, g, y, argmax);
  else
    maxpool2d_forward_serial(x, g, y, argmax);
}

void maxpool2d_backward_serial(const Tensor& dy, const std::vector<std::int64_t>& argmax,
                               Tensor& dx) {
  const std::int64_t N = dy.dim(0);
  for (std::int64_t n = 0; n < N; ++n) maxpool_backward_sample(dy, argmax, dx, n);
}

void maxpool2d_backward_parallel(const Tensor& dy, const std::vector<std::int64_t>& argmax,
                                 Tensor& dx) {
  const std::int64_t N = dy.dim(0);
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < N; ++n) maxpool_backward_sample(dy, argmax, dx, n);
}

void maxpool2d_backward(const Tensor& dy, const std::vector<std::int64_t>& argmax, Tensor& dx) {
  if (parallel::enabled())
    maxpool2d_backward_parallel(dy, argmax, dx);
  else
    maxpool2d_backward_serial(dy, argmax, dx);
}

void gap_forward_serial(const Tensor& x, Tensor& y) {
  const std::int64_t NC = x.dim(0) * x.dim(1);
  const std::int64_t HW = x.dim(2) * x.dim(3);
  for (std::int64_t i = 0; i < NC; ++i) {
    const real_t* plane = x.data() + i * HW;
    real_t acc = 0;
    for (std::int64_t p = 0; p < HW; ++p) acc += plane[p];
    y[i] = acc / static_cast<real_t>(HW);
  }
}

void gap_forward_parallel(const Tensor& x, Tensor& y) {
  const std::int64_t NC = x.dim(0) * x.dim(1);
  const std::int64_t HW = x.dim(2) * x.dim(3);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < NC; ++i) {
    const real_t* plane = x.data() + i * HW;
    real_t acc = 0;
    for (std::int64_t p = 0; p < HW; ++p) acc += plane[p];
    y[i] = acc / static_cast<real_t>(HW);
  }
}

void gap_forward(const Tensor& x, Tensor& y) {
  if (parallel::enabled())
    gap_forward_parallel(x, y);
  else
    gap_forward_serial(x, y);
}

void gap_backward_serial(const Tensor& dy, std::int64_t H, std::int64_t W, Tensor& dx) {
  const std::int64_t NC = dy.dim(0) * dy.dim(1);
  const std::int64_t HW = H * W;
  for (std::int64_t i = 0; i < NC; ++i) {
    const real_t v = dy[i] / static_cast<real_t>(HW);
    real_t* plane = dx.data() + i * HW;
    for (std::int64_t p = 0; p < HW; ++p) plane[p] = v;
  }
}

void gap_backward_parallel(const Tensor& dy, std::int64_t H, std::int64_t W, Tensor& dx) {
  const std::int64_t NC = dy.dim(0) * dy.dim(1);
  const std::int64_t HW = H * W;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < NC; ++i) {
    const real_t v = dy[i] / static_cast<real_t>(HW);
    real_t* plane = dx.data() + i * HW;
    for (std::int64_t p = 0; p < HW; ++p) plane[p] = v;
  }
}

void gap_backward(const Tensor& dy, std::int64_t H, std::int64_t W, Tensor& dx) {
  if (parallel::enabled())
    gap_backward_parallel(dy, H, W, dx);
  else
    gap_backward_serial(dy, H, W, dx);
}

}  // namespace mil::kernels
