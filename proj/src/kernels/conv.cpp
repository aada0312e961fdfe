#include "mil/kernels/conv.hpp"

#include <vector>

#include "mil/kernels/gemm.hpp"
#include "mil/parallel.hpp"

namespace mil::kernels {

void im2col(const real_t* in, int C, int H, int W, const ConvGeom& g, real_t* cols) {
  const int OH = g.out_extent(H);
  const int OW = g.out_extent(W);
  const std::int64_t P = static_cast<std::int64_t>(OH) * OW;
  std::int64_t row = 0;
  for (int c = 0; c < C; ++c) {
    const real_t* plane = in + static_cast<std::int64_t>(c) * H * W;
    for (int ky = 0; ky < g.ksize; ++ky) {
      for (int kx = 0; kx < g.ksize; ++kx, ++row) {
        real_t* out = cols + row * P;
        std::int64_t p = 0;
        for (int oy = 0; oy < OH; ++oy) {
          const int y = oy * g.stride - g.pad + ky;
          if (y < 0 || y >= H) {
            for (int ox = 0; ox < OW; ++ox) out[p++] = 0;
            continue;
          }
          const real_t* line = plane + static_cast<std::int64_t>(y) * W;
          for (int ox = 0; ox < OW; ++ox) {
            const int x = ox * g.stride - g.pad + kx;
            out[p++] = (x < 0 || x >= W) ? real_t{0} : line[x];
          }
        }
      }
    }
  }
}

void col2im(const real_t* cols, int C, int H, int W, const ConvGeom& g, real_t* grad_in) {
  const int OH = g.out_extent(H);
  const int OW = g.out_extent(W);
  const std::int64_t P = static_cast<std::int64_t>(OH) * OW;
  for (int c = 0; c < C; ++c) {
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        real_t acc = 0;
        // all kernel taps (ky,kx) whose window contains (y,x)
        for (int ky = 0; ky < g.ksize; ++ky) {
          const int ny = y + g.pad - ky;
          if (ny < 0 || ny % g.stride != 0) continue;
          const int oy = ny / g.stride;
          if (oy >= OH) continue;
          for (int kx = 0; kx < g.ksize; ++kx) {
            const int nx = x + g.pad - kx;
            if (nx < 0 || nx % g.stride != 0) continue;
            const int ox = nx / g.stride;
            if (ox >= OW) continue;
            const std::int64_t row = (static_cast<std::int64_t>(c) * g.ksize + ky) * g.ksize + kx;
            acc += cols[row * P + oy * OW + ox];
          }
        }
        grad_in[(static_cast<std::int64_t>(c) * H + y) * W + x] = acc;
      }
    }
  }
}

namespace {

void forward_sample(const Tensor& x, const Tensor& w, const real_t* b, const ConvGeom& g,
                    Tensor& y, Tensor* cols_cache, std::int64_t n, real_t* scratch) {
  const int H = static_cast<int>(x.dim(2));
  const int W = static_cast<int>(x.dim(3));
  const int OH = g.out_extent(H);
  const int OW = g.out_extent(W);
  const std::int64_t P = static_cast<std::int64_t>(OH) * OW;
  const std::int64_t ckk = g.patch_len();

  real_t* cols = cols_cache ? cols_cache->data() + n * ckk * P : scratch;
  im2col(x.data() + n * x.dim(1) * H * W, g.in_c, H, W, g, cols);

  real_t* out = y.data() + n * g.out_c * P;
  gemm_nn_serial(g.out_c, P, ckk, w.data(), cols, out);
  if (b) {
    for (int oc = 0; oc < g.out_c; ++oc) {
      real_t* o = out + static_cast<std::int64_t>(oc) * P;
      const real_t bias = b[oc];
      for (std::int64_t p = 0; p < P; ++p) o[p] += bias;
    }
  }
}

void backward_input_sample(const Tensor& dy, const Tensor& w, const ConvGeom& g, Tensor& dx,
                           std::int64_t n, real_t* scratch) {
  const int H = static_cast<int>(dx.dim(2));
  const int W = static_cast<int>(dx.dim(3));
  const int OH = g.out_extent(H);
  const int OW = g.out_extent(W);
  const std::int64_t P = static_cast<std::int64_t>(OH) * OW;
  const std::int64_t ckk = g.patch_len();

  // dcols = w^T * dy_n, then fold back
  gemm_tn_serial(ckk, P, g.out_c, w.data(), dy.data() + n * g.out_c * P, scratch);
  col2im(scratch, g.in_c, H, W, g, dx.data() + n * static_cast<std::int64_t>(g.in_c) * H * W);
}

// dw rows for one output channel; n-then-pixel order matches the serial pass.
void backward_weights_channel(const Tensor& dy, const Tensor& cols, std::int64_t oc, Tensor& dw,
                              real_t* db) {
  const std::int64_t N = dy.dim(0);
  const std::int64_t OC = dy.dim(1);
  const std::int64_t P = dy.dim(2) * dy.dim(3);
  const std::int64_t ckk = cols.dim(1);
  real_t* dwr = dw.data() + oc * ckk;
  real_t db_acc = 0;
  for (std::int64_t n = 0; n < N; ++n) {
    const real_t* dyn = dy.data() + (n * OC + oc) * P;
    const real_t* cn = cols.data() + n * ckk * P;
    for (std::int64_t r = 0; r < ckk; ++r) {
      const real_t* col = cn + r * P;
      real_t acc = dwr[r];
      for (std::int64_t p = 0; p < P; ++p) acc += dyn[p] * col[p];
      dwr[r] = acc;
    }
    if (db) {
      for (std::int64_t p = 0; p < P; ++p) db_acc += dyn[p];
    }
  }
  if (db) db[oc] += db_acc;
}

}  // namespace

void conv2d_forward_serial(const Tensor& x, const Tensor& w, const real_t* b, const ConvGeom& g,
                           Tensor& y, Tensor* cols_cache) {
  const std::int64_t N = x.dim(0);
  const int H = static_cast<int>(x.dim(2));
  const int W = static_cast<int>(x.dim(3));
  std::vector<real_t> scratch;
  if (!cols_cache)
    scratch.resize(static_cast<std::size_t>(g.patch_len()) * g.out_extent(H) * g.out_extent(W));
  for (std::int64_t n = 0; n < N; ++n)
    forward_sample(x, w, b, g, y, cols_cache, n, scratch.data());
}

void conv2d_forward_parallel(const Tensor& x, const Tensor& w, const real_t* b, const ConvGeom& g,
                             Tensor& y, Tensor* cols_cache) {
  const std::int64_t N = x.dim(0);
  const int H = static_cast<int>(x.dim(2));
  const int W = static_cast<int>(x.dim(3));
  const std::size_t scratch_len =
      cols_cache ? 0
                 : static_cast<std::size_t>(g.patch_len()) * g.out_extent(H) * g.out_extent(W);
#pragma omp parallel
  {
    std::vector<real_t> scratch(scratch_len);
#pragma omp for schedule(static)
    for (std::int64_t n = 0; n < N; ++n)
      forward_sample(x, w, b, g, y, cols_cache, n, scratch.data());
  }
}

void conv2d_forward(const Tensor& x, const Tensor& w, const real_t* b, const ConvGeom& g,
                    Tensor& y, Tensor* cols_cache) {
  if (parallel::enabled())
    conv2d_forward_parallel(x, w, b, g, y, cols_cache);
  else
    conv2d_forward_serial(x, w, b, g, y, cols_cache);
}

void conv2d_backward_input_serial(const Tensor& dy, const Tensor& w, const ConvGeom& g,
                                  Tensor& dx) {
  const std::int64_t N = dx.dim(0);
  const int H = static_cast<int>(dx.dim(2));
  const int W = static_cast<int>(dx.dim(3));
  std::vector<real_t> scratch(static_cast<std::size_t>(g.patch_len()) * g.out_extent(H) *
                              g.out_extent(W));
  for (std::int64_t n = 0; n < N; ++n) backward_input_sample(dy, w, g, dx, n, scratch.data());
}

void conv2d_backward_input_parallel(const Tensor& dy, const Tensor& w, const ConvGeom& g,
                                    Tensor& dx) {
  const std::int64_t N = dx.dim(0);
  const int H = static_cast<int>(dx.dim(2));
  const int W = static_cast<int>(dx.dim(3));
  const std::size_t scratch_len =
      static_cast<std::size_t>(g.patch_len()) * g.out_extent(H) * g.out_extent(W);
#pragma omp parallel
  {
    std::vector<real_t> scratch(scratch_len);
#pragma omp for schedule(static)
    for (std::int64_t n = 0; n < N; ++n) backward_input_sample(dy, w, g, dx, n, scratch.data());
  }
}

void conv2d_backward_input(const Tensor& dy, const Tensor& w, const ConvGeom& g, Tensor& dx) {
  if (parallel::enabled())
    conv2d_backward_input_parallel(dy, w, g, dx);
  else
    conv2d_backward_input_serial(dy, w, g, dx);
}

void conv2d_backward_weights_serial(const Tensor& dy, const Tensor& cols_cache, Tensor& dw,
                                    real_t* db) {
  const std::int64_t OC = dy.dim(1);
  for (std::int64_t oc = 0; oc < OC; ++oc) backward_weights_channel(dy, cols_cache, oc, dw, db);
}

void conv2d_backward_weights_parallel(const Tensor& dy, const Tensor& cols_cache, Tensor& dw,
                                      real_t* db) {
  const std::int64_t OC = dy.dim(1);
#pragma omp parallel for schedule(static)
  for (std::int64_t oc = 0; oc < OC; ++oc) backward_weights_channel(dy, cols_cache, oc, dw, db);
}

void conv2d_backward_weights(const Tensor& dy, const Tensor& cols_cache, Tensor& dw, real_t* db) {
  if (parallel::enabled())
    conv2d_backward_weights_parallel(dy, cols_cache, dw, db);
  else
    conv2d_backward_weights_serial(dy, cols_cache, dw, db);
}

}  // namespace mil::kernels
