#include "mil/kernels/gemm.hpp"

#include "mil/parallel.hpp"

namespace mil::kernels {

namespace {

// One output row of C = A * B, ikj order.
inline void row_nn(std::int64_t i, std::int64_t N, std::int64_t K, const real_t* A,
                   const real_t* B, real_t* C, bool accumulate) {
  real_t* c = C + i * N;
  if (!accumulate)
    for (std::int64_t j = 0; j < N; ++j) c[j] = 0;
  const real_t* a = A + i * K;
  for (std::int64_t k = 0; k < K; ++k) {
    const real_t av = a[k];
    const real_t* b = B + k * N;
    for (std::int64_t j = 0; j < N; ++j) c[j] += av * b[j];
  }
}

inline void row_nt(std::int64_t i, std::int64_t N, std::int64_t K, const real_t* A,
                   const real_t* B, real_t* C, bool accumulate) {
  real_t* c = C + i * N;
  const real_t* a = A + i * K;
  for (std::int64_t j = 0; j < N; ++j) {
    const real_t* b = B + j * K;
    real_t acc = 0;
    for (std::int64_t k = 0; k < K; ++k) acc += a[k] * b[k];
    c[j] = accumulate ? c[j] + acc : acc;
  }
}

inline void row_tn(std::int64_t i, std::int64_t M, std::int64_t N, std::int64_t K,
                   const real_t* A, const real_t* B, real_t* C, bool accumulate) {
  (void)M;
  real_t* c = C + i * N;
  if (!accumulate)
    for (std::int64_t j = 0; j < N; ++j) c[j] = 0;
  for (std::int64_t k = 0; k < K; ++k) {
    const real_t av = A[k * M + i];
    const real_t* b = B + k * N;
    for (std::int64_t j = 0; j < N; ++j) c[j] += av * b[j];
  }
}

}  // namespace

void gemm_nn_serial(std::int64_t M, std::int64_t N, std::int64_t K, const real_t* A,
                    const real_t* B, real_t* C, bool accumulate) {
  for (std::int64_t i = 0; i < M; ++i) row_nn(i, N, K, A, B, C, accumulate);
}

void gemm_nn_parallel(std::int64_t M, std::int64_t N, std::int64_t K, const real_t* A,
                      const real_t* B, real_t* C, bool accumulate) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < M; ++i) row_nn(i, N, K, A, B, C, accumulate);
}

void gemm_nn(std::int64_t M, std::int64_t N, std::int64_t K, const real_t* A, const real_t* B,
             real_t* C, bool accumulate) {
  if (parallel::enabled())
    gemm_nn_parallel(M, N, K, A, B, C, accumulate);
  else
    gemm_nn_serial(M, N, K, A, B, C, accumulate);
}

void gemm_nt_serial(std::int64_t M, std::int64_t N, std::int64_t K, const real_t* A,
                    const real_t* B, real_t* C, bool accumulate) {
  for (std::int64_t i = 0; i < M; ++i) row_nt(i, N, K, A, B, C, accumulate);
}

void gemm_nt_parallel(std::int64_t M, std::int64_t N, std::int64_t K, const real_t* A,
                      const real_t* B, real_t* C, bool accumulate) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < M; ++i) row_nt(i, N, K, A, B, C, accumulate);
}

void gemm_nt(std::int64_t M, std::int64_t N, std::int64_t K, const real_t* A, const real_t* B,
             real_t* C, bool accumulate) {
  if (parallel::enabled())
    gemm_nt_parallel(M, N, K, A, B, C, accumulate);
  else
    gemm_nt_serial(M, N, K, A, B, C, accumulate);
}

void gemm_tn_serial(std::int64_t M, std::int64_t N, std::int64_t K, const real_t* A,
                    const real_t* B, real_t* C, bool accumulate) {
  for (std::int64_t i = 0; i < M; ++i) row_tn(i, M, N, K, A, B, C, accumulate);
}

void gemm_tn_parallel(std::int64_t M, std::int64_t N, std::int64_t K, const real_t* A,
                      const real_t* B, real_t* C, bool accumulate) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < M; ++i) row_tn(i, M, N, K, A, B, C, accumulate);
}

void gemm_tn(std::int64_t M, std::int64_t N, std::int64_t K, const real_t* A, const real_t* B,
             real_t* C, bool accumulate) {
  if (parallel::enabled())
    gemm_tn_parallel(M, N, K, A, B, C, accumulate);
  else
    gemm_tn_serial(M, N, K, A, B, C, accumulate);
}

}  // namespace mil::kernels
