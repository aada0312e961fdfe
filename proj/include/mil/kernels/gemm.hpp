#pragma once

#include <cstdint>

#include "mil/common.hpp"

// Dense matrix kernels, row-major. Each kernel comes in a `_serial` reference
// and a `_parallel` OpenMP variant. The parallel variants partition work over
// output rows only and keep the inner summation order of the serial code, so
// the two produce bit-identical results for any thread count; the equivalence
// is asserted in the test suite. The unsuffixed entry points dispatch on
// parallel::enabled().

namespace mil::kernels {

/// C(MxN) = A(MxK) * B(KxN), plus C += ... when accumulate.
void gemm_nn_serial(std::int64_t M, std::int64_t N, std::int64_t K, const real_t* A,
                    const real_t* B, real_t* C, bool accumulate = false);
void gemm_nn_parallel(std::int64_t M, std::int64_t N, std::int64_t K, const real_t* A,
                      const real_t* B, real_t* C, bool accumulate = false);
void gemm_nn(std::int64_t M, std::int64_t N, std::int64_t K, const real_t* A, const real_t* B,
             real_t* C, bool accumulate = false);

/// C(MxN) = A(MxK) * B(NxK)^T.
void gemm_nt_serial(std::int64_t M, std::int64_t N, std::int64_t K, const real_t* A,
                    const real_t* B, real_t* C, bool accumulate = false);
void gemm_nt_parallel(std::int64_t M, std::int64_t N, std::int64_t K, const real_t* A,
                      const real_t* B, real_t* C, bool accumulate = false);
void gemm_nt(std::int64_t M, std::int64_t N, std::int64_t K, const real_t* A, const real_t* B,
             real_t* C, bool accumulate = false);

/// C(MxN) = A(KxM)^T * B(KxN).
void gemm_tn_serial(std::int64_t M, std::int64_t N, std::int64_t K, const real_t* A,
                    const real_t* B, real_t* C, bool accumulate = false);
void gemm_tn_parallel(std::int64_t M, std::int64_t N, std::int64_t K, const real_t* A,
                      const real_t* B, real_t* C, bool accumulate = false);
void gemm_tn(std::int64_t M, std::int64_t N, std::int64_t K, const real_t* A, const real_t* B,
             real_t* C, bool accumulate = false);

}  // namespace mil::kernels
