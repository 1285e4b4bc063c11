#pragma once

#include <cstdint>

#include "compnerf/core/types.hpp"

namespace compnerf::kernels {

// Hot inner loops, implemented twice: a plain serial reference and an
// OpenMP version that parallelizes the outer loop while keeping the exact
// per-output accumulation order of the serial code. Tests compare the two;
// the benchmark tool times them.

struct Conv3dDims {
  int64_t c_in, d, h, w;     // input
  int64_t c_out;             // output channels
  int64_t od, oh, ow;        // output spatial extents
  int64_t stride, padding;   // kernel is 3x3x3
};

namespace serial {

// c[M,N] = a[M,K] * b[K,N]; bt is b pre-transposed to [N,K].
void matmul(const real* a, const real* bt, real* c, int64_t m, int64_t k, int64_t n);

void conv3d_forward(const real* x, const real* kern, const real* bias, real* y,
                    const Conv3dDims& dm);
void conv3d_grad_input(const real* gy, const real* kern, real* gx, const Conv3dDims& dm);
void conv3d_grad_kernel(const real* gy, const real* x, real* gk, real* gbias,
                        const Conv3dDims& dm);

}  // namespace serial

namespace omp {

void matmul(const real* a, const real* bt, real* c, int64_t m, int64_t k, int64_t n);

void conv3d_forward(const real* x, const real* kern, const real* bias, real* y,
                    const Conv3dDims& dm);
void conv3d_grad_input(const real* gy, const real* kern, real* gx, const Conv3dDims& dm);
void conv3d_grad_kernel(const real* gy, const real* x, real* gk, real* gbias,
                        const Conv3dDims& dm);

}  // namespace omp

// Dispatch by the process thread setting.
void matmul(const real* a, const real* bt, real* c, int64_t m, int64_t k, int64_t n);
void conv3d_forward(const real* x, const real* kern, const real* bias, real* y,
                    const Conv3dDims& dm);
void conv3d_grad_input(const real* gy, const real* kern, real* gx, const Conv3dDims& dm);
void conv3d_grad_kernel(const real* gy, const real* x, real* gk, real* gbias,
                        const Conv3dDims& dm);

}  // namespace compnerf::kernels
