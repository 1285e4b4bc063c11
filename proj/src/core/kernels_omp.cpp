#include "compnerf/core/kernels.hpp"
#include "compnerf/core/parallel.hpp"

// The OpenMP kernels parallelize over disjoint output (or gradient) slices
// and keep the serial accumulation order within each slice, so any thread
// count produces bit-identical results.

namespace compnerf::kernels {

namespace omp {

void matmul(const real* a, const real* bt, real* c, int64_t m, int64_t k, int64_t n) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < m; ++i) {
    const real* ai = a + i * k;
    for (int64_t j = 0; j < n; ++j) {
      const real* bj = bt + j * k;
      real acc = 0;
      for (int64_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
      c[i * n + j] = acc;
    }
  }
}

void conv3d_forward(const real* x, const real* kern, const real* bias, real* y,
                    const Conv3dDims& dm) {
  const int64_t in_plane = dm.h * dm.w;
  const int64_t in_vol = dm.d * in_plane;
#pragma omp parallel for collapse(2) schedule(static)
  for (int64_t co = 0; co < dm.c_out; ++co) {
    for (int64_t oz = 0; oz < dm.od; ++oz) {
      const real* kc = kern + co * dm.c_in * 27;
      for (int64_t oy = 0; oy < dm.oh; ++oy) {
        for (int64_t ox = 0; ox < dm.ow; ++ox) {
          real acc = bias ? bias[co] : real(0);
          const int64_t z0 = oz * dm.stride - dm.padding;
          const int64_t y0 = oy * dm.stride - dm.padding;
          const int64_t x0 = ox * dm.stride - dm.padding;
          for (int64_t ci = 0; ci < dm.c_in; ++ci) {
            const real* xi = x + ci * in_vol;
            const real* kci = kc + ci * 27;
            for (int64_t kz = 0; kz < 3; ++kz) {
              const int64_t z = z0 + kz;
              if (z < 0 || z >= dm.d) continue;
              for (int64_t ky = 0; ky < 3; ++ky) {
                const int64_t yy = y0 + ky;
                if (yy < 0 || yy >= dm.h) continue;
                for (int64_t kx = 0; kx < 3; ++kx) {
                  const int64_t xx = x0 + kx;
                  if (xx < 0 || xx >= dm.w) continue;
                  acc += kci[(kz * 3 + ky) * 3 + kx] * xi[z * in_plane + yy * dm.w + xx];
                }
              }
            }
          }
          y[((co * dm.od + oz) * dm.oh + oy) * dm.ow + ox] = acc;
        }
      }
    }
  }
}

void conv3d_grad_input(const real* gy, const real* kern, real* gx, const Conv3dDims& dm) {
  const int64_t in_plane = dm.h * dm.w;
  const int64_t in_vol = dm.d * in_plane;
  const int64_t out_plane = dm.oh * dm.ow;
  const int64_t out_vol = dm.od * out_plane;
#pragma omp parallel for collapse(2) schedule(static)
  for (int64_t ci = 0; ci < dm.c_in; ++ci) {
    for (int64_t z = 0; z < dm.d; ++z) {
      for (int64_t yy = 0; yy < dm.h; ++yy) {
        for (int64_t xx = 0; xx < dm.w; ++xx) {
          real acc = 0;
          for (int64_t co = 0; co < dm.c_out; ++co) {
            const real* kci = kern + (co * dm.c_in + ci) * 27;
            const real* gyc = gy + co * out_vol;
            for (int64_t kz = 0; kz < 3; ++kz) {
              const int64_t num_z = z + dm.padding - kz;
              if (num_z < 0 || num_z % dm.stride) continue;
              const int64_t oz = num_z / dm.stride;
              if (oz >= dm.od) continue;
              for (int64_t ky = 0; ky < 3; ++ky) {
                const int64_t num_y = yy + dm.padding - ky;
                if (num_y < 0 || num_y % dm.stride) continue;
                const int64_t oy = num_y / dm.stride;
                if (oy >= dm.oh) continue;
                for (int64_t kx = 0; kx < 3; ++kx) {
                  const int64_t num_x = xx + dm.padding - kx;
                  if (num_x < 0 || num_x % dm.stride) continue;
                  const int64_t ox = num_x / dm.stride;
                  if (ox >= dm.ow) continue;
                  acc += kci[(kz * 3 + ky) * 3 + kx] * gyc[(oz * dm.oh + oy) * dm.ow + ox];
                }
              }
            }
          }
          gx[ci * in_vol + z * in_plane + yy * dm.w + xx] += acc;
        }
      }
    }
  }
}

void conv3d_grad_kernel(const real* gy, const real* x, real* gk, real* gbias,
                        const Conv3dDims& dm) {
  const int64_t in_plane = dm.h * dm.w;
  const int64_t in_vol = dm.d * in_plane;
  const int64_t out_plane = dm.oh * dm.ow;
  const int64_t out_vol = dm.od * out_plane;
#pragma omp parallel for schedule(static)
  for (int64_t co = 0; co < dm.c_out; ++co) {
    const real* gyc = gy + co * out_vol;
    if (gbias) {
      real acc = 0;
      for (int64_t i = 0; i < out_vol; ++i) acc += gyc[i];
      gbias[co] += acc;
    }
    for (int64_t ci = 0; ci < dm.c_in; ++ci) {
      const real* xi = x + ci * in_vol;
      for (int64_t kz = 0; kz < 3; ++kz) {
        for (int64_t ky = 0; ky < 3; ++ky) {
          for (int64_t kx = 0; kx < 3; ++kx) {
            real acc = 0;
            for (int64_t oz = 0; oz < dm.od; ++oz) {
              const int64_t z = oz * dm.stride - dm.padding + kz;
              if (z < 0 || z >= dm.d) continue;
              for (int64_t oy = 0; oy < dm.oh; ++oy) {
                const int64_t yy = oy * dm.stride - dm.padding + ky;
                if (yy < 0 || yy >= dm.h) continue;
                for (int64_t ox = 0; ox < dm.ow; ++ox) {
                  const int64_t xx = ox * dm.stride - dm.padding + kx;
                  if (xx < 0 || xx >= dm.w) continue;
                  acc += gyc[(oz * dm.oh + oy) * dm.ow + ox] * xi[z * in_plane + yy * dm.w + xx];
                }
              }
            }
            gk[((co * dm.c_in + ci) * 27) + (kz * 3 + ky) * 3 + kx] += acc;
          }
        }
      }
    }
  }
}

}  // namespace omp

void matmul(const real* a, const real* bt, real* c, int64_t m, int64_t k, int64_t n) {
  if (parallel_enabled()) {
    omp::matmul(a, bt, c, m, k, n);
  } else {
    serial::matmul(a, bt, c, m, k, n);
  }
}

void conv3d_forward(const real* x, const real* kern, const real* bias, real* y,
                    const Conv3dDims& dm) {
  if (parallel_enabled()) {
    omp::conv3d_forward(x, kern, bias, y, dm);
  } else {
    serial::conv3d_forward(x, kern, bias, y, dm);
  }
}

void conv3d_grad_input(const real* gy, const real* kern, real* gx, const Conv3dDims& dm) {
  if (parallel_enabled()) {
    omp::conv3d_grad_input(gy, kern, gx, dm);
  } else {
    serial::conv3d_grad_input(gy, kern, gx, dm);
  }
}

void conv3d_grad_kernel(const real* gy, const real* x, real* gk, real* gbias,
                        const Conv3dDims& dm) {
  if (parallel_enabled()) {
    omp::conv3d_grad_kernel(gy, x, gk, gbias, dm);
  } else {
    serial::conv3d_grad_kernel(gy, x, gk, gbias, dm);
  }
}

}  // namespace compnerf::kernels
