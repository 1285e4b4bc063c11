// Serial-vs-OpenMP kernel comparison.
#include <benchmark/benchmark.h>

#include "compnerf/core/kernels.hpp"
#include "compnerf/core/parallel.hpp"
#include "compnerf/core/rng.hpp"

using namespace compnerf;

namespace {

std::vector<real> random_buffer(size_t n, uint64_t seed) {
  Rng rng = Rng::seeded(seed);
  std::vector<real> v(n);
  for (auto& x : v) x = real(rng.uniform(-1, 1));
  return v;
}

void bm_matmul_serial(benchmark::State& state) {
  const int64_t n = state.range(0);
  const auto a = random_buffer(size_t(n * n), 1);
  const auto bt = random_buffer(size_t(n * n), 2);
  std::vector<real> c(size_t(n * n));
  for (auto _ : state) {
    kernels::serial::matmul(a.data(), bt.data(), c.data(), n, n, n);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}

void bm_matmul_omp(benchmark::State& state) {
  const int64_t n = state.range(0);
  const auto a = random_buffer(size_t(n * n), 1);
  const auto bt = random_buffer(size_t(n * n), 2);
  std::vector<real> c(size_t(n * n));
  for (auto _ : state) {
    kernels::omp::matmul(a.data(), bt.data(), c.data(), n, n, n);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}

kernels::Conv3dDims conv_dims(int64_t side, int64_t ch) {
  kernels::Conv3dDims dm;
  dm.c_in = ch;
  dm.c_out = ch;
  dm.d = dm.h = dm.w = side;
  dm.stride = 1;
  dm.padding = 1;
  dm.od = dm.oh = dm.ow = side;
  return dm;
}

void bm_conv3d_serial(benchmark::State& state) {
  const auto dm = conv_dims(state.range(0), 16);
  const auto x = random_buffer(size_t(dm.c_in * dm.d * dm.h * dm.w), 3);
  const auto k = random_buffer(size_t(dm.c_out * dm.c_in * 27), 4);
  const auto b = random_buffer(size_t(dm.c_out), 5);
  std::vector<real> y(size_t(dm.c_out * dm.od * dm.oh * dm.ow));
  for (auto _ : state) {
    kernels::serial::conv3d_forward(x.data(), k.data(), b.data(), y.data(), dm);
    benchmark::ClobberMemory();
  }
}

void bm_conv3d_omp(benchmark::State& state) {
  const auto dm = conv_dims(state.range(0), 16);
  const auto x = random_buffer(size_t(dm.c_in * dm.d * dm.h * dm.w), 3);
  const auto k = random_buffer(size_t(dm.c_out * dm.c_in * 27), 4);
  const auto b = random_buffer(size_t(dm.c_out), 5);
  std::vector<real> y(size_t(dm.c_out * dm.od * dm.oh * dm.ow));
  for (auto _ : state) {
    kernels::omp::conv3d_forward(x.data(), k.data(), b.data(), y.data(), dm);
    benchmark::ClobberMemory();
  }
}

}  // namespace

BENCHMARK(bm_matmul_serial)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(bm_matmul_omp)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(bm_conv3d_serial)->Arg(16)->Arg(32);
BENCHMARK(bm_conv3d_omp)->Arg(16)->Arg(32);

BENCHMARK_MAIN();
