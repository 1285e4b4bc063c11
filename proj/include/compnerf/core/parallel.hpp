#pragma once

namespace compnerf {

// Process-wide kernel thread count. 1 selects the serial reference kernels;
// anything above 1 selects the OpenMP kernels. The OpenMP kernels keep the
// per-element accumulation order of the serial ones, so results are
// bit-identical for any thread count.
void set_num_threads(int n);
int num_threads();
bool parallel_enabled();

}  // namespace compnerf
