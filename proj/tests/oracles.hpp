#pragma once

// Independent reference implementations used as test oracles. Everything in
// this header is deliberately written without reusing the library's compute
// paths (naive loops, textbook recurrences), so a bug cannot cancel itself.

#include <cmath>
#include <functional>
#include <vector>

#include "compnerf/core/tensor.hpp"

namespace oracles {

using compnerf::real;
using compnerf::Tensor;

// Naive 7-loop cross-correlation, independent of the kernels module.
inline std::vector<double> conv3d_reference(const std::vector<double>& x, int ci, int d, int h,
                                            int w, const std::vector<double>& k, int co,
                                            int stride, int padding,
                                            const std::vector<double>& bias) {
  const int od = (d + 2 * padding - 3) / stride + 1;
  const int oh = (h + 2 * padding - 3) / stride + 1;
  const int ow = (w + 2 * padding - 3) / stride + 1;
  std::vector<double> y(size_t(co) * od * oh * ow, 0.0);
  for (int oc = 0; oc < co; ++oc)
    for (int oz = 0; oz < od; ++oz)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          double acc = bias.empty() ? 0.0 : bias[oc];
          for (int ic = 0; ic < ci; ++ic)
            for (int kz = 0; kz < 3; ++kz)
              for (int ky = 0; ky < 3; ++ky)
                for (int kx = 0; kx < 3; ++kx) {
                  const int z = oz * stride - padding + kz;
                  const int yy = oy * stride - padding + ky;
                  const int xx = ox * stride - padding + kx;
                  if (z < 0 || z >= d || yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                  acc += k[(((size_t(oc) * ci + ic) * 3 + kz) * 3 + ky) * 3 + kx] *
                         x[((size_t(ic) * d + z) * h + yy) * w + xx];
                }
          y[((size_t(oc) * od + oz) * oh + oy) * ow + ox] = acc;
        }
  return y;
}

// Textbook ADAM recurrence on a single scalar.
struct ScalarAdamRef {
  double lr, b1, b2, eps;
  double m = 0, v = 0;
  long t = 0;
  double step(double x, double g) {
    t += 1;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, double(t)));
    const double vh = v / (1 - std::pow(b2, double(t)));
    return x - lr * mh / (std::sqrt(vh) + eps);
  }
};

// Central finite differences of `f` w.r.t. every element of `param`,
// compared against the analytic gradient already stored in param.grad().
// Returns the worst relative error. f must rebuild the graph from scratch.
inline double finite_diff_worst_rel(Tensor& param, const std::function<double()>& f,
                                    const std::vector<real>& analytic, double h = 1e-3) {
  double worst = 0.0;
  auto data = param.mutable_data();
  for (int64_t i = 0; i < param.size(); ++i) {
    const real keep = data[i];
    data[i] = keep + real(h);
    const double fp = f();
    data[i] = keep - real(h);
    const double fm = f();
    data[i] = keep;
    const double fd = (fp - fm) / (2 * h);
    const double an = double(analytic[i]);
    const double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
    worst = std::max(worst, std::abs(fd - an) / denom);
  }
  return worst;
}

}  // namespace oracles
