#include "compnerf/core/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "compnerf/core/kernels.hpp"
#include "compnerf/core/parallel.hpp"

namespace compnerf {

namespace {

using detail::make_op;

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  check(a.shape() == b.shape(), std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                    " vs " + shape_str(b.shape()));
}

void pack_transpose(const real* src, real* dst, int64_t rows, int64_t cols) {
  for (int64_t i = 0; i < rows; ++i)
    for (int64_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * cols + j];
}

std::span<real> ensure_grad(const std::shared_ptr<Node>& n) { return n->grad_buf(); }

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  check(a.ndim() == 2 && b.ndim() == 2,
        "matmul: expects 2-D operands, got " + shape_str(a.shape()) + " and " +
            shape_str(b.shape()));
  check(a.dim(1) == b.dim(0), "matmul: inner dimensions differ, " + shape_str(a.shape()) +
                                  " vs " + shape_str(b.shape()));
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out = make_op("matmul", {m, n}, {a.node(), b.node()}, [m, k, n](Node& self) {
    const auto& pa = self.parents[0];
    const auto& pb = self.parents[1];
    const real* g = self.grad.data();
    if (pa->requires_grad) {
      // dA = G * B^T; kernel takes B^T pre-transposed = B as stored.
      std::vector<real> tmp(m * k);
      kernels::matmul(g, pb->value.data(), tmp.data(), m, n, k);
      auto ga = ensure_grad(pa);
      for (int64_t i = 0; i < m * k; ++i) ga[i] += tmp[i];
    }
    if (pb->requires_grad) {
      // dB = A^T * G.
      std::vector<real> at(k * m), gt(n * m), tmp(k * n);
      pack_transpose(pa->value.data(), at.data(), m, k);
      pack_transpose(g, gt.data(), m, n);
      kernels::matmul(at.data(), gt.data(), tmp.data(), k, m, n);
      auto gb = ensure_grad(pb);
      for (int64_t i = 0; i < k * n; ++i) gb[i] += tmp[i];
    }
  });
  std::vector<real> bt(k * n);
  pack_transpose(b.data().data(), bt.data(), k, n);
  kernels::matmul(a.data().data(), bt.data(), out.mutable_data().data(), m, k, n);
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape("add", a, b);
  Tensor out = make_op("add", a.shape(), {a.node(), b.node()}, [](Node& self) {
    for (int p = 0; p < 2; ++p) {
      const auto& par = self.parents[p];
      if (!par->requires_grad) continue;
      auto g = ensure_grad(par);
      for (int64_t i = 0; i < self.size(); ++i) g[i] += self.grad[i];
    }
  });
  const auto pa = a.data(), pb = b.data();
  auto po = out.mutable_data();
  for (int64_t i = 0; i < out.size(); ++i) po[i] = pa[i] + pb[i];
  return out;
}

Tensor add_rowvec(const Tensor& a, const Tensor& v) {
  check(a.ndim() == 2 && v.ndim() == 1 && a.dim(1) == v.dim(0),
        "add_rowvec: incompatible shapes " + shape_str(a.shape()) + " and " +
            shape_str(v.shape()));
  const int64_t m = a.dim(0), n = a.dim(1);
  Tensor out = make_op("add_rowvec", a.shape(), {a.node(), v.node()}, [m, n](Node& self) {
    if (self.parents[0]->requires_grad) {
      auto g = ensure_grad(self.parents[0]);
      for (int64_t i = 0; i < m * n; ++i) g[i] += self.grad[i];
    }
    if (self.parents[1]->requires_grad) {
      auto g = ensure_grad(self.parents[1]);
      for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) g[j] += self.grad[i * n + j];
    }
  });
  const auto pa = a.data(), pv = v.data();
  auto po = out.mutable_data();
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) po[i * n + j] = pa[i * n + j] + pv[j];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape("sub", a, b);
  Tensor out = make_op("sub", a.shape(), {a.node(), b.node()}, [](Node& self) {
    if (self.parents[0]->requires_grad) {
      auto g = ensure_grad(self.parents[0]);
      for (int64_t i = 0; i < self.size(); ++i) g[i] += self.grad[i];
    }
    if (self.parents[1]->requires_grad) {
      auto g = ensure_grad(self.parents[1]);
      for (int64_t i = 0; i < self.size(); ++i) g[i] -= self.grad[i];
    }
  });
  const auto pa = a.data(), pb = b.data();
  auto po = out.mutable_data();
  for (int64_t i = 0; i < out.size(); ++i) po[i] = pa[i] - pb[i];
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape("mul", a, b);
  Tensor out = make_op("mul", a.shape(), {a.node(), b.node()}, [](Node& self) {
    const auto& pa = self.parents[0];
    const auto& pb = self.parents[1];
    if (pa->requires_grad) {
      auto g = ensure_grad(pa);
      for (int64_t i = 0; i < self.size(); ++i) g[i] += self.grad[i] * pb->value[i];
    }
    if (pb->requires_grad) {
      auto g = ensure_grad(pb);
      for (int64_t i = 0; i < self.size(); ++i) g[i] += self.grad[i] * pa->value[i];
    }
  });
  const auto pa = a.data(), pb = b.data();
  auto po = out.mutable_data();
  for (int64_t i = 0; i < out.size(); ++i) po[i] = pa[i] * pb[i];
  return out;
}

Tensor scale(const Tensor& a, real s) {
  Tensor out = make_op("scale", a.shape(), {a.node()}, [s](Node& self) {
    if (!self.parents[0]->requires_grad) return;
    auto g = ensure_grad(self.parents[0]);
    for (int64_t i = 0; i < self.size(); ++i) g[i] += s * self.grad[i];
  });
  const auto pa = a.data();
  auto po = out.mutable_data();
  for (int64_t i = 0; i < out.size(); ++i) po[i] = s * pa[i];
  return out;
}

Tensor relu(const Tensor& a) {
  Tensor out = make_op("relu", a.shape(), {a.node()}, [](Node& self) {
    if (!self.parents[0]->requires_grad) return;
    auto g = ensure_grad(self.parents[0]);
    const auto& x = self.parents[0]->value;
    for (int64_t i = 0; i < self.size(); ++i)
      if (x[i] > 0) g[i] += self.grad[i];
  });
  const auto pa = a.data();
  auto po = out.mutable_data();
  for (int64_t i = 0; i < out.size(); ++i) po[i] = pa[i] > 0 ? pa[i] : real(0);
  return out;
}

Tensor softplus(const Tensor& a) {
  Tensor out = make_op("softplus", a.shape(), {a.node()}, [](Node& self) {
    if (!self.parents[0]->requires_grad) return;
    auto g = ensure_grad(self.parents[0]);
    const auto& x = self.parents[0]->value;
    for (int64_t i = 0; i < self.size(); ++i) {
      const real s = real(1) / (real(1) + std::exp(-x[i]));
      g[i] += self.grad[i] * s;
    }
  });
  const auto pa = a.data();
  auto po = out.mutable_data();
  for (int64_t i = 0; i < out.size(); ++i) {
    const real x = pa[i];
    po[i] = std::max(x, real(0)) + std::log1p(std::exp(-std::abs(x)));
  }
  return out;
}

Tensor sigmoid(const Tensor& a) {
  Tensor out = make_op("sigmoid", a.shape(), {a.node()}, [](Node& self) {
    if (!self.parents[0]->requires_grad) return;
    auto g = ensure_grad(self.parents[0]);
    for (int64_t i = 0; i < self.size(); ++i) {
      const real y = self.value[i];
      g[i] += self.grad[i] * y * (real(1) - y);
    }
  });
  const auto pa = a.data();
  auto po = out.mutable_data();
  for (int64_t i = 0; i < out.size(); ++i) {
    const real x = pa[i];
    po[i] = x >= 0 ? real(1) / (real(1) + std::exp(-x))
                   : std::exp(x) / (real(1) + std::exp(x));
  }
  return out;
}

Tensor sum(const Tensor& a) {
  Tensor out = make_op("sum", {1}, {a.node()}, [](Node& self) {
    if (!self.parents[0]->requires_grad) return;
    auto g = ensure_grad(self.parents[0]);
    const real gs = self.grad[0];
    for (int64_t i = 0; i < self.parents[0]->size(); ++i) g[i] += gs;
  });
  real acc = 0;
  for (real v : a.data()) acc += v;
  out.mutable_data()[0] = acc;
  return out;
}

Tensor mean(const Tensor& a) {
  check(a.size() > 0, "mean of empty tensor");
  const real inv = real(1) / real(a.size());
  Tensor out = make_op("mean", {1}, {a.node()}, [inv](Node& self) {
    if (!self.parents[0]->requires_grad) return;
    auto g = ensure_grad(self.parents[0]);
    const real gs = self.grad[0] * inv;
    for (int64_t i = 0; i < self.parents[0]->size(); ++i) g[i] += gs;
  });
  real acc = 0;
  for (real v : a.data()) acc += v;
  out.mutable_data()[0] = acc * inv;
  return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  check(!parts.empty(), "concat_cols: empty list");
  const int64_t m = parts[0].dim(0);
  int64_t n = 0;
  std::vector<std::shared_ptr<Node>> parents;
  for (const auto& p : parts) {
    check(p.ndim() == 2 && p.dim(0) == m,
          "concat_cols: row mismatch " + shape_str(parts[0].shape()) + " vs " +
              shape_str(p.shape()));
    n += p.dim(1);
    parents.push_back(p.node());
  }
  Tensor out = make_op("concat_cols", {m, n}, std::move(parents), [m, n](Node& self) {
    int64_t col = 0;
    for (const auto& par : self.parents) {
      const int64_t pn = par->shape[1];
      if (par->requires_grad) {
        auto g = ensure_grad(par);
        for (int64_t i = 0; i < m; ++i)
          for (int64_t j = 0; j < pn; ++j) g[i * pn + j] += self.grad[i * n + col + j];
      }
      col += pn;
    }
  });
  auto po = out.mutable_data();
  int64_t col = 0;
  for (const auto& p : parts) {
    const int64_t pn = p.dim(1);
    const auto pd = p.data();
    for (int64_t i = 0; i < m; ++i)
      std::memcpy(po.data() + i * n + col, pd.data() + i * pn, pn * sizeof(real));
    col += pn;
  }
  return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  check(!parts.empty(), "concat_rows: empty list");
  const int64_t n = parts[0].dim(1);
  int64_t m = 0;
  std::vector<std::shared_ptr<Node>> parents;
  for (const auto& p : parts) {
    check(p.ndim() == 2 && p.dim(1) == n,
          "concat_rows: column mismatch " + shape_str(parts[0].shape()) + " vs " +
              shape_str(p.shape()));
    m += p.dim(0);
    parents.push_back(p.node());
  }
  Tensor out = make_op("concat_rows", {m, n}, std::move(parents), [n](Node& self) {
    int64_t row = 0;
    for (const auto& par : self.parents) {
      const int64_t pm = par->shape[0];
      if (par->requires_grad) {
        auto g = ensure_grad(par);
        for (int64_t i = 0; i < pm * n; ++i) g[i] += self.grad[row * n + i];
      }
      row += pm;
    }
  });
  auto po = out.mutable_data();
  int64_t row = 0;
  for (const auto& p : parts) {
    std::memcpy(po.data() + row * n, p.data().data(), p.size() * sizeof(real));
    row += p.dim(0);
  }
  return out;
}

Tensor slice_rows(const Tensor& a, int64_t begin, int64_t end) {
  check(a.ndim() == 2 && begin >= 0 && end <= a.dim(0) && begin < end,
        "slice_rows: bad range on " + shape_str(a.shape()));
  const int64_t n = a.dim(1);
  Tensor out = make_op("slice_rows", {end - begin, n}, {a.node()}, [begin, n](Node& self) {
    if (!self.parents[0]->requires_grad) return;
    auto g = ensure_grad(self.parents[0]);
    for (int64_t i = 0; i < self.size(); ++i) g[begin * n + i] += self.grad[i];
  });
  std::memcpy(out.mutable_data().data(), a.data().data() + begin * n,
              (end - begin) * n * sizeof(real));
  return out;
}

Tensor broadcast_row(const Tensor& v, int64_t rows) {
  check(v.ndim() == 1, "broadcast_row: expects 1-D, got " + shape_str(v.shape()));
  const int64_t k = v.dim(0);
  Tensor out = make_op("broadcast_row", {rows, k}, {v.node()}, [rows, k](Node& self) {
    if (!self.parents[0]->requires_grad) return;
    auto g = ensure_grad(self.parents[0]);
    for (int64_t j = 0; j < k; ++j) {
      real acc = 0;
      for (int64_t i = 0; i < rows; ++i) acc += self.grad[i * k + j];
      g[j] += acc;
    }
  });
  auto po = out.mutable_data();
  for (int64_t i = 0; i < rows; ++i)
    std::memcpy(po.data() + i * k, v.data().data(), k * sizeof(real));
  return out;
}

Tensor rowwise_scale(const Tensor& a, std::shared_ptr<const std::vector<real>> w) {
  check(a.ndim() == 2 && a.dim(0) == static_cast<int64_t>(w->size()),
        "rowwise_scale: weight count does not match rows of " + shape_str(a.shape()));
  const int64_t m = a.dim(0), n = a.dim(1);
  Tensor out = make_op("rowwise_scale", a.shape(), {a.node()}, [w, m, n](Node& self) {
    if (!self.parents[0]->requires_grad) return;
    auto g = ensure_grad(self.parents[0]);
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < n; ++j) g[i * n + j] += (*w)[i] * self.grad[i * n + j];
  });
  const auto pa = a.data();
  auto po = out.mutable_data();
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) po[i * n + j] = (*w)[i] * pa[i * n + j];
  return out;
}

Tensor transpose2d(const Tensor& a) {
  check(a.ndim() == 2, "transpose2d: expects 2-D, got " + shape_str(a.shape()));
  const int64_t m = a.dim(0), n = a.dim(1);
  Tensor out = make_op("transpose2d", {n, m}, {a.node()}, [m, n](Node& self) {
    if (!self.parents[0]->requires_grad) return;
    auto g = ensure_grad(self.parents[0]);
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < n; ++j) g[i * n + j] += self.grad[j * m + i];
  });
  pack_transpose(a.data().data(), out.mutable_data().data(), m, n);
  return out;
}

Tensor reshape(const Tensor& a, Shape shape) {
  check(numel(shape) == a.size(), "reshape: element count mismatch, " + shape_str(a.shape()) +
                                      " to " + shape_str(shape));
  Tensor out = make_op("reshape", std::move(shape), {a.node()}, [](Node& self) {
    if (!self.parents[0]->requires_grad) return;
    auto g = ensure_grad(self.parents[0]);
    for (int64_t i = 0; i < self.size(); ++i) g[i] += self.grad[i];
  });
  std::memcpy(out.mutable_data().data(), a.data().data(), a.size() * sizeof(real));
  return out;
}

Tensor conv3d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int64_t stride,
              int64_t padding) {
  check(input.ndim() == 4, "conv3d: input must be [C,D,H,W], got " + shape_str(input.shape()));
  check(kernel.ndim() == 5 && kernel.dim(2) == 3 && kernel.dim(3) == 3 && kernel.dim(4) == 3,
        "conv3d: kernel must be [C_out,C_in,3,3,3], got " + shape_str(kernel.shape()));
  check(kernel.dim(1) == input.dim(0), "conv3d: channel mismatch, input " +
                                           shape_str(input.shape()) + " kernel " +
                                           shape_str(kernel.shape()));
  check(stride >= 1, "conv3d: stride must be positive");
  kernels::Conv3dDims dm;
  dm.c_in = input.dim(0);
  dm.d = input.dim(1);
  dm.h = input.dim(2);
  dm.w = input.dim(3);
  dm.c_out = kernel.dim(0);
  dm.stride = stride;
  dm.padding = padding;
  dm.od = (dm.d + 2 * padding - 3) / stride + 1;
  dm.oh = (dm.h + 2 * padding - 3) / stride + 1;
  dm.ow = (dm.w + 2 * padding - 3) / stride + 1;
  check(dm.d + 2 * padding >= 3 && dm.h + 2 * padding >= 3 && dm.w + 2 * padding >= 3 &&
            dm.od >= 1 && dm.oh >= 1 && dm.ow >= 1,
        "conv3d: output extent below 1 for input " + shape_str(input.shape()));
  if (bias.defined())
    check(bias.ndim() == 1 && bias.dim(0) == dm.c_out,
          "conv3d: bias must be [C_out], got " + shape_str(bias.shape()));

  std::vector<std::shared_ptr<Node>> parents{input.node(), kernel.node()};
  if (bias.defined()) parents.push_back(bias.node());
  Tensor out =
      make_op("conv3d", {dm.c_out, dm.od, dm.oh, dm.ow}, std::move(parents), [dm](Node& self) {
        const auto& px = self.parents[0];
        const auto& pk = self.parents[1];
        if (px->requires_grad) {
          ensure_grad(px);
          kernels::conv3d_grad_input(self.grad.data(), pk->value.data(), px->grad.data(), dm);
        }
        real* gbias = nullptr;
        if (self.parents.size() > 2 && self.parents[2]->requires_grad) {
          ensure_grad(self.parents[2]);
          gbias = self.parents[2]->grad.data();
        }
        if (pk->requires_grad || gbias) {
          std::vector<real> gk_local;
          real* gk = nullptr;
          if (pk->requires_grad) {
            ensure_grad(pk);
            gk = pk->grad.data();
          } else {
            gk_local.assign(pk->value.size(), real(0));
            gk = gk_local.data();
          }
          kernels::conv3d_grad_kernel(self.grad.data(), px->value.data(), gk, gbias, dm);
        }
      });
  kernels::conv3d_forward(input.data().data(), kernel.data().data(),
                          bias.defined() ? bias.data().data() : nullptr,
                          out.mutable_data().data(), dm);
  return out;
}

Tensor bilinear_sample(const Tensor& image,
                       std::shared_ptr<const std::vector<std::array<double, 2>>> uv) {
  check(image.ndim() == 3, "bilinear_sample: image must be [C,H,W], got " +
                               shape_str(image.shape()));
  const int64_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  const int64_t n = static_cast<int64_t>(uv->size());

  struct Corner {
    int64_t x0, y0, x1, y1;
    real fx, fy;
  };
  auto corner_of = [h, w](double u, double v) {
    Corner cr;
    u = std::clamp(u, 0.0, double(w - 1));
    v = std::clamp(v, 0.0, double(h - 1));
    cr.x0 = std::min(int64_t(std::floor(u)), w > 1 ? w - 2 : int64_t(0));
    cr.y0 = std::min(int64_t(std::floor(v)), h > 1 ? h - 2 : int64_t(0));
    cr.x1 = std::min(cr.x0 + 1, w - 1);
    cr.y1 = std::min(cr.y0 + 1, h - 1);
    cr.fx = real(u - double(cr.x0));
    cr.fy = real(v - double(cr.y0));
    return cr;
  };

  Tensor out = make_op("bilinear_sample", {n, c}, {image.node()},
                       [uv, c, h, w, n, corner_of](Node& self) {
    if (!self.parents[0]->requires_grad) return;
    auto g = ensure_grad(self.parents[0]);
    const int64_t plane = h * w;
    for (int64_t i = 0; i < n; ++i) {
      const Corner cr = corner_of((*uv)[i][0], (*uv)[i][1]);
      const real w00 = (1 - cr.fx) * (1 - cr.fy), w10 = cr.fx * (1 - cr.fy);
      const real w01 = (1 - cr.fx) * cr.fy, w11 = cr.fx * cr.fy;
      for (int64_t ch = 0; ch < c; ++ch) {
        const real gi = self.grad[i * c + ch];
        real* gc = g.data() + ch * plane;
        gc[cr.y0 * w + cr.x0] += gi * w00;
        gc[cr.y0 * w + cr.x1] += gi * w10;
        gc[cr.y1 * w + cr.x0] += gi * w01;
        gc[cr.y1 * w + cr.x1] += gi * w11;
      }
    }
  });
  const auto img = image.data();
  auto po = out.mutable_data();
  const int64_t plane = h * w;
#pragma omp parallel for schedule(static) if (parallel_enabled())
  for (int64_t i = 0; i < n; ++i) {
    const Corner cr = corner_of((*uv)[i][0], (*uv)[i][1]);
    for (int64_t ch = 0; ch < c; ++ch) {
      const real* ic = img.data() + ch * plane;
      const real top = ic[cr.y0 * w + cr.x0] * (1 - cr.fx) + ic[cr.y0 * w + cr.x1] * cr.fx;
      const real bot = ic[cr.y1 * w + cr.x0] * (1 - cr.fx) + ic[cr.y1 * w + cr.x1] * cr.fx;
      po[i * c + ch] = top * (1 - cr.fy) + bot * cr.fy;
    }
  }
  return out;
}

Tensor compose_density(const std::vector<Tensor>& sigmas) {
  check(!sigmas.empty(), "compose_density: empty object list");
  const int64_t n = sigmas[0].size();
  std::vector<std::shared_ptr<Node>> parents;
  for (const auto& s : sigmas) {
    check(s.shape() == sigmas[0].shape(), "compose_density: shape mismatch " +
                                              shape_str(sigmas[0].shape()) + " vs " +
                                              shape_str(s.shape()));
    parents.push_back(s.node());
  }
  const size_t m = sigmas.size();
  Tensor out = make_op("compose_density", sigmas[0].shape(), std::move(parents),
                       [](Node& self) {
    for (const auto& par : self.parents) {
      if (!par->requires_grad) continue;
      auto g = ensure_grad(par);
      for (int64_t i = 0; i < self.size(); ++i) g[i] += self.grad[i];
    }
  });
  auto po = out.mutable_data();
  if (m == 1) {
    std::memcpy(po.data(), sigmas[0].data().data(), n * sizeof(real));
    return out;
  }
  std::vector<real> vals(m);
  for (int64_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < m; ++j) vals[j] = sigmas[j].data()[i];
    std::sort(vals.begin(), vals.end());
    real acc = 0;
    for (real v : vals) acc += v;
    po[i] = acc;
  }
  return out;
}

Tensor compose_color(const std::vector<Tensor>& sigmas, const std::vector<Tensor>& colors,
                     real eps) {
  check(!sigmas.empty() && sigmas.size() == colors.size(),
        "compose_color: need matching sigma/color lists");
  const size_t m = sigmas.size();
  const int64_t n = sigmas[0].size();
  std::vector<std::shared_ptr<Node>> parents;
  for (size_t j = 0; j < m; ++j) {
    check(sigmas[j].size() == n, "compose_color: sigma shape mismatch");
    check(colors[j].ndim() == 2 && colors[j].dim(0) == n && colors[j].dim(1) == 3,
          "compose_color: colors must be [N,3], got " + shape_str(colors[j].shape()));
    parents.push_back(sigmas[j].node());
  }
  for (size_t j = 0; j < m; ++j) parents.push_back(colors[j].node());

  Tensor out = make_op("compose_color", {n, 3}, std::move(parents), [m, n, eps](Node& self) {
    // Recompute the per-element total density; gradients do not depend on
    // the accumulation order.
    for (int64_t i = 0; i < n; ++i) {
      real s_tot = 0;
      for (size_t j = 0; j < m; ++j) s_tot += self.parents[j]->value[i];
      if (!(s_tot > eps)) continue;
      const real inv = real(1) / s_tot;
      for (size_t j = 0; j < m; ++j) {
        const auto& ps = self.parents[j];
        const auto& pc = self.parents[m + j];
        const real sj = ps->value[i];
        if (ps->requires_grad) {
          auto g = ensure_grad(ps);
          real acc = 0;
          for (int ch = 0; ch < 3; ++ch)
            acc += self.grad[i * 3 + ch] * (pc->value[i * 3 + ch] - self.value[i * 3 + ch]);
          g[i] += acc * inv;
        }
        if (pc->requires_grad) {
          auto g = ensure_grad(pc);
          for (int ch = 0; ch < 3; ++ch) g[i * 3 + ch] += self.grad[i * 3 + ch] * sj * inv;
        }
      }
    }
  });

  auto po = out.mutable_data();
  if (m == 1) {
    const auto s = sigmas[0].data();
    const auto c = colors[0].data();
    for (int64_t i = 0; i < n; ++i)
      for (int ch = 0; ch < 3; ++ch) po[i * 3 + ch] = s[i] > eps ? c[i * 3 + ch] : real(0);
    return out;
  }
  // Canonical (sigma, rgb) ordering makes the sums bitwise permutation
  // invariant over the object list.
  struct Entry {
    real s, r, g, b;
    bool operator<(const Entry& o) const {
      if (s != o.s) return s < o.s;
      if (r != o.r) return r < o.r;
      if (g != o.g) return g < o.g;
      return b < o.b;
    }
  };
  std::vector<Entry> es(m);
  for (int64_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < m; ++j) {
      const auto s = sigmas[j].data();
      const auto c = colors[j].data();
      es[j] = {s[i], c[i * 3], c[i * 3 + 1], c[i * 3 + 2]};
    }
    std::sort(es.begin(), es.end());
    real s_tot = 0, wr = 0, wg = 0, wb = 0;
    for (const auto& e : es) {
      s_tot += e.s;
      wr += e.s * e.r;
      wg += e.s * e.g;
      wb += e.s * e.b;
    }
    if (s_tot > eps) {
      po[i * 3] = wr / s_tot;
      po[i * 3 + 1] = wg / s_tot;
      po[i * 3 + 2] = wb / s_tot;
    } else {
      po[i * 3] = po[i * 3 + 1] = po[i * 3 + 2] = real(0);
    }
  }
  return out;
}

Tensor volume_render(const Tensor& sigma, const Tensor& color,
                     std::shared_ptr<const RayLayout> layout) {
  const int64_t rays = static_cast<int64_t>(layout->offsets.size()) - 1;
  const int64_t n = sigma.size();
  check(sigma.ndim() == 1, "volume_render: sigma must be flat, got " + shape_str(sigma.shape()));
  check(color.ndim() == 2 && color.dim(0) == n && color.dim(1) == 3,
        "volume_render: color must be [N,3] matching sigma, got " + shape_str(color.shape()));
  check(layout->offsets.back() == n && static_cast<int64_t>(layout->deltas.size()) == n,
        "volume_render: layout does not cover the sample arrays");

  Tensor out = make_op("volume_render", {rays, 3}, {sigma.node(), color.node()},
                       [layout, rays](Node& self) {
    const auto& ps = self.parents[0];
    const auto& pc = self.parents[1];
    const bool need_s = ps->requires_grad;
    const bool need_c = pc->requires_grad;
    if (need_s) ensure_grad(ps);
    if (need_c) ensure_grad(pc);
    for (int64_t r = 0; r < rays; ++r) {
      const int64_t s0 = layout->offsets[r], s1 = layout->offsets[r + 1];
      // Forward sweep for T_i, then reverse sweep with suffix weighted colors.
      real t = 1;
      std::vector<real> tvals(s1 - s0);
      for (int64_t s = s0; s < s1; ++s) {
        tvals[s - s0] = t;
        t *= std::exp(-ps->value[s] * layout->deltas[s]);
      }
      real suffix[3] = {0, 0, 0};
      for (int64_t s = s1 - 1; s >= s0; --s) {
        const real delta = layout->deltas[s];
        const real e = std::exp(-ps->value[s] * delta);
        const real ti = tvals[s - s0];
        const real wi = ti * (1 - e);
        if (need_c) {
          for (int ch = 0; ch < 3; ++ch)
            pc->grad[s * 3 + ch] += self.grad[r * 3 + ch] * wi;
        }
        if (need_s) {
          real acc = 0;
          for (int ch = 0; ch < 3; ++ch)
            acc += self.grad[r * 3 + ch] *
                   delta * (ti * e * pc->value[s * 3 + ch] - suffix[ch]);
          ps->grad[s] += acc;
        }
        for (int ch = 0; ch < 3; ++ch) suffix[ch] += wi * pc->value[s * 3 + ch];
      }
    }
  });

  const auto sv = sigma.data();
  const auto cv = color.data();
  auto po = out.mutable_data();
#pragma omp parallel for schedule(static) if (parallel_enabled())
  for (int64_t r = 0; r < rays; ++r) {
    real t = 1;
    real c[3] = {0, 0, 0};
    for (int64_t s = layout->offsets[r]; s < layout->offsets[r + 1]; ++s) {
      const real e = std::exp(-sv[s] * layout->deltas[s]);
      const real a = 1 - e;
      for (int ch = 0; ch < 3; ++ch) c[ch] += t * a * cv[s * 3 + ch];
      t *= e;
    }
    for (int ch = 0; ch < 3; ++ch) po[r * 3 + ch] = c[ch];
  }
  return out;
}

}  // namespace compnerf
