#pragma once

#include <array>
#include <memory>
#include <vector>

#include "compnerf/core/tensor.hpp"

namespace compnerf {

// Shape-checked tensor ops. Every op validates operand shapes and reports
// both shapes on mismatch. Ops record themselves on the active tape when any
// operand requires grad.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor add_rowvec(const Tensor& a, const Tensor& v);  // [M,N] + [N]
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, real s);
Tensor relu(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor sum(const Tensor& a);   // -> [1]
Tensor mean(const Tensor& a);  // -> [1]
Tensor concat_cols(const std::vector<Tensor>& parts);  // [M,Ni] -> [M,sum Ni]
Tensor concat_rows(const std::vector<Tensor>& parts);  // [Mi,N] -> [sum Mi,N]
Tensor slice_rows(const Tensor& a, int64_t begin, int64_t end);
Tensor broadcast_row(const Tensor& v, int64_t rows);   // [K] -> [rows,K]
Tensor rowwise_scale(const Tensor& a, std::shared_ptr<const std::vector<real>> w);
Tensor transpose2d(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);

// 3D cross-correlation, kernel [C_out,C_in,3,3,3] over input [C_in,D,H,W].
Tensor conv3d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              int64_t stride, int64_t padding);

// Bilinear lookup of image [C,H,W] at continuous lattice coordinates (u,v);
// pixel (x,y) sits at coordinate (x,y). Coordinates clamp to the border.
// Differentiable w.r.t. the image values.
Tensor bilinear_sample(const Tensor& image,
                       std::shared_ptr<const std::vector<std::array<double, 2>>> uv);

// Density/color composition over per-object radiance samples. Contributions
// are accumulated in a canonical value-sorted order per element, so the
// outputs are bitwise invariant under permutations of the object list.
Tensor compose_density(const std::vector<Tensor>& sigmas);  // each [N] -> [N]
Tensor compose_color(const std::vector<Tensor>& sigmas, const std::vector<Tensor>& colors,
                     real eps);  // [N],[N,3] -> [N,3]

struct RayLayout {
  // Sample i of ray r occupies rows offsets[r]..offsets[r+1) of the flat
  // sample arrays; deltas are the quadrature segment lengths.
  std::vector<int64_t> offsets;  // size R+1
  std::vector<real> deltas;      // size offsets.back()
};

// Standard emission/absorption quadrature: per ray,
// C = sum_i T_i (1 - exp(-sigma_i delta_i)) c_i, T_i = exp(-sum_{l<i} sigma_l delta_l).
Tensor volume_render(const Tensor& sigma, const Tensor& color,
                     std::shared_ptr<const RayLayout> layout);  // -> [R,3]

}  // namespace compnerf
