#include "compnerf/core/nn.hpp"

#include <cmath>

namespace compnerf {

namespace {

Tensor he_uniform(Shape shape, int64_t fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / double(fan_in));
  std::vector<real> v(numel(shape));
  for (auto& x : v) x = real(rng.uniform(-bound, bound));
  return Tensor::from(std::move(shape), std::move(v), /*requires_grad=*/true);
}

}  // namespace

void Linear::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".weight", weight);
  out.emplace_back(prefix + ".bias", bias);
}

Linear make_linear(int64_t in, int64_t out, Rng& rng) {
  Linear l;
  l.weight = he_uniform({in, out}, in, rng);
  l.bias = Tensor::zeros({out}, /*requires_grad=*/true);
  return l;
}

Tensor MLP::operator()(Tensor x) const {
  for (size_t i = 0; i < layers.size(); ++i) {
    x = layers[i](x);
    if (i + 1 < layers.size()) x = relu(x);
  }
  return x;
}

void MLP::collect(const std::string& prefix, NamedParams& out) const {
  for (size_t i = 0; i < layers.size(); ++i)
    layers[i].collect(prefix + ".l" + std::to_string(i), out);
}

MLP make_mlp(const std::vector<int64_t>& dims, Rng& rng) {
  check(dims.size() >= 2, "make_mlp: need at least input and output dims");
  MLP m;
  for (size_t i = 0; i + 1 < dims.size(); ++i)
    m.layers.push_back(make_linear(dims[i], dims[i + 1], rng));
  return m;
}

void Conv3dLayer::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".kernel", kernel);
  out.emplace_back(prefix + ".bias", bias);
}

Conv3dLayer make_conv3d(int64_t c_in, int64_t c_out, int64_t stride, int64_t padding,
                        Rng& rng) {
  Conv3dLayer c;
  c.kernel = he_uniform({c_out, c_in, 3, 3, 3}, c_in * 27, rng);
  c.bias = Tensor::zeros({c_out}, /*requires_grad=*/true);
  c.stride = stride;
  c.padding = padding;
  return c;
}

}  // namespace compnerf
