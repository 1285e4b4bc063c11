#include "compnerf/core/adam.hpp"

#include <cmath>

namespace compnerf {

void adam_step(std::vector<Tensor>& params, AdamState& state) {
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i].size(), real(0));
      state.v[i].assign(params[i].size(), real(0));
    }
  }
  check(state.m.size() == params.size(), "adam_step: parameter list changed size");
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, double(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, double(state.step_count));
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    check(p.has_grad(), "adam_step: parameter " + std::to_string(i) + " has no gradient");
    check(static_cast<int64_t>(state.m[i].size()) == p.size(),
          "adam_step: moment buffer does not match parameter shape");
    auto g = p.grad();
    auto value = p.mutable_data();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (int64_t j = 0; j < p.size(); ++j) {
      m[j] = real(state.beta1) * m[j] + real(1.0 - state.beta1) * g[j];
      v[j] = real(state.beta2) * v[j] + real(1.0 - state.beta2) * g[j] * g[j];
      const double mhat = double(m[j]) / bc1;
      const double vhat = double(v[j]) / bc2;
      value[j] -= real(state.lr * mhat / (std::sqrt(vhat) + state.eps));
    }
  }
}

void zero_grads(std::vector<Tensor>& params) {
  for (auto& p : params) p.zero_grad();
}

}  // namespace compnerf
