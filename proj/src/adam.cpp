// SPDX-License-Identifier: Apache-2.0
#include "rlpga/adam.hpp"

#include <cmath>

#include "rlpga/errors.hpp"

namespace rlpga {

AdamState make_adam_state(const ParamSet& params) {
  AdamState state;
  for (const auto& p : params) {
    Tensor zeros = p.value;
    zeros.fill(0.0);
    state.first_moment.push_back(zeros);
    state.second_moment.push_back(std::move(zeros));
  }
  return state;
}

void adam_step(ParamSet& params, AdamState& state, double lr) {
  if (state.first_moment.size() != params.size()) {
    throw ContractError("adam state does not match parameter set");
  }
  for (const auto& p : params) {
    if (!p.grad.all_finite()) throw NumericError("non-finite gradient for parameter '" + p.name + "'");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& value = params[k].value.data();
    const auto& grad = params[k].grad.data();
    auto& m = state.first_moment[k].data();
    auto& v = state.second_moment[k].data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * grad[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

}  // namespace rlpga
