// SPDX-License-Identifier: Apache-2.0
#include "rlpga/mlp.hpp"

#include <cmath>

#include "rlpga/errors.hpp"

namespace rlpga {

ParamSet init_mlp(const std::string& prefix, const MlpShape& shape, Rng& rng) {
  if (shape.widths.size() < 2) throw ContractError("mlp needs at least input and output widths");
  ParamSet params;
  for (std::size_t l = 0; l < shape.layers(); ++l) {
    const std::size_t fan_in = shape.widths[l];
    const std::size_t fan_out = shape.widths[l + 1];
    if (fan_in == 0 || fan_out == 0) throw ContractError("mlp widths must be positive");
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    Tensor w(fan_in, fan_out);
    for (double& v : w.data()) v = rng.uniform(-bound, bound);
    params.add(prefix + ".W" + std::to_string(l), std::move(w));
    params.add(prefix + ".b" + std::to_string(l), Tensor(fan_out));
  }
  return params;
}

Var mlp_forward(Tape& tape, std::span<const Var> params, Var x, const MlpShape& shape) {
  if (params.size() != 2 * shape.layers()) throw ContractError("mlp parameter count mismatch");
  Var h = x;
  for (std::size_t l = 0; l < shape.layers(); ++l) {
    h = tape.linear(h, params[2 * l], params[2 * l + 1]);
    if (l + 1 < shape.layers() || shape.relu_on_output) h = tape.relu(h);
  }
  return h;
}

Tensor mlp_forward(const ParamSet& params, const Tensor& x, const MlpShape& shape) {
  if (params.size() != 2 * shape.layers()) throw ContractError("mlp parameter count mismatch");
  Tensor h = x;
  for (std::size_t l = 0; l < shape.layers(); ++l) {
    h = linear_forward(h, params[2 * l].value, params[2 * l + 1].value);
    if (l + 1 < shape.layers() || shape.relu_on_output) h = relu(h);
  }
  return h;
}

}  // namespace rlpga
