// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "rlpga/autodiff.hpp"
#include "rlpga/params.hpp"
#include "rlpga/rng.hpp"

namespace rlpga {

// Fully connected ReLU network. widths = {input, hidden..., output}; the
// parameters are stored as W0, b0, W1, b1, ... with a name prefix.
struct MlpShape {
  std::vector<std::size_t> widths;
  bool relu_on_output = false;

  std::size_t layers() const noexcept { return widths.empty() ? 0 : widths.size() - 1; }
  std::size_t input_dim() const noexcept { return widths.front(); }
  std::size_t output_dim() const noexcept { return widths.back(); }
};

// Kaiming-uniform weights (bound sqrt(6 / fan_in)), zero biases.
ParamSet init_mlp(const std::string& prefix, const MlpShape& shape, Rng& rng);

Var mlp_forward(Tape& tape, std::span<const Var> params, Var x, const MlpShape& shape);
Tensor mlp_forward(const ParamSet& params, const Tensor& x, const MlpShape& shape);

}  // namespace rlpga
