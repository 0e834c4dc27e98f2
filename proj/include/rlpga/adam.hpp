// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "rlpga/params.hpp"

namespace rlpga {

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamState make_adam_state(const ParamSet& params);

// One bias-corrected Adam descent step using the gradients stored in params.
// Throws NumericError naming the parameter if any gradient is non-finite;
// nothing is modified in that case.
void adam_step(ParamSet& params, AdamState& state, double lr);

}  // namespace rlpga
