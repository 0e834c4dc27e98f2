// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "rlpga/params.hpp"

namespace rlpga {

// Evaluates the loss at the current parameters and writes analytic gradients
// into params[i].grad (which the caller has already zeroed). Must be pure.
using LossWithGrad = std::function<double(ParamSet&)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
};

// Compares every analytic gradient entry with a central difference of step h.
// Relative error is |a - n| / max(|a|, |n|, 1e-2); the floor keeps entries
// that are numerically zero from dominating. Parameters are restored.
GradCheckReport grad_check_report(const LossWithGrad& loss, ParamSet& params, double h = 1e-5);
double grad_check(const LossWithGrad& loss, ParamSet& params, double h = 1e-5);

}  // namespace rlpga
