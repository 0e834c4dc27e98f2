// SPDX-License-Identifier: Apache-2.0
#include "rlpga/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rlpga {

GradCheckReport grad_check_report(const LossWithGrad& loss, ParamSet& params, double h) {
  params.zero_grad();
  loss(params);
  std::vector<Tensor> analytic;
  for (const auto& p : params) analytic.push_back(p.grad);

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& values = params[k].value.data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      params.zero_grad();
      const double up = loss(params);
      values[i] = saved - h;
      params.zero_grad();
      const double down = loss(params);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-2});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > report.max_rel_error || std::isnan(rel)) {
        report.max_rel_error = std::isnan(rel) ? INFINITY : rel;
        report.worst_param = k;
        report.worst_index = i;
      }
    }
  }
  for (std::size_t k = 0; k < params.size(); ++k) params[k].grad = analytic[k];
  return report;
}

double grad_check(const LossWithGrad& loss, ParamSet& params, double h) {
  return grad_check_report(loss, params, h).max_rel_error;
}

}  // namespace rlpga
