// SPDX-License-Identifier: Apache-2.0
#include "rlpga/params.hpp"

#include <cstring>

#include "rlpga/errors.hpp"

namespace rlpga {

Param& ParamSet::add(std::string name, Tensor value) {
  for (const auto& p : params_) {
    if (p.name == name) throw ContractError("duplicate parameter name '" + name + "'");
  }
  Tensor grad = value;
  grad.fill(0.0);
  params_.push_back(Param{std::move(name), std::move(value), std::move(grad)});
  return params_.back();
}

Param& ParamSet::at(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw ContractError("no parameter named '" + name + "'");
}

const Param& ParamSet::at(const std::string& name) const {
  return const_cast<ParamSet*>(this)->at(name);
}

void ParamSet::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

bool ParamSet::all_finite() const noexcept {
  for (const auto& p : params_) {
    if (!p.value.all_finite()) return false;
  }
  return true;
}

std::uint64_t ParamSet::checksum() const noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& p : params_) {
    for (double x : p.value.data()) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &x, sizeof x);
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
      }
    }
  }
  return h;
}

double ParamSet::squared_norm() const noexcept {
  double s = 0.0;
  for (const auto& p : params_)
    for (double x : p.value.data()) s += x * x;
  return s;
}

}  // namespace rlpga
