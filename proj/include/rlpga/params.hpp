// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rlpga/tensor.hpp"

namespace rlpga {

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
};

// Ordered, uniquely named parameters with matching gradient buffers.
class ParamSet {
 public:
  Param& add(std::string name, Tensor value);

  std::size_t size() const noexcept { return params_.size(); }
  Param& operator[](std::size_t i) { return params_[i]; }
  const Param& operator[](std::size_t i) const { return params_[i]; }
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;

  auto begin() noexcept { return params_.begin(); }
  auto end() noexcept { return params_.end(); }
  auto begin() const noexcept { return params_.begin(); }
  auto end() const noexcept { return params_.end(); }

  void zero_grad();
  bool all_finite() const noexcept;
  // Order-sensitive FNV-1a over the raw parameter bytes.
  std::uint64_t checksum() const noexcept;
  double squared_norm() const noexcept;

 private:
  std::vector<Param> params_;
};

}  // namespace rlpga
