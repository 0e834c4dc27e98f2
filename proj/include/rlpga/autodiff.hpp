// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "rlpga/params.hpp"
#include "rlpga/tensor.hpp"

namespace rlpga {

struct Var {
  std::size_t id = 0;
};

// Reverse-mode tape over a fixed set of primitives. Nodes are appended in
// evaluation order, so a single reverse sweep visits every consumer before
// its inputs. A tape is single-use: record, call backward() once, read grads.
class Tape {
 public:
  Tape() = default;
  // Backward closures refer to the tape by address.
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Receives the gradient flowing into the node's output and accumulates into
  // the gradients of its inputs; entries are null for inputs without grad.
  using BackwardFn = std::function<void(const Tensor& out_grad, std::span<Tensor* const> in_grads)>;

  Var constant(Tensor value);
  Var variable(Tensor value);

  // One leaf per parameter, in ParamSet order.
  std::vector<Var> bind(const ParamSet& params, bool trainable);
  // Adds the gradients of `vars` into params[i].grad.
  void accumulate_into(std::span<const Var> vars, ParamSet& params) const;

  // x (N×d) · W (d×m) + b (m).
  Var linear(Var x, Var w, Var b);
  Var relu(Var x);
  Var sigmoid(Var x);
  Var softmax_rows(Var x);
  Var mean(Var x);
  // Σ coef_i · s_i over scalar nodes.
  Var combine(std::span<const std::pair<double, Var>> terms);
  Var combine(std::initializer_list<std::pair<double, Var>> terms) {
    return combine(std::span<const std::pair<double, Var>>(terms.begin(), terms.size()));
  }
  // Σ over all entries of all inputs of x².
  Var sum_of_squares(std::span<const Var> xs);

  // Extension point for composite primitives defined outside the core.
  Var custom(std::vector<Var> inputs, Tensor value, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const { return nodes_[v.id].value[0]; }
  const Tensor& grad(Var v) const { return nodes_[v.id].grad; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  // Seeds d(root)/d(root) = 1; root must hold a single value.
  void backward(Var root);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::vector<Var> inputs;
    BackwardFn backward;
  };

  Var push(std::vector<Var> inputs, Tensor value, BackwardFn backward);

  std::vector<Node> nodes_;
};

// Plain (tape-free) forward primitives.
Tensor linear_forward(const Tensor& x, const Tensor& w, const Tensor& b);
Tensor softmax_rows(const Tensor& x);
Tensor relu(const Tensor& x);

}  // namespace rlpga
