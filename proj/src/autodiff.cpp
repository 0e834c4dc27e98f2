// SPDX-License-Identifier: Apache-2.0
#include "rlpga/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "rlpga/errors.hpp"

namespace rlpga {

Tensor linear_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.rank() != 2 || w.rank() != 2 || x.cols() != w.rows() || b.size() != w.cols()) {
    throw ContractError("linear: shape mismatch x" + x.shape_string() + " W" + w.shape_string() +
                        " b" + b.shape_string());
  }
  Tensor out = matmul(x, w);
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += b[j];
  return out;
}

Tensor softmax_rows(const Tensor& x) {
  Tensor out = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = out.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      total += v;
    }
    for (double& v : row) v /= total;
  }
  return out;
}

Tensor relu(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

Var Tape::push(std::vector<Var> inputs, Tensor value, BackwardFn backward) {
  Node node;
  node.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                   [&](Var v) { return nodes_[v.id].requires_grad; });
  if (node.requires_grad) {
    node.grad = value;
    node.grad.fill(0.0);
    node.backward = std::move(backward);
  }
  node.value = std::move(value);
  node.inputs = std::move(inputs);
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Var Tape::variable(Tensor value) {
  Node node;
  node.grad = value;
  node.grad.fill(0.0);
  node.value = std::move(value);
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

std::vector<Var> Tape::bind(const ParamSet& params, bool trainable) {
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(trainable ? variable(p.value) : constant(p.value));
  return vars;
}

void Tape::accumulate_into(std::span<const Var> vars, ParamSet& params) const {
  if (vars.size() != params.size()) throw ContractError("accumulate_into: size mismatch");
  for (std::size_t k = 0; k < vars.size(); ++k) {
    const Node& node = nodes_[vars[k].id];
    if (!node.requires_grad) continue;
    auto& dst = params[k].grad.data();
    const auto& src = node.grad.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
}

Var Tape::linear(Var x, Var w, Var b) {
  Tensor out = linear_forward(value(x), value(w), value(b));
  return push({x, w, b}, std::move(out),
              [this, x, w](const Tensor& g, std::span<Tensor* const> in) {
                const Tensor& xv = value(x);
                const Tensor& wv = value(w);
                if (in[0]) {
                  Tensor dx = matmul(g, transpose(wv));
                  for (std::size_t i = 0; i < dx.size(); ++i) (*in[0])[i] += dx[i];
                }
                if (in[1]) {
                  Tensor dw = matmul_tn(xv, g);
                  for (std::size_t i = 0; i < dw.size(); ++i) (*in[1])[i] += dw[i];
                }
                if (in[2]) {
                  for (std::size_t r = 0; r < g.rows(); ++r)
                    for (std::size_t c = 0; c < g.cols(); ++c) (*in[2])[c] += g(r, c);
                }
              });
}

Var Tape::relu(Var x) {
  return push({x}, rlpga::relu(value(x)), [this, x](const Tensor& g, std::span<Tensor* const> in) {
    const Tensor& xv = value(x);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (xv[i] > 0.0) (*in[0])[i] += g[i];
  });
}

Var Tape::sigmoid(Var x) {
  Tensor out = value(x);
  for (double& v : out.data()) v = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  const std::size_t self = nodes_.size();
  return push({x}, std::move(out), [this, self](const Tensor& g, std::span<Tensor* const> in) {
    const Tensor& s = nodes_[self].value;
    for (std::size_t i = 0; i < g.size(); ++i) (*in[0])[i] += g[i] * s[i] * (1.0 - s[i]);
  });
}

Var Tape::softmax_rows(Var x) {
  const std::size_t self = nodes_.size();
  return push({x}, rlpga::softmax_rows(value(x)),
              [this, self](const Tensor& g, std::span<Tensor* const> in) {
                const Tensor& p = nodes_[self].value;
                for (std::size_t i = 0; i < p.rows(); ++i) {
                  double dot = 0.0;
                  for (std::size_t j = 0; j < p.cols(); ++j) dot += g(i, j) * p(i, j);
                  for (std::size_t j = 0; j < p.cols(); ++j)
                    (*in[0])(i, j) += p(i, j) * (g(i, j) - dot);
                }
              });
}

Var Tape::mean(Var x) {
  const Tensor& xv = value(x);
  if (xv.size() == 0) throw ContractError("mean of empty tensor");
  double s = 0.0;
  for (double v : xv.data()) s += v;
  const double n = static_cast<double>(xv.size());
  return push({x}, Tensor::vector({s / n}), [n](const Tensor& g, std::span<Tensor* const> in) {
    for (double& v : in[0]->data()) v += g[0] / n;
  });
}

Var Tape::combine(std::span<const std::pair<double, Var>> terms) {
  std::vector<Var> inputs;
  std::vector<double> coefs;
  double total = 0.0;
  for (const auto& [c, v] : terms) {
    if (value(v).size() != 1) throw ContractError("combine expects scalar nodes");
    inputs.push_back(v);
    coefs.push_back(c);
    total += c * scalar(v);
  }
  return push(std::move(inputs), Tensor::vector({total}),
              [coefs](const Tensor& g, std::span<Tensor* const> in) {
                for (std::size_t k = 0; k < in.size(); ++k)
                  if (in[k]) (*in[k])[0] += coefs[k] * g[0];
              });
}

Var Tape::sum_of_squares(std::span<const Var> xs) {
  double total = 0.0;
  for (Var v : xs)
    for (double x : value(v).data()) total += x * x;
  std::vector<Var> inputs(xs.begin(), xs.end());
  return push(inputs, Tensor::vector({total}),
              [this, inputs](const Tensor& g, std::span<Tensor* const> in) {
                for (std::size_t k = 0; k < in.size(); ++k) {
                  if (!in[k]) continue;
                  const Tensor& xv = value(inputs[k]);
                  for (std::size_t i = 0; i < xv.size(); ++i) (*in[k])[i] += 2.0 * xv[i] * g[0];
                }
              });
}

Var Tape::custom(std::vector<Var> inputs, Tensor value, BackwardFn backward) {
  return push(std::move(inputs), std::move(value), std::move(backward));
}

void Tape::backward(Var root) {
  Node& r = nodes_[root.id];
  if (r.value.size() != 1) throw ContractError("backward: root must be scalar, got " + r.value.shape_string());
  if (!r.requires_grad) return;
  r.grad[0] += 1.0;
  std::vector<Tensor*> in_grads;
  for (std::size_t id = root.id + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.requires_grad || !node.backward) continue;
    in_grads.clear();
    for (Var v : node.inputs) {
      Node& input = nodes_[v.id];
      in_grads.push_back(input.requires_grad ? &input.grad : nullptr);
    }
    node.backward(node.grad, in_grads);
  }
}

}  // namespace rlpga
