// SPDX-License-Identifier: Apache-2.0
#include "rlpga/losses.hpp"

#include <algorithm>
#include <cmath>

#include "rlpga/errors.hpp"
#include "rlpga/linalg.hpp"

namespace rlpga {
namespace {

double safe_log(double x) { return std::log(std::max(x, kProbFloor)); }

// -x log x with the probability floor, and its derivative.
double neg_xlogx(double x) { return -x * safe_log(x); }
double neg_xlogx_grad(double x) { return -safe_log(x) - (x >= kProbFloor ? 1.0 : 0.0); }

void require_rows(const Tensor& a, const Tensor& b, const char* what) {
  if (a.rank() != 2 || b.rank() != 2 || a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractError(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " +
                        b.shape_string());
  }
}

Tensor column_mean(const Tensor& probs) {
  Tensor q(probs.cols());
  for (std::size_t i = 0; i < probs.rows(); ++i)
    for (std::size_t c = 0; c < probs.cols(); ++c) q[c] += probs(i, c);
  for (double& v : q.data()) v /= static_cast<double>(probs.rows());
  return q;
}

double neg_log_abs_det_value(const Slogdet& sd, double eps) {
  const double abs_det = sd.sign == 0 ? 0.0 : std::exp(sd.logabs);
  return -std::log(abs_det + eps);
}

struct PairTerm {
  std::size_t domain, i, j;
  double exponent;
  bool clamped;
};

// Exponents of every ordered pair with a nonzero signed weight.
std::vector<PairTerm> dispn_terms(std::span<const Tensor* const> zs,
                                  std::span<const Tensor* const> hs) {
  std::vector<PairTerm> terms;
  for (std::size_t d = 0; d < zs.size(); ++d) {
    const Tensor& z = *zs[d];
    const Tensor& h = *hs[d];
    if (h.rank() != 2 || h.rows() != z.rows() || h.cols() != z.rows()) {
      throw ContractError("dispn: graph " + h.shape_string() + " does not match features " +
                          z.shape_string());
    }
    for (std::size_t i = 0; i < z.rows(); ++i) {
      for (std::size_t j = 0; j < z.rows(); ++j) {
        const double w = h(i, j);
        if (i == j || w == 0.0) continue;
        double sq = 0.0;
        for (std::size_t c = 0; c < z.cols(); ++c) {
          const double diff = z(i, c) - z(j, c);
          sq += diff * diff;
        }
        const double raw = sq * w;
        const double e = std::clamp(raw, -kExponentClamp, kExponentClamp);
        terms.push_back({d, i, j, e, e != raw});
      }
    }
  }
  return terms;
}

// Ordered pairs (diagonal included) whose weight is zero; each adds exp(0).
double zero_pair_count(std::span<const Tensor* const> zs, std::size_t nonzero) {
  double total = 0.0;
  for (const Tensor* z : zs) total += static_cast<double>(z->rows()) * static_cast<double>(z->rows());
  return total - static_cast<double>(nonzero);
}

// log(base + Σ exp(e_k)) and the softmax weights d/de_k.
std::pair<double, std::vector<double>> log_sum_exp(double base,
                                                   const std::vector<PairTerm>& terms) {
  double m = 0.0;
  for (const auto& t : terms) m = std::max(m, t.exponent);
  double s = base * std::exp(-m);
  std::vector<double> w(terms.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    w[k] = std::exp(terms[k].exponent - m);
    s += w[k];
  }
  for (double& v : w) v /= s;
  return {m + std::log(s), std::move(w)};
}

// Input gradient of a ReLU MLP with scalar output at one point, along with
// the per-layer activation masks and backward vectors needed to
// differentiate its norm with respect to the weights.
struct InputGradient {
  std::vector<std::vector<std::uint8_t>> masks;  // hidden layers
  std::vector<std::vector<double>> u;            // u[l] = W_l (D_l u[l+1]), u[L-1] = W_{L-1}[:,0]
};

InputGradient critic_input_gradient(std::span<const Tensor* const> weights,
                                    std::span<const Tensor* const> biases,
                                    std::span<const double> point) {
  const std::size_t layers = weights.size();
  InputGradient out;
  std::vector<double> act(point.begin(), point.end());
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    const Tensor& w = *weights[l];
    const Tensor& b = *biases[l];
    std::vector<double> pre(w.cols());
    for (std::size_t j = 0; j < w.cols(); ++j) pre[j] = b[j];
    for (std::size_t i = 0; i < w.rows(); ++i) {
      const double a = act[i];
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < w.cols(); ++j) pre[j] += a * w(i, j);
    }
    std::vector<std::uint8_t> mask(w.cols());
    for (std::size_t j = 0; j < w.cols(); ++j) {
      mask[j] = pre[j] > 0.0;
      pre[j] = mask[j] ? pre[j] : 0.0;
    }
    out.masks.push_back(std::move(mask));
    act = std::move(pre);
  }
  out.u.resize(layers);
  const Tensor& last = *weights[layers - 1];
  out.u[layers - 1].resize(last.rows());
  for (std::size_t i = 0; i < last.rows(); ++i) out.u[layers - 1][i] = last(i, 0);
  for (std::size_t l = layers - 1; l-- > 0;) {
    const Tensor& w = *weights[l];
    std::vector<double>& u = out.u[l];
    u.assign(w.rows(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < w.cols(); ++j)
        if (out.masks[l][j]) s += w(i, j) * out.u[l + 1][j];
      u[i] = s;
    }
  }
  return out;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void split_critic(std::span<const Tensor* const> params, const MlpShape& shape,
                  std::vector<const Tensor*>& weights, std::vector<const Tensor*>& biases) {
  if (params.size() != 2 * shape.layers() || shape.output_dim() != 1) {
    throw ContractError("gradient penalty needs a scalar-output critic");
  }
  for (std::size_t l = 0; l < shape.layers(); ++l) {
    weights.push_back(params[2 * l]);
    biases.push_back(params[2 * l + 1]);
  }
}

double penalty_value(std::span<const Tensor* const> params, const MlpShape& shape,
                     const Tensor& points, std::vector<std::vector<Tensor>>* grads) {
  std::vector<const Tensor*> weights, biases;
  split_critic(params, shape, weights, biases);
  if (points.rows() == 0) throw ContractError("gradient penalty over zero points");
  if (points.cols() != shape.input_dim()) {
    throw ContractError("gradient penalty: points " + points.shape_string() +
                        " do not match critic input " + std::to_string(shape.input_dim()));
  }
  const std::size_t layers = weights.size();
  const double inv_n = 1.0 / static_cast<double>(points.rows());
  double total = 0.0;
  for (std::size_t p = 0; p < points.rows(); ++p) {
    const InputGradient ig = critic_input_gradient(weights, biases, points.row(p));
    const double g = norm(ig.u[0]);
    total += (g - 1.0) * (g - 1.0);
    if (!grads || g == 0.0) continue;
    // e = d penalty / d u[l]; walk u[l] = W_l (D_l u[l+1]) backwards.
    std::vector<double> e(ig.u[0].size());
    const double scale = 2.0 * (g - 1.0) / g * inv_n;
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = scale * ig.u[0][i];
    for (std::size_t l = 0; l + 1 < layers; ++l) {
      const Tensor& w = *weights[l];
      Tensor& dw = (*grads)[l][0];
      std::vector<double> next(w.cols(), 0.0);
      for (std::size_t j = 0; j < w.cols(); ++j) {
        if (!ig.masks[l][j]) continue;
        const double v = ig.u[l + 1][j];
        double back = 0.0;
        for (std::size_t i = 0; i < w.rows(); ++i) {
          dw(i, j) += e[i] * v;
          back += w(i, j) * e[i];
        }
        next[j] = back;
      }
      e = std::move(next);
    }
    Tensor& dlast = (*grads)[layers - 1][0];
    for (std::size_t i = 0; i < e.size(); ++i) dlast(i, 0) += e[i];
  }
  return total * inv_n;
}

}  // namespace

void validate_onehot(const Tensor& onehot) {
  for (std::size_t i = 0; i < onehot.rows(); ++i) {
    int ones = 0;
    bool ok = true;
    for (double v : onehot.row(i)) {
      if (v == 1.0) {
        ++ones;
      } else if (v != 0.0) {
        ok = false;
      }
    }
    if (!ok || ones != 1) throw DataError("label row " + std::to_string(i) + " is not one-hot");
  }
}

Tensor one_hot(std::span<const int> labels, std::size_t classes) {
  Tensor out(labels.size(), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      throw DataError("label at index " + std::to_string(i) + " out of range");
    }
    out(i, static_cast<std::size_t>(labels[i])) = 1.0;
  }
  return out;
}

JointEstimate joint_estimate(const Tensor& probs, const Tensor& onehot) {
  require_rows(probs, onehot, "joint_estimate");
  if (probs.rows() == 0) throw ContractError("joint_estimate: empty batch");
  validate_onehot(onehot);
  JointEstimate out{matmul_tn(probs, onehot), probs.rows()};
  for (double& v : out.t.data()) v /= static_cast<double>(out.n);
  return out;
}

double entropy_regularizer(const Tensor& probs) {
  if (probs.rows() == 0) throw ContractError("entropy_regularizer: empty batch");
  double rows = 0.0;
  for (double v : probs.data()) rows += neg_xlogx(v);
  rows /= static_cast<double>(probs.rows());
  const Tensor q = column_mean(probs);
  double mean_entropy = 0.0;
  for (double v : q.data()) mean_entropy += neg_xlogx(v);
  return rows - mean_entropy;
}

DmiLoss dmi_loss(const Tensor& probs, const Tensor& onehot, double gamma) {
  const JointEstimate joint = joint_estimate(probs, onehot);
  DmiLoss out;
  out.log_det_term = neg_log_abs_det_value(slogdet(joint.t), kDetFloor);
  out.l_r = entropy_regularizer(probs);
  out.value = out.log_det_term + gamma * out.l_r;
  out.degenerate = probs.rows() < probs.cols();
  return out;
}

double cross_entropy(const Tensor& probs, const Tensor& onehot) {
  require_rows(probs, onehot, "cross_entropy");
  validate_onehot(onehot);
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (onehot[i] == 1.0) s -= safe_log(probs[i]);
  return s / static_cast<double>(probs.rows());
}

double dispn_contribution(const Tensor& z, const Tensor& h_pn) {
  const Tensor* zs[] = {&z};
  const Tensor* hs[] = {&h_pn};
  double s = 0.0;
  for (const auto& t : dispn_terms(zs, hs)) s += std::exp(t.exponent);
  return s;
}

double dispn_loss(std::span<const DisPnDomain> domains) {
  std::vector<const Tensor*> zs, hs;
  for (const auto& d : domains) {
    zs.push_back(d.z);
    hs.push_back(d.h_pn);
  }
  const std::vector<PairTerm> terms = dispn_terms(zs, hs);
  return log_sum_exp(1.0 + zero_pair_count(zs, terms.size()), terms).first;
}

double wasserstein_estimate(std::span<const double> c_s, std::span<const double> c_t) {
  if (c_s.empty() || c_t.empty()) throw ContractError("wasserstein_estimate: empty batch");
  double a = 0.0, b = 0.0;
  for (double v : c_s) a += v;
  for (double v : c_t) b += v;
  return a / static_cast<double>(c_s.size()) - b / static_cast<double>(c_t.size());
}

Tensor penalty_interpolates(const Tensor& z_s, const Tensor& z_t, Rng& rng) {
  if (z_s.cols() != z_t.cols()) {
    throw ContractError("penalty_interpolates: widths differ " + z_s.shape_string() + " vs " +
                        z_t.shape_string());
  }
  const std::size_t n = std::min(z_s.rows(), z_t.rows());
  Tensor out(n, z_s.cols());
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    for (std::size_t c = 0; c < z_s.cols(); ++c) out(i, c) = u * z_s(i, c) + (1.0 - u) * z_t(i, c);
  }
  return out;
}

double gradient_penalty(const ParamSet& critic, const MlpShape& shape, const Tensor& points) {
  std::vector<const Tensor*> params;
  for (const auto& p : critic) params.push_back(&p.value);
  return penalty_value(params, shape, points, nullptr);
}

double gradient_penalty(const ParamSet& critic, const MlpShape& shape, const Tensor& z_s,
                        const Tensor& z_t, Rng& rng) {
  return gradient_penalty(critic, shape, penalty_interpolates(z_s, z_t, rng));
}

double domain_kl_discrepancy(std::span<const double> d_s, std::span<const double> d_t) {
  if (d_s.empty() || d_t.empty()) throw ContractError("domain_kl_discrepancy: empty batch");
  double s = 0.0;
  for (double p : d_s) s -= safe_log(p);
  for (double p : d_t) s -= safe_log(1.0 - p);
  return s / static_cast<double>(d_s.size() + d_t.size());
}

namespace nodes {

Var joint_estimate(Tape& tape, Var probs, const Tensor& onehot) {
  JointEstimate joint = rlpga::joint_estimate(tape.value(probs), onehot);
  const double n = static_cast<double>(joint.n);
  return tape.custom({probs}, std::move(joint.t),
                     [onehot, n](const Tensor& g, std::span<Tensor* const> in) {
                       // dO = L Gᵀ / N
                       Tensor& d = *in[0];
                       for (std::size_t r = 0; r < onehot.rows(); ++r)
                         for (std::size_t a = 0; a < g.rows(); ++a) {
                           double s = 0.0;
                           for (std::size_t b = 0; b < g.cols(); ++b) s += g(a, b) * onehot(r, b);
                           d(r, a) += s / n;
                         }
                     });
}

Var neg_log_abs_det(Tape& tape, Var t, double eps) {
  const Tensor& tv = tape.value(t);
  const Slogdet sd = slogdet(tv);
  const double abs_det = sd.sign == 0 ? 0.0 : std::exp(sd.logabs);
  Tensor grad_factor;
  if (abs_det > eps) {
    grad_factor = slogdet_backward(tv);
    const double scale = -abs_det / (abs_det + eps);
    for (double& v : grad_factor.data()) v *= scale;
  }
  return tape.custom({t}, Tensor::vector({neg_log_abs_det_value(sd, eps)}),
                     [grad_factor](const Tensor& g, std::span<Tensor* const> in) {
                       if (grad_factor.size() == 0) return;
                       for (std::size_t i = 0; i < grad_factor.size(); ++i)
                         (*in[0])[i] += g[0] * grad_factor[i];
                     });
}

Var entropy_regularizer(Tape& tape, Var probs) {
  const Tensor& o = tape.value(probs);
  const double value = rlpga::entropy_regularizer(o);
  const Tensor q = column_mean(o);
  return tape.custom({probs}, Tensor::vector({value}),
                     [&tape, probs, q](const Tensor& g, std::span<Tensor* const> in) {
                       const Tensor& o = tape.value(probs);
                       const double inv_n = 1.0 / static_cast<double>(o.rows());
                       for (std::size_t i = 0; i < o.rows(); ++i)
                         for (std::size_t c = 0; c < o.cols(); ++c)
                           (*in[0])(i, c) +=
                               g[0] * inv_n * (neg_xlogx_grad(o(i, c)) - neg_xlogx_grad(q[c]));
                     });
}

Var dmi_loss(Tape& tape, Var probs, const Tensor& onehot, double gamma) {
  const Var det_term = neg_log_abs_det(tape, joint_estimate(tape, probs, onehot));
  if (gamma == 0.0) return det_term;
  return tape.combine({{1.0, det_term}, {gamma, entropy_regularizer(tape, probs)}});
}

Var cross_entropy(Tape& tape, Var probs, const Tensor& onehot) {
  const double value = rlpga::cross_entropy(tape.value(probs), onehot);
  return tape.custom({probs}, Tensor::vector({value}),
                     [&tape, probs, onehot](const Tensor& g, std::span<Tensor* const> in) {
                       const Tensor& o = tape.value(probs);
                       const double inv_n = 1.0 / static_cast<double>(o.rows());
                       for (std::size_t i = 0; i < o.size(); ++i)
                         if (onehot[i] == 1.0 && o[i] >= kProbFloor)
                           (*in[0])[i] -= g[0] * inv_n / o[i];
                     });
}

Var dispn_loss(Tape& tape, std::span<const DisPnInput> domains) {
  std::vector<const Tensor*> zs, hs;
  std::vector<Var> inputs;
  for (const auto& d : domains) {
    zs.push_back(&tape.value(d.z));
    hs.push_back(d.h_pn);
    inputs.push_back(d.z);
  }
  std::vector<PairTerm> terms = dispn_terms(zs, hs);
  auto [value, weights] = log_sum_exp(1.0 + zero_pair_count(zs, terms.size()), terms);
  return tape.custom(
      inputs, Tensor::vector({value}),
      [&tape, inputs, hs, terms = std::move(terms), weights = std::move(weights)](
          const Tensor& g, std::span<Tensor* const> in) {
        for (std::size_t k = 0; k < terms.size(); ++k) {
          const PairTerm& t = terms[k];
          Tensor* dz = in[t.domain];
          if (t.clamped || !dz) continue;
          const Tensor& z = tape.value(inputs[t.domain]);
          const double coef = g[0] * weights[k] * 2.0 * (*hs[t.domain])(t.i, t.j);
          for (std::size_t c = 0; c < z.cols(); ++c) {
            const double diff = coef * (z(t.i, c) - z(t.j, c));
            (*dz)(t.i, c) += diff;
            (*dz)(t.j, c) -= diff;
          }
        }
      });
}

Var wasserstein_estimate(Tape& tape, Var c_s, Var c_t) {
  return tape.combine({{1.0, tape.mean(c_s)}, {-1.0, tape.mean(c_t)}});
}

Var gradient_penalty(Tape& tape, std::span<const Var> critic, const MlpShape& shape,
                     const Tensor& points) {
  std::vector<const Tensor*> params;
  for (Var v : critic) params.push_back(&tape.value(v));
  const double value = penalty_value(params, shape, points, nullptr);
  std::vector<Var> inputs(critic.begin(), critic.end());
  return tape.custom(inputs, Tensor::vector({value}),
                     [&tape, inputs, shape, points](const Tensor& g, std::span<Tensor* const> in) {
                       std::vector<const Tensor*> params;
                       for (Var v : inputs) params.push_back(&tape.value(v));
                       std::vector<std::vector<Tensor>> grads(shape.layers());
                       for (std::size_t l = 0; l < shape.layers(); ++l) {
                         Tensor zero = *params[2 * l];
                         zero.fill(0.0);
                         grads[l].push_back(std::move(zero));
                       }
                       penalty_value(params, shape, points, &grads);
                       for (std::size_t l = 0; l < shape.layers(); ++l) {
                         Tensor* dw = in[2 * l];
                         if (!dw) continue;
                         for (std::size_t i = 0; i < dw->size(); ++i)
                           (*dw)[i] += g[0] * grads[l][0][i];
                       }
                     });
}

Var domain_bce(Tape& tape, Var d_s, Var d_t) {
  const Tensor& s = tape.value(d_s);
  const Tensor& t = tape.value(d_t);
  const double value = domain_kl_discrepancy(s.data(), t.data());
  const double inv_n = 1.0 / static_cast<double>(s.size() + t.size());
  return tape.custom({d_s, d_t}, Tensor::vector({value}),
                     [&tape, d_s, d_t, inv_n](const Tensor& g, std::span<Tensor* const> in) {
                       if (in[0]) {
                         const Tensor& s = tape.value(d_s);
                         for (std::size_t i = 0; i < s.size(); ++i)
                           if (s[i] >= kProbFloor) (*in[0])[i] -= g[0] * inv_n / s[i];
                       }
                       if (in[1]) {
                         const Tensor& t = tape.value(d_t);
                         for (std::size_t i = 0; i < t.size(); ++i)
                           if (1.0 - t[i] >= kProbFloor) (*in[1])[i] += g[0] * inv_n / (1.0 - t[i]);
                       }
                     });
}

}  // namespace nodes
}  // namespace rlpga
