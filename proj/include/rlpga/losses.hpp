// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "rlpga/autodiff.hpp"
#include "rlpga/mlp.hpp"
#include "rlpga/params.hpp"
#include "rlpga/rng.hpp"
#include "rlpga/tensor.hpp"

namespace rlpga {

inline constexpr double kDetFloor = 1e-12;
inline constexpr double kProbFloor = 1e-12;
inline constexpr double kExponentClamp = 30.0;

// Empirical joint distribution of (classifier output, noisy label):
// T = Oᵀ L / N for row-stochastic O (N×C) and one-hot L (N×C).
struct JointEstimate {
  Tensor t;
  std::size_t n = 0;
};

// Throws DataError naming the first row that is not one-hot.
void validate_onehot(const Tensor& onehot);
Tensor one_hot(std::span<const int> labels, std::size_t classes);

JointEstimate joint_estimate(const Tensor& probs, const Tensor& onehot);

// Mean per-row entropy minus the entropy of the column-mean distribution.
double entropy_regularizer(const Tensor& probs);

struct DmiLoss {
  double value = 0.0;         // -log(|det T| + 1e-12) + gamma * l_r
  double log_det_term = 0.0;  // -log(|det T| + 1e-12)
  double l_r = 0.0;
  // N < C: T has rank < C and the determinant term sits at -log(1e-12).
  bool degenerate = false;
};

DmiLoss dmi_loss(const Tensor& probs, const Tensor& onehot, double gamma);

double cross_entropy(const Tensor& probs, const Tensor& onehot);

// Σ over ordered pairs with h_pn != 0 of exp(clamp(|z_i - z_j|² h_pn(i,j), ±30)).
double dispn_contribution(const Tensor& z, const Tensor& h_pn);

struct DisPnDomain {
  const Tensor* z;
  const Tensor* h_pn;
};

// log(1 + Σ_domains Σ_{i,j} exp(...)) over all ordered pairs, diagonal
// included. Zero-weight pairs each add exp(0) = 1 and carry no gradient.
double dispn_loss(std::span<const DisPnDomain> domains);

// Empirical Kantorovich-Rubinstein dual: mean(c_s) - mean(c_t).
double wasserstein_estimate(std::span<const double> c_s, std::span<const double> c_t);

// u·z_s[i] + (1-u)·z_t[i] for i < min(|s|, |t|), one u ~ U(0,1) per pair.
Tensor penalty_interpolates(const Tensor& z_s, const Tensor& z_t, Rng& rng);

// Mean of (|∇_z critic(z)|₂ - 1)² over the rows of `points`.
double gradient_penalty(const ParamSet& critic, const MlpShape& shape, const Tensor& points);
double gradient_penalty(const ParamSet& critic, const MlpShape& shape, const Tensor& z_s,
                        const Tensor& z_t, Rng& rng);

// Binary cross-entropy of a domain classifier, source labelled 1 and target 0,
// averaged over all samples of both domains.
double domain_kl_discrepancy(std::span<const double> d_s, std::span<const double> d_t);

// Tape nodes. Labels and graph weights are constants.
namespace nodes {

Var joint_estimate(Tape& tape, Var probs, const Tensor& onehot);
// -log(|det T| + eps); zero gradient when |det T| <= eps.
Var neg_log_abs_det(Tape& tape, Var t, double eps = kDetFloor);
Var entropy_regularizer(Tape& tape, Var probs);
Var dmi_loss(Tape& tape, Var probs, const Tensor& onehot, double gamma);
Var cross_entropy(Tape& tape, Var probs, const Tensor& onehot);

struct DisPnInput {
  Var z;
  const Tensor* h_pn;
};
Var dispn_loss(Tape& tape, std::span<const DisPnInput> domains);

Var wasserstein_estimate(Tape& tape, Var c_s, Var c_t);
// Gradient reaches the critic weights only; the interpolates are constants.
Var gradient_penalty(Tape& tape, std::span<const Var> critic, const MlpShape& shape,
                     const Tensor& points);
Var domain_bce(Tape& tape, Var d_s, Var d_t);

}  // namespace nodes

}  // namespace rlpga
