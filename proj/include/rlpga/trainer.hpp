// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rlpga/adam.hpp"
#include "rlpga/data.hpp"
#include "rlpga/graph.hpp"
#include "rlpga/mlp.hpp"
#include "rlpga/params.hpp"
#include "rlpga/rng.hpp"

namespace rlpga {

enum class Variant {
  rlpga,     // DMI + local preserving + Wasserstein alignment
  rga,       // rlpga with alpha = 0
  wdgrl_ce,  // cross-entropy + Wasserstein alignment, alpha = 0
  rlpga_kl,  // rlpga with a domain classifier under gradient reversal
};

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);
bool uses_dmi(Variant v) noexcept;

struct Architecture {
  std::vector<std::size_t> f_hidden{20};      // last entry is the latent width
  std::vector<std::size_t> critic_hidden{20};  // followed by a single output unit
};

struct TrainConfig {
  double alpha = 1.0;
  double beta = 0.1;
  double gamma = 1.0;
  std::size_t k = 3;
  Bandwidth t1 = Bandwidth::median_heuristic();
  double weight_decay = 5e-4;
  double lr_critic = 1e-4;
  double lr_f = 1e-4;
  double lr_h = 1e-4;
  int n_critic = 5;
  double gp_coeff = 10.0;
  long steps = 5000;
  std::size_t batch = 64;  // both domains together
  std::uint64_t seed = 0;
  Variant variant = Variant::rlpga;
  Architecture arch;
  std::optional<Metric> metric;  // unset: chosen from the input width
  bool stratified = false;
  bool allow_small_batch = false;
  long eval_interval = 50;
  // Cross-entropy steps before the DMI loss takes over (DMI variants only).
  // |det T| cannot tell a classifier from its label-permuted copy, so a short
  // CE phase fixes the orientation first.
  long ce_warmup = 300;

  std::size_t half_batch() const noexcept { return batch / 2; }
  // Throws ConfigError on an invalid combination.
  void validate(std::size_t classes) const;
};

// Named hyperparameter presets: synthetic, office_caltech10, office31,
// office_home, digits, email, amazon.
TrainConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

struct Models {
  MlpShape f_shape;
  MlpShape h_shape;
  MlpShape critic_shape;
  ParamSet f;
  ParamSet h;
  ParamSet critic;
};

struct TrainState {
  Models models;
  AdamState adam_f;
  AdamState adam_h;
  AdamState adam_critic;
  long step = 0;
  Rng rng;
};

TrainState init_models(const TrainConfig& config, std::size_t input_dim, std::size_t classes, Rng& rng);

struct LossBundle {
  double l_clf = 0.0;       // DMI (with gamma * l_r) or cross-entropy
  double l_r = 0.0;         // reported for every variant
  double dis_pn = 0.0;
  double w_estimate = 0.0;  // Wasserstein dual, or domain BCE for rlpga_kl
  double w_weight = 0.0;    // coefficient of w_estimate in total (beta, or -beta)
  double penalty = 0.0;     // weight_decay * |params_f|²
  double total = 0.0;

  // l_clf + alpha * dis_pn + w_weight * w_estimate + penalty, summed in the
  // same order as the objective.
  double recompose(double alpha) const noexcept;
};

struct CriticOutcome {
  double estimate = 0.0;  // dual estimate (or BCE) after the updates
  double penalty = 0.0;   // gradient penalty at the last update
};

// One Adam ascent step on mean(c_s) - mean(c_t) - gp_coeff * penalty with
// fixed features. Returns the dual estimate before the step.
double critic_ascent_step(ParamSet& critic, AdamState& adam, const MlpShape& shape,
                          const Tensor& z_s, const Tensor& z_t, double gp_coeff, double lr,
                          Rng& rng, double* penalty_out = nullptr);

// n_critic critic updates with f frozen.
CriticOutcome critic_phase(TrainState& state, const TrainingView& batch, const TrainConfig& config);

struct GraphPair {
  const SignedWeightGraph* source;
  const SignedWeightGraph* target;
};

// One Adam step on h (classification loss) and on f (full objective) with the
// critic frozen.
LossBundle main_phase(TrainState& state, const TrainingView& batch, GraphPair graphs,
                      const TrainConfig& config);

struct IterationRecord {
  long step = 0;
  double w_estimate = 0.0;  // critic evaluated on the full source and target sets
  double l_clf = 0.0;
  double l_r = 0.0;
  double dis_pn = 0.0;
  double total = 0.0;
  double src_acc_noisy = 0.0;
  std::optional<double> tgt_acc;
  double ms_critic = 0.0;  // mean wall time per step since the previous record
  double ms_main = 0.0;
  double ms_graph = 0.0;
};

struct TrainHooks {
  std::function<void(const IterationRecord&)> on_record;
  std::function<void(long step, const SignedWeightGraph& source, const SignedWeightGraph& target)>
      on_graphs;  // called at record steps
};

struct TrainResult {
  TrainState state;
  std::vector<IterationRecord> records;
};

// Runs the alternating critic/main loop for config.steps. `src` carries the
// (already corrupted) training labels; `tgt` is used through its features
// only; `tgt_eval`, when given, supplies labelled target data for accuracy.
TrainResult train(const TrainConfig& config, const DomainDataset& src, const DomainDataset& tgt,
                  const DomainDataset* tgt_eval = nullptr, const TrainHooks& hooks = {});

std::vector<int> predict(const Models& models, const Tensor& x);
// Fraction of argmax predictions equal to the labels (ties go to the lower class).
double evaluate(const Models& models, const Tensor& x, std::span<const int> labels);
double evaluate(const TrainState& state, const Tensor& x, std::span<const int> labels);

// Latent features f(x).
Tensor embed(const Models& models, const Tensor& x);

// Full-set discrepancy: Wasserstein dual for critic variants, BCE for rlpga_kl.
double discrepancy_estimate(const Models& models, Variant variant, const Tensor& src_x,
                            const Tensor& tgt_x);

}  // namespace rlpga
