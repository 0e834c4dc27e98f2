// SPDX-License-Identifier: Apache-2.0
#include "rlpga/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "rlpga/autodiff.hpp"
#include "rlpga/errors.hpp"
#include "rlpga/losses.hpp"

namespace rlpga {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::rlpga: return "rlpga";
    case Variant::rga: return "rga";
    case Variant::wdgrl_ce: return "wdgrl_ce";
    case Variant::rlpga_kl: return "rlpga_kl";
  }
  return "rlpga";
}

Variant parse_variant(const std::string& s) {
  for (Variant v : {Variant::rlpga, Variant::rga, Variant::wdgrl_ce, Variant::rlpga_kl}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown variant '" + s + "'");
}

bool uses_dmi(Variant v) noexcept { return v != Variant::wdgrl_ce; }

void TrainConfig::validate(std::size_t classes) const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (alpha < 0 || beta < 0 || gamma < 0) fail("alpha, beta and gamma must be non-negative");
  if ((variant == Variant::rga || variant == Variant::wdgrl_ce) && alpha != 0.0) {
    fail("variant " + to_string(variant) + " forces alpha = 0");
  }
  if (k < 1) fail("k must be positive");
  if (weight_decay < 0) fail("weight decay must be non-negative");
  if (lr_critic < 0 || lr_f < 0 || lr_h < 0) fail("learning rates must be non-negative");
  if (n_critic < 0) fail("n_critic must be non-negative");
  if (gp_coeff < 0) fail("gradient penalty coefficient must be non-negative");
  if (steps < 0) fail("steps must be non-negative");
  if (batch < 2 || batch % 2 != 0) fail("batch must be a positive even number");
  if (k + 1 > half_batch()) fail("k must be smaller than the per-domain batch");
  if (eval_interval < 1) fail("eval interval must be positive");
  if (ce_warmup < 0) fail("ce warmup must be non-negative");
  if (arch.f_hidden.empty() || arch.critic_hidden.empty()) fail("architecture widths missing");
  for (std::size_t w : arch.f_hidden)
    if (w == 0) fail("layer widths must be positive");
  for (std::size_t w : arch.critic_hidden)
    if (w == 0) fail("layer widths must be positive");
  if (classes < 2) fail("need at least 2 classes");
  if (uses_dmi(variant) && half_batch() < classes && !allow_small_batch) {
    fail("per-domain batch " + std::to_string(half_batch()) + " is smaller than the class count " +
         std::to_string(classes) + "; the DMI joint would be singular (pass the small-batch waiver "
         "to proceed)");
  }
}

TrainConfig preset_config(const std::string& name) {
  TrainConfig c;
  const Architecture deep{{500, 100}, {100}};
  const Architecture shallow{{500}, {100}};
  if (name == "synthetic") {
    c.alpha = 1; c.beta = 0.1; c.gamma = 1;
    // The 2-D generator needs a faster schedule and a fixed bandwidth to
    // align within 5000 steps; see README.
    c.lr_f = c.lr_h = c.lr_critic = 1e-3;
    c.t1 = Bandwidth::fixed(0.5);
  } else if (name == "office_caltech10") {
    c.alpha = 1; c.beta = 10; c.gamma = 1; c.arch = deep;
  } else if (name == "office31") {
    c.alpha = 1; c.beta = 0.1; c.gamma = 1; c.arch = deep;
  } else if (name == "office_home") {
    c.alpha = 1; c.beta = 1e3; c.gamma = 1; c.arch = deep;
  } else if (name == "digits") {
    c.alpha = 1; c.beta = 10; c.gamma = 1; c.arch = deep;
  } else if (name == "email") {
    c.alpha = 1; c.beta = 1e-2; c.gamma = 0.1; c.arch = shallow;
  } else if (name == "amazon") {
    c.alpha = 1; c.beta = 1; c.gamma = 10; c.arch = shallow;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  c.k = 3;
  return c;
}

std::vector<std::string> preset_names() {
  return {"synthetic", "office_caltech10", "office31", "office_home", "digits", "email", "amazon"};
}

TrainState init_models(const TrainConfig& config, std::size_t input_dim, std::size_t classes, Rng& rng) {
  if (input_dim == 0 || classes == 0) throw ContractError("init_models: dimensions must be positive");
  Models m;
  m.f_shape.widths = {input_dim};
  m.f_shape.widths.insert(m.f_shape.widths.end(), config.arch.f_hidden.begin(), config.arch.f_hidden.end());
  m.f_shape.relu_on_output = true;
  const std::size_t latent = m.f_shape.output_dim();
  m.h_shape.widths = {latent, classes};
  m.critic_shape.widths = {latent};
  m.critic_shape.widths.insert(m.critic_shape.widths.end(), config.arch.critic_hidden.begin(),
                               config.arch.critic_hidden.end());
  m.critic_shape.widths.push_back(1);
  m.f = init_mlp("f", m.f_shape, rng);
  m.h = init_mlp("h", m.h_shape, rng);
  m.critic = init_mlp("critic", m.critic_shape, rng);
  TrainState state{std::move(m), {}, {}, {}, 0, rng.split()};
  state.adam_f = make_adam_state(state.models.f);
  state.adam_h = make_adam_state(state.models.h);
  state.adam_critic = make_adam_state(state.models.critic);
  return state;
}

double LossBundle::recompose(double alpha) const noexcept {
  double t = 0.0;
  t += 1.0 * l_clf;
  t += alpha * dis_pn;
  t += w_weight * w_estimate;
  t += 1.0 * penalty;
  return t;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

Tensor column(const Tensor& x) { return Tensor::vector(x.data()); }

void require_finite(double v, const std::string& context) {
  if (!std::isfinite(v)) throw NumericError(context);
}

}  // namespace

double critic_ascent_step(ParamSet& critic, AdamState& adam, const MlpShape& shape,
                          const Tensor& z_s, const Tensor& z_t, double gp_coeff, double lr,
                          Rng& rng, double* penalty_out) {
  Tape tape;
  const auto cv = tape.bind(critic, true);
  const Var c_s = mlp_forward(tape, cv, tape.constant(z_s), shape);
  const Var c_t = mlp_forward(tape, cv, tape.constant(z_t), shape);
  const Var w = nodes::wasserstein_estimate(tape, c_s, c_t);
  const Tensor points = penalty_interpolates(z_s, z_t, rng);
  const Var gp = nodes::gradient_penalty(tape, cv, shape, points);
  const Var objective = tape.combine({{-1.0, w}, {gp_coeff, gp}});
  const double estimate = tape.scalar(w);
  if (penalty_out) *penalty_out = tape.scalar(gp);
  if (!std::isfinite(tape.scalar(objective))) {
    std::ostringstream os;
    os << "critic objective is non-finite (w=" << estimate << ", gp=" << tape.scalar(gp) << ")";
    throw NumericError(os.str());
  }
  tape.backward(objective);
  critic.zero_grad();
  tape.accumulate_into(cv, critic);
  adam_step(critic, adam, lr);
  return estimate;
}

namespace {

// Descent step of the domain classifier on its cross-entropy.
double domain_classifier_step(ParamSet& critic, AdamState& adam, const MlpShape& shape,
                              const Tensor& z_s, const Tensor& z_t, double lr) {
  Tape tape;
  const auto cv = tape.bind(critic, true);
  const Var d_s = tape.sigmoid(mlp_forward(tape, cv, tape.constant(z_s), shape));
  const Var d_t = tape.sigmoid(mlp_forward(tape, cv, tape.constant(z_t), shape));
  const Var bce = nodes::domain_bce(tape, d_s, d_t);
  require_finite(tape.scalar(bce), "domain classifier loss is non-finite");
  tape.backward(bce);
  critic.zero_grad();
  tape.accumulate_into(cv, critic);
  adam_step(critic, adam, lr);
  return tape.scalar(bce);
}

}  // namespace

double discrepancy_estimate(const Models& models, Variant variant, const Tensor& src_x,
                            const Tensor& tgt_x) {
  const Tensor c_s = mlp_forward(models.critic, embed(models, src_x), models.critic_shape);
  const Tensor c_t = mlp_forward(models.critic, embed(models, tgt_x), models.critic_shape);
  if (variant != Variant::rlpga_kl) return wasserstein_estimate(c_s.data(), c_t.data());
  auto sigmoid = [](Tensor t) {
    for (double& v : t.data()) v = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    return t;
  };
  return domain_kl_discrepancy(sigmoid(c_s).data(), sigmoid(c_t).data());
}

CriticOutcome critic_phase(TrainState& state, const TrainingView& batch, const TrainConfig& config) {
  Models& m = state.models;
  const Tensor z_s = embed(m, batch.src_x);
  const Tensor z_t = embed(m, batch.tgt_x);
  CriticOutcome out;
  for (int it = 0; it < config.n_critic; ++it) {
    try {
      if (config.variant == Variant::rlpga_kl) {
        domain_classifier_step(m.critic, state.adam_critic, m.critic_shape, z_s, z_t, config.lr_critic);
      } else {
        critic_ascent_step(m.critic, state.adam_critic, m.critic_shape, z_s, z_t, config.gp_coeff,
                           config.lr_critic, state.rng, &out.penalty);
      }
    } catch (const NumericError& e) {
      throw NumericError("step " + std::to_string(state.step + 1) + ", critic iteration " +
                         std::to_string(it) + ": " + e.what());
    }
  }
  const Tensor c_s = mlp_forward(m.critic, z_s, m.critic_shape);
  const Tensor c_t = mlp_forward(m.critic, z_t, m.critic_shape);
  if (config.variant == Variant::rlpga_kl) {
    Tape tape;
    out.estimate = tape.scalar(nodes::domain_bce(tape, tape.sigmoid(tape.constant(column(c_s))),
                                                 tape.sigmoid(tape.constant(column(c_t)))));
  } else {
    out.estimate = wasserstein_estimate(c_s.data(), c_t.data());
  }
  if (!m.critic.all_finite()) throw NumericError("critic parameters became non-finite");
  return out;
}

LossBundle main_phase(TrainState& state, const TrainingView& batch, GraphPair graphs,
                      const TrainConfig& config) {
  Models& m = state.models;
  Tape tape;
  const auto fv = tape.bind(m.f, true);
  const auto hv = tape.bind(m.h, true);
  const auto cv = tape.bind(m.critic, false);
  const Var z_s = mlp_forward(tape, fv, tape.constant(batch.src_x), m.f_shape);
  const Var z_t = mlp_forward(tape, fv, tape.constant(batch.tgt_x), m.f_shape);
  const Var probs = tape.softmax_rows(mlp_forward(tape, hv, z_s, m.h_shape));

  LossBundle out;
  const bool dmi = uses_dmi(config.variant) && state.step >= config.ce_warmup;
  const Var clf = dmi ? nodes::dmi_loss(tape, probs, batch.src_onehot, config.gamma)
                      : nodes::cross_entropy(tape, probs, batch.src_onehot);
  out.l_clf = tape.scalar(clf);
  out.l_r = entropy_regularizer(tape.value(probs));

  std::vector<std::pair<double, Var>> terms{{1.0, clf}};
  if (graphs.source && graphs.target) {
    const nodes::DisPnInput domains[] = {{z_s, &graphs.source->h_pn}, {z_t, &graphs.target->h_pn}};
    if (config.alpha != 0.0) {
      const Var dis = nodes::dispn_loss(tape, domains);
      out.dis_pn = tape.scalar(dis);
      terms.emplace_back(config.alpha, dis);
    } else {
      const DisPnDomain plain[] = {{&tape.value(z_s), &graphs.source->h_pn},
                                   {&tape.value(z_t), &graphs.target->h_pn}};
      out.dis_pn = dispn_loss(plain);
    }
  } else if (config.alpha != 0.0) {
    throw ContractError("main_phase: alpha > 0 requires graphs for both domains");
  }

  if (config.variant == Variant::rlpga_kl) {
    const Var d_s = tape.sigmoid(mlp_forward(tape, cv, z_s, m.critic_shape));
    const Var d_t = tape.sigmoid(mlp_forward(tape, cv, z_t, m.critic_shape));
    const Var bce = nodes::domain_bce(tape, d_s, d_t);
    out.w_estimate = tape.scalar(bce);
    out.w_weight = -config.beta;  // gradient reversal: f maximizes the classifier's loss
    terms.emplace_back(out.w_weight, bce);
  } else {
    const Var c_s = mlp_forward(tape, cv, z_s, m.critic_shape);
    const Var c_t = mlp_forward(tape, cv, z_t, m.critic_shape);
    const Var w = nodes::wasserstein_estimate(tape, c_s, c_t);
    out.w_estimate = tape.scalar(w);
    out.w_weight = config.beta;
    terms.emplace_back(out.w_weight, w);
  }

  if (config.weight_decay != 0.0) {
    const Var sq = tape.sum_of_squares(fv);
    out.penalty = config.weight_decay * tape.scalar(sq);
    terms.emplace_back(config.weight_decay, sq);
  }
  const Var total = tape.combine(terms);
  out.total = tape.scalar(total);

  if (!std::isfinite(out.total)) {
    std::ostringstream os;
    os << "step " << state.step + 1 << ": objective is non-finite (l_clf=" << out.l_clf
       << ", l_r=" << out.l_r << ", dis_pn=" << out.dis_pn << ", w=" << out.w_estimate
       << ", penalty=" << out.penalty << ")";
    throw NumericError(os.str());
  }
  tape.backward(total);
  m.f.zero_grad();
  m.h.zero_grad();
  tape.accumulate_into(fv, m.f);
  tape.accumulate_into(hv, m.h);
  try {
    adam_step(m.h, state.adam_h, config.lr_h);
    adam_step(m.f, state.adam_f, config.lr_f);
  } catch (const NumericError& e) {
    throw NumericError("step " + std::to_string(state.step + 1) + ": " + e.what());
  }
  ++state.step;
  return out;
}

Tensor embed(const Models& models, const Tensor& x) { return mlp_forward(models.f, x, models.f_shape); }

std::vector<int> predict(const Models& models, const Tensor& x) {
  const Tensor logits = mlp_forward(models.h, embed(models, x), models.h_shape);
  std::vector<int> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.cols(); ++c)
      if (logits(i, c) > logits(i, best)) best = c;
    out[i] = static_cast<int>(best);
  }
  return out;
}

double evaluate(const Models& models, const Tensor& x, std::span<const int> labels) {
  if (labels.size() != x.rows()) throw ContractError("evaluate: label count does not match rows");
  if (labels.empty()) return 0.0;
  const auto pred = predict(models, x);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += pred[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double evaluate(const TrainState& state, const Tensor& x, std::span<const int> labels) {
  return evaluate(state.models, x, labels);
}

TrainResult train(const TrainConfig& config, const DomainDataset& src, const DomainDataset& tgt,
                  const DomainDataset* tgt_eval, const TrainHooks& hooks) {
  if (!src.labels) throw ConfigError("source dataset needs labels");
  if (src.dim() != tgt.dim()) throw ConfigError("source and target feature widths differ");
  if (tgt_eval && (!tgt_eval->labels || tgt_eval->dim() != src.dim())) {
    throw ConfigError("target evaluation set needs labels and matching feature width");
  }
  std::size_t classes = src.classes();
  if (tgt_eval) classes = std::max(classes, tgt_eval->classes());
  config.validate(classes);
  if (config.half_batch() > src.size() || config.half_batch() > tgt.size()) {
    throw ConfigError("per-domain batch exceeds dataset size");
  }

  Rng init_rng(config.seed);
  TrainResult result{init_models(config, src.dim(), classes, init_rng), {}};
  TrainState& state = result.state;
  const Metric metric = config.metric.value_or(default_metric(src.dim()));

  double acc_graph = 0.0, acc_critic = 0.0, acc_main = 0.0;
  long since_record = 0;
  LossBundle last;
  for (long step = 1; step <= config.steps; ++step) {
    const DomainBatch batch =
        sample_batch(state.rng, src, tgt, config.half_batch(), config.stratified, classes);
    const TrainingView view = batch.training_view();

    auto t0 = Clock::now();
    const SignedWeightGraph g_s = build_signed_graph(batch.src_x, config.k, config.t1, metric);
    const SignedWeightGraph g_t = build_signed_graph(batch.tgt_x, config.k, config.t1, metric);
    acc_graph += ms_since(t0);

    t0 = Clock::now();
    critic_phase(state, view, config);
    acc_critic += ms_since(t0);

    t0 = Clock::now();
    last = main_phase(state, view, {&g_s, &g_t}, config);
    acc_main += ms_since(t0);
    if (!state.models.f.all_finite() || !state.models.h.all_finite()) {
      throw NumericError("step " + std::to_string(step) + ": parameters became non-finite");
    }
    ++since_record;

    if (step % config.eval_interval == 0 || step == config.steps) {
      IterationRecord rec;
      rec.step = step;
      rec.w_estimate = discrepancy_estimate(state.models, config.variant, src.features, tgt.features);
      rec.l_clf = last.l_clf;
      rec.l_r = last.l_r;
      rec.dis_pn = last.dis_pn;
      rec.total = last.total;
      rec.src_acc_noisy = evaluate(state, src.features, *src.labels);
      if (tgt_eval) rec.tgt_acc = evaluate(state, tgt_eval->features, *tgt_eval->labels);
      const double n = static_cast<double>(since_record);
      rec.ms_critic = acc_critic / n;
      rec.ms_main = acc_main / n;
      rec.ms_graph = acc_graph / n;
      acc_graph = acc_critic = acc_main = 0.0;
      since_record = 0;
      if (hooks.on_graphs) hooks.on_graphs(step, g_s, g_t);
      if (hooks.on_record) hooks.on_record(rec);
      result.records.push_back(rec);
    }
  }
  return result;
}

}  // namespace rlpga
