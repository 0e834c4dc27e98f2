// SPDX-License-Identifier: Apache-2.0
#include "rlpga/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rlpga/errors.hpp"
#include "rlpga/format.hpp"
#include "rlpga/metrics_io.hpp"
#include "rlpga/noise.hpp"

namespace fs = std::filesystem;

namespace rlpga {

using nlohmann::json;

namespace {

constexpr std::uint64_t kNoiseSalt = 0x6e6f6973652d7631ULL;

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

void write_summary(std::ostream& out, const RunSummary& s) {
  out << "final_step=" << s.last.step << '\n';
  out << "src_acc_noisy=" << format_double(s.last.src_acc_noisy) << '\n';
  out << "src_acc_given=" << format_double(s.src_acc_given) << '\n';
  out << "tgt_acc=" << (s.last.tgt_acc ? format_double(*s.last.tgt_acc) : "") << '\n';
  out << "w_estimate=" << format_double(s.last.w_estimate) << '\n';
}

json shape_to_json(const MlpShape& s) {
  return {{"widths", s.widths}, {"relu_on_output", s.relu_on_output}};
}

MlpShape shape_from_json(const json& j) {
  MlpShape s;
  s.widths = j.at("widths").get<std::vector<std::size_t>>();
  s.relu_on_output = j.at("relu_on_output").get<bool>();
  if (s.widths.size() < 2) throw DataError("params: network needs at least two widths");
  return s;
}

json params_to_json(const ParamSet& ps) {
  json arr = json::array();
  for (const Param& p : ps) {
    arr.push_back({{"name", p.name},
                   {"rows", p.value.rows()},
                   {"cols", p.value.cols()},
                   {"rank", p.value.rank()},
                   {"values", p.value.data()}});
  }
  return arr;
}

ParamSet params_from_json(const json& arr, const std::string& prefix, const MlpShape& shape) {
  ParamSet ps;
  for (const json& p : arr) {
    const auto rows = p.at("rows").get<std::size_t>();
    const auto cols = p.at("cols").get<std::size_t>();
    auto values = p.at("values").get<std::vector<double>>();
    if (values.size() != rows * cols) throw DataError("params: value count does not match shape");
    Tensor t = p.at("rank").get<int>() == 1 ? Tensor(cols) : Tensor(rows, cols);
    std::copy(values.begin(), values.end(), t.data().begin());
    ps.add(p.at("name").get<std::string>(), std::move(t));
  }
  // Check every expected layer is present with the right shape.
  for (std::size_t l = 0; l < shape.layers(); ++l) {
    const Param& w = ps.at(prefix + ".W" + std::to_string(l));
    const Param& b = ps.at(prefix + ".b" + std::to_string(l));
    if (w.value.rows() != shape.widths[l] || w.value.cols() != shape.widths[l + 1] ||
        b.value.size() != shape.widths[l + 1]) {
      throw DataError("params: layer " + prefix + std::to_string(l) + " has the wrong shape");
    }
  }
  return ps;
}

}  // namespace

RunData load_run_data(const RunManifest& m) {
  RunData d;
  if (m.dataset.kind == "synthetic") {
    auto [src, tgt] = gen_synthetic(m.config.seed);
    DomainDataset eval = tgt;
    eval.name = "synthetic-target-eval";
    tgt.labels.reset();
    d.src = std::move(src);
    d.tgt = std::move(tgt);
    d.tgt_eval = std::move(eval);
  } else if (m.dataset.kind == "csv") {
    if (m.dataset.src_csv.empty() || m.dataset.tgt_csv.empty()) {
      throw ConfigError("--dataset csv needs --src-csv and --tgt-csv");
    }
    d.src = load_feature_csv(m.dataset.src_csv, true, Domain::source);
    d.tgt = load_feature_csv(m.dataset.tgt_csv, false, Domain::target);
    if (!m.dataset.tgt_eval_csv.empty()) {
      d.tgt_eval = load_feature_csv(m.dataset.tgt_eval_csv, true, Domain::target);
    }
  } else {
    throw ConfigError("unknown dataset kind '" + m.dataset.kind + "'");
  }
  if (d.src.dim() != d.tgt.dim()) {
    throw DataError("source has " + std::to_string(d.src.dim()) + " features, target has " +
                    std::to_string(d.tgt.dim()));
  }
  if (d.tgt_eval && d.tgt_eval->dim() != d.src.dim()) {
    throw DataError("target evaluation file has " + std::to_string(d.tgt_eval->dim()) +
                    " features, source has " + std::to_string(d.src.dim()));
  }
  d.classes = d.src.classes();
  if (d.tgt_eval) d.classes = std::max(d.classes, d.tgt_eval->classes());
  d.src_given_labels = *d.src.labels;
  if (m.noise.kind != NoiseKind::none) {
    const TransitionMatrix t = build_transition(m.noise, d.classes);
    Rng rng(m.noise.seed ^ kNoiseSalt);
    d.src.labels = corrupt_labels(d.src_given_labels, t, rng);
  }
  return d;
}

RunSummary execute_run(const RunManifest& m) {
  if (m.out_dir.empty()) throw ConfigError("an output directory is required (--out)");
  const RunData data = load_run_data(m);
  m.config.validate(data.classes);

  const fs::path out_dir(m.out_dir);
  fs::create_directories(out_dir);
  write_manifest((out_dir / "manifest.json").string(), m);
  if (m.dump_graphs) fs::create_directories(out_dir / "graphs");

  std::ofstream metrics = open_out(out_dir / "metrics.csv");
  write_metrics_header(metrics);
  metrics.flush();

  TrainHooks hooks;
  hooks.on_record = [&](const IterationRecord& r) {
    write_metrics_row(metrics, r);
    metrics.flush();
  };
  if (m.dump_graphs) {
    hooks.on_graphs = [&](long step, const SignedWeightGraph& s, const SignedWeightGraph& t) {
      const std::string stem = "step_" + std::to_string(step);
      auto os = open_out(out_dir / "graphs" / (stem + "_source.csv"));
      write_graph_csv(os, s);
      auto ot = open_out(out_dir / "graphs" / (stem + "_target.csv"));
      write_graph_csv(ot, t);
    };
  }

  TrainResult result;
  try {
    result = train(m.config, data.src, data.tgt, data.tgt_eval ? &*data.tgt_eval : nullptr, hooks);
  } catch (const std::exception& e) {
    metrics.flush();
    const fs::path diag = out_dir / "diagnostics.txt";
    std::ofstream d(diag, std::ios::binary);
    d << "error: " << e.what() << '\n';
    d << "variant: " << to_string(m.config.variant) << '\n';
    d << "seed: " << m.config.seed << '\n';
    d << "noise: " << to_string(m.noise) << '\n';
    throw RunFailure(e.what(), diag.string());
  }

  RunSummary summary;
  summary.records = result.records.size();
  if (!result.records.empty()) summary.last = result.records.back();
  summary.src_acc_given = evaluate(result.state, data.src.features, data.src_given_labels);
  {
    auto out = open_out(out_dir / "summary.txt");
    write_summary(out, summary);
  }
  {
    auto out = open_out(out_dir / "params.json");
    write_params_json(out, result.state.models);
  }
  return summary;
}

void write_params_json(std::ostream& out, const Models& models) {
  json j;
  j["f_shape"] = shape_to_json(models.f_shape);
  j["h_shape"] = shape_to_json(models.h_shape);
  j["critic_shape"] = shape_to_json(models.critic_shape);
  j["f"] = params_to_json(models.f);
  j["h"] = params_to_json(models.h);
  j["critic"] = params_to_json(models.critic);
  out << j.dump() << '\n';
}

Models read_params_json(std::istream& in) {
  try {
    const json j = json::parse(in);
    Models m;
    m.f_shape = shape_from_json(j.at("f_shape"));
    m.h_shape = shape_from_json(j.at("h_shape"));
    m.critic_shape = shape_from_json(j.at("critic_shape"));
    m.f = params_from_json(j.at("f"), "f", m.f_shape);
    m.h = params_from_json(j.at("h"), "h", m.h_shape);
    m.critic = params_from_json(j.at("critic"), "critic", m.critic_shape);
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("params: ") + e.what());
  } catch (const ContractError& e) {
    throw DataError(std::string("params: ") + e.what());
  }
}

Models load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return read_params_json(in);
}

void write_embeddings_csv(std::ostream& out, const Models& models, const RunData& data) {
  if (models.f_shape.input_dim() != data.src.dim()) {
    throw DataError("parameters expect " + std::to_string(models.f_shape.input_dim()) +
                    " input features, data has " + std::to_string(data.src.dim()));
  }
  const std::size_t p = models.f_shape.output_dim();
  out << "domain,label";
  for (std::size_t c = 1; c <= p; ++c) out << ",z_" << c;
  out << '\n';
  auto emit = [&](const Tensor& x, const std::string& domain, const std::vector<int>* labels) {
    const Tensor z = embed(models, x);
    for (std::size_t i = 0; i < z.rows(); ++i) {
      out << domain << ',' << (labels ? (*labels)[i] + 1 : -1);
      for (double v : z.row(i)) out << ',' << format_double(v);
      out << '\n';
    }
  };
  emit(data.src.features, "source", &data.src_given_labels);
  // Target rows are labelled only when the evaluation set is the target set itself.
  const bool same_rows = data.tgt_eval && data.tgt_eval->features == data.tgt.features;
  emit(data.tgt.features, "target", same_rows ? &*data.tgt_eval->labels : nullptr);
}

}  // namespace rlpga
