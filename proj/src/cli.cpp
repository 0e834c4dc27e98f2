// SPDX-License-Identifier: Apache-2.0
#include "rlpga/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "rlpga/errors.hpp"
#include "rlpga/format.hpp"
#include "rlpga/manifest.hpp"
#include "rlpga/metrics_io.hpp"
#include "rlpga/report.hpp"
#include "rlpga/runner.hpp"
#include "rlpga/sweep.hpp"

namespace fs = std::filesystem;

namespace rlpga {

namespace {

// Raw flag text; numbers are parsed by parse_double/parse_long so that the
// decimal separator never depends on the locale.
struct RunFlags {
  std::string preset = "synthetic";
  std::string dataset = "synthetic";
  std::string src_csv, tgt_csv, tgt_eval_csv;
  std::string pair_map;
  std::string variant;
  std::string alpha, beta, gamma, k, t1, wd, lr, lr_critic, n_critic, gp, steps, batch, seed,
      eval_interval, ce_warmup, metric;
  std::string out;
  bool dump_graphs = false;
  bool stratified = false;
  bool allow_small_batch = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--preset", f.preset, "hyperparameter preset")->capture_default_str();
  cmd->add_option("--dataset", f.dataset, "synthetic | csv")->capture_default_str();
  cmd->add_option("--src-csv", f.src_csv, "labelled source features (label first, 1-based)");
  cmd->add_option("--tgt-csv", f.tgt_csv, "unlabelled target features");
  cmd->add_option("--tgt-eval-csv", f.tgt_eval_csv, "labelled target rows for evaluation");
  cmd->add_option("--pair-map", f.pair_map, "pairwise flip map, e.g. 1:2,3:4");
  cmd->add_option("--variant", f.variant, "rlpga | rga | wdgrl_ce | rlpga_kl");
  cmd->add_option("--alpha", f.alpha, "weight of the local preserving loss");
  cmd->add_option("--beta", f.beta, "weight of the domain discrepancy");
  cmd->add_option("--gamma", f.gamma, "weight of the entropy regularizer");
  cmd->add_option("--k", f.k, "neighbours in the adjacency graph");
  cmd->add_option("--t1", f.t1, "heat kernel bandwidth: median | CONST");
  cmd->add_option("--wd", f.wd, "weight decay on the feature extractor");
  cmd->add_option("--lr", f.lr, "learning rate of f and h");
  cmd->add_option("--lr-critic", f.lr_critic, "learning rate of the critic");
  cmd->add_option("--n-critic", f.n_critic, "critic updates per step");
  cmd->add_option("--gp", f.gp, "gradient penalty coefficient");
  cmd->add_option("--steps", f.steps, "training steps");
  cmd->add_option("--batch", f.batch, "batch size over both domains");
  cmd->add_option("--eval-interval", f.eval_interval, "steps between metric records");
  cmd->add_option("--ce-warmup", f.ce_warmup, "cross-entropy steps before DMI");
  cmd->add_option("--metric", f.metric, "graph distance: euclidean | cosine");
  cmd->add_flag("--dump-graphs", f.dump_graphs, "write batch graphs at record steps");
  cmd->add_flag("--stratified", f.stratified, "stratify source batches by noisy class");
  cmd->add_flag("--allow-small-batch", f.allow_small_batch, "permit batches smaller than C");
}

template <typename T>
T as_count(const std::string& s, const char* what) {
  const long v = parse_long(s, what);
  if (v < 0) throw ConfigError(std::string(what) + " must be non-negative");
  return static_cast<T>(v);
}

// Preset first, then every flag that was given.
RunManifest build_manifest(const RunFlags& f) {
  RunManifest m;
  m.preset = f.preset;
  m.config = preset_config(f.preset);
  TrainConfig& c = m.config;
  if (!f.variant.empty()) c.variant = parse_variant(f.variant);
  const bool forced_zero = c.variant == Variant::rga || c.variant == Variant::wdgrl_ce;
  if (forced_zero) c.alpha = 0.0;
  if (!f.alpha.empty()) {
    c.alpha = parse_double(f.alpha, "--alpha");
    if (forced_zero && c.alpha != 0.0) {
      throw ConfigError("variant " + to_string(c.variant) + " forces alpha = 0; --alpha " + f.alpha +
                        " is not allowed");
    }
  }
  if (!f.beta.empty()) c.beta = parse_double(f.beta, "--beta");
  if (!f.gamma.empty()) c.gamma = parse_double(f.gamma, "--gamma");
  if (!f.k.empty()) c.k = as_count<std::size_t>(f.k, "--k");
  if (!f.t1.empty()) c.t1 = parse_bandwidth(f.t1);
  if (!f.wd.empty()) c.weight_decay = parse_double(f.wd, "--wd");
  if (!f.lr.empty()) c.lr_f = c.lr_h = parse_double(f.lr, "--lr");
  if (!f.lr_critic.empty()) c.lr_critic = parse_double(f.lr_critic, "--lr-critic");
  if (!f.n_critic.empty()) c.n_critic = as_count<int>(f.n_critic, "--n-critic");
  if (!f.gp.empty()) c.gp_coeff = parse_double(f.gp, "--gp");
  if (!f.steps.empty()) c.steps = as_count<long>(f.steps, "--steps");
  if (!f.batch.empty()) c.batch = as_count<std::size_t>(f.batch, "--batch");
  if (!f.seed.empty()) c.seed = as_count<std::uint64_t>(f.seed, "--seed");
  if (!f.eval_interval.empty()) c.eval_interval = as_count<long>(f.eval_interval, "--eval-interval");
  if (!f.ce_warmup.empty()) c.ce_warmup = as_count<long>(f.ce_warmup, "--ce-warmup");
  if (!f.metric.empty()) c.metric = parse_metric(f.metric);
  if (f.stratified) c.stratified = true;
  if (f.allow_small_batch) c.allow_small_batch = true;

  m.dataset.kind = f.dataset;
  if (f.dataset != "synthetic" && f.dataset != "csv") {
    throw ConfigError("--dataset must be synthetic or csv, got '" + f.dataset + "'");
  }
  m.dataset.src_csv = f.src_csv;
  m.dataset.tgt_csv = f.tgt_csv;
  m.dataset.tgt_eval_csv = f.tgt_eval_csv;
  if (f.dataset == "csv" && (f.src_csv.empty() || f.tgt_csv.empty())) {
    throw ConfigError("--dataset csv needs --src-csv and --tgt-csv");
  }
  if (!f.pair_map.empty()) m.noise.pair_map = parse_pair_map(f.pair_map);
  m.noise.seed = c.seed;
  m.out_dir = f.out;
  m.dump_graphs = f.dump_graphs;
  return m;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& s, Parse parse) {
  std::vector<T> out;
  for (const auto& item : split(s, ',')) {
    const auto t = trim(item);
    if (!t.empty()) out.push_back(parse(std::string(t)));
  }
  if (out.empty()) throw ConfigError("empty list '" + s + "'");
  return out;
}

std::string series_label(const std::string& path) {
  const fs::path p(path);
  if (p.filename() == "metrics.csv" && p.has_parent_path()) {
    const auto parent = p.parent_path().filename().string();
    if (!parent.empty() && parent != ".") return parent;
  }
  return p.filename().string();
}

int cmd_run(const RunFlags& f, const std::string& noise, const std::string& manifest_path,
            std::ostream& out) {
  RunManifest m;
  if (!manifest_path.empty()) {
    if (!f.variant.empty()) throw ConfigError("--manifest replays a run; combine it only with --out");
    m = read_manifest(manifest_path);
    if (!f.out.empty()) m.out_dir = f.out;
  } else {
    m = build_manifest(f);
    const NoiseSpec parsed = parse_noise(noise);
    m.noise.kind = parsed.kind;
    m.noise.ratio = parsed.ratio;
  }
  m.tool_version = kToolVersion;
  m.started_at = utc_timestamp();
  const RunSummary s = execute_run(m);
  out << "steps " << s.last.step << "  src_acc_noisy " << format_double(s.last.src_acc_noisy)
      << "  tgt_acc " << (s.last.tgt_acc ? format_double(*s.last.tgt_acc) : "n/a") << '\n';
  out << "wrote " << m.out_dir << '\n';
  return kExitOk;
}

int cmd_sweep(const RunFlags& f, const std::string& kind, const std::string& ratios,
              const std::string& variants, const std::string& seeds, std::ostream& out,
              std::ostream& err) {
  SweepSpec spec;
  spec.kind = parse_noise_kind(kind);
  if (spec.kind == NoiseKind::none) throw ConfigError("--noise-kind must name a noise model");
  if (!ratios.empty()) {
    spec.ratios = parse_list<double>(ratios, [](const std::string& s) {
      const double r = parse_double(s, "--ratios");
      if (r < 0.0 || r >= 1.0) throw ConfigError("noise ratio " + s + " outside [0, 1)");
      return r;
    });
  }
  if (!variants.empty()) spec.variants = parse_list<Variant>(variants, parse_variant);
  if (!seeds.empty()) {
    spec.seeds = parse_list<std::uint64_t>(seeds, [](const std::string& s) {
      return as_count<std::uint64_t>(s, "--seeds");
    });
  }
  if (f.out.empty()) throw ConfigError("an output directory is required (--out)");
  RunFlags base_flags = f;
  base_flags.variant.clear();  // set per cell
  if (!f.variant.empty()) throw ConfigError("sweep takes --variants, not --variant");
  RunManifest base = build_manifest(base_flags);
  base.started_at = utc_timestamp();
  const auto results = run_sweep(base, spec, f.out, sweep_threads());
  std::size_t failed = 0;
  for (const auto& r : results) {
    if (!r.error.empty()) {
      ++failed;
      err << "cell " << r.cell.dir << " failed: " << r.error << '\n';
    }
  }
  out << results.size() - failed << " of " << results.size() << " cells completed; wrote "
      << (fs::path(f.out) / "final_acc.csv").string() << '\n';
  return failed == 0 ? kExitOk : kExitRuntime;
}

int cmd_plot(const std::vector<std::string>& files, const std::string& out_path, std::ostream& out) {
  std::vector<PlotSeries> series;
  for (const auto& file : files) series.push_back({series_label(file), read_metrics(file)});
  const std::string svg = render_svg(series);
  std::ofstream o(out_path, std::ios::binary);
  if (!o) throw DataError("cannot write " + out_path);
  o << svg;
  out << "wrote " << out_path << '\n';
  return kExitOk;
}

int cmd_export(const std::string& run_dir, std::string manifest_path, std::string params_path,
               const std::string& out_path, std::ostream& out) {
  if (manifest_path.empty()) manifest_path = (fs::path(run_dir) / "manifest.json").string();
  if (params_path.empty()) params_path = (fs::path(run_dir) / "params.json").string();
  const RunManifest m = read_manifest(manifest_path);
  const Models models = load_params(params_path);
  const RunData data = load_run_data(m);
  std::ofstream o(out_path, std::ios::binary);
  if (!o) throw DataError("cannot write " + out_path);
  write_embeddings_csv(o, models, data);
  out << "wrote " << data.src.size() + data.tgt.size() << " rows to " << out_path << '\n';
  return kExitOk;
}

int cmd_timing(const std::vector<std::string>& files, std::ostream& out) {
  std::vector<TimingRow> rows;
  for (const auto& file : files) rows.push_back(timing_row(series_label(file), read_metrics(file)));
  out << format_timing_table(rows);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust local-preserving adversarial domain adaptation", "rlpga"};
  app.require_subcommand(1);

  RunFlags run_flags;
  std::string manifest_path;
  CLI::App* run = app.add_subcommand("run", "train one model");
  add_run_flags(run, run_flags);
  std::string noise = "none";
  run->add_option("--noise", noise, "none | case1:R | pairwise:R | uniform:R | random:R")
      ->capture_default_str();
  run->add_option("--seed", run_flags.seed, "seed for data, noise, init and batches");
  run->add_option("--out", run_flags.out, "output directory");
  run->add_option("--manifest", manifest_path, "replay a manifest.json");

  RunFlags sweep_flags;
  std::string kind = "case1", ratios, variants, seeds;
  CLI::App* sweep = app.add_subcommand("sweep", "grid over noise ratios, variants and seeds");
  add_run_flags(sweep, sweep_flags);
  sweep->add_option("--noise-kind", kind, "noise model applied at each ratio")->capture_default_str();
  sweep->add_option("--ratios", ratios, "comma list, default 0,0.2,0.4,0.6");
  sweep->add_option("--variants", variants, "comma list, default rlpga,rga,wdgrl_ce");
  sweep->add_option("--seeds", seeds, "comma list, default 1,2,3");
  sweep->add_option("--out", sweep_flags.out, "sweep root directory")->required();

  std::vector<std::string> plot_files;
  std::string plot_out;
  CLI::App* plot = app.add_subcommand("plot", "render metrics files as SVG");
  plot->add_option("files", plot_files, "metrics.csv files")->required();
  plot->add_option("--out", plot_out, "output .svg")->required();

  std::string export_run, export_manifest, export_params, export_out;
  CLI::App* exp = app.add_subcommand("export", "write latent features of a trained run");
  exp->add_option("--run", export_run, "run directory (manifest.json, params.json)");
  exp->add_option("--manifest", export_manifest, "manifest path override");
  exp->add_option("--params", export_params, "params path override");
  exp->add_option("--out", export_out, "output .csv")->required();

  std::vector<std::string> timing_files;
  CLI::App* timing = app.add_subcommand("timing", "summarize per-phase wall time");
  timing->add_option("files", timing_files, "metrics.csv files")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_flags, noise, manifest_path, out);
    if (*sweep) return cmd_sweep(sweep_flags, kind, ratios, variants, seeds, out, err);
    if (*plot) return cmd_plot(plot_files, plot_out, out);
    if (*exp) {
      if (export_run.empty() && (export_manifest.empty() || export_params.empty())) {
        throw ConfigError("export needs --run or both --manifest and --params");
      }
      return cmd_export(export_run, export_manifest, export_params, export_out, out);
    }
    if (*timing) return cmd_timing(timing_files, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const RunFailure& e) {
    err << "error: " << e.what() << "\ndiagnostics: " << e.diagnostics_path() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace rlpga
