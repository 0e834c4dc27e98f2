// SPDX-License-Identifier: Apache-2.0
// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Usage: rlpga_acceptance [fixture_dir] [criteria...]
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "rlpga/cli.hpp"
#include "rlpga/format.hpp"
#include "rlpga/grad_check.hpp"
#include "rlpga/graph.hpp"
#include "rlpga/linalg.hpp"
#include "rlpga/losses.hpp"
#include "rlpga/noise.hpp"
#include "rlpga/runner.hpp"
#include "rlpga/sweep.hpp"
#include "rlpga/trainer.hpp"

using namespace rlpga;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Drops the separator after the last item of a "a; b; " list.
std::string list_text(const std::ostringstream& os) {
  std::string s = os.str();
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "; ") == 0) s.resize(s.size() - 2);
  return s;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// ---- synthetic training runs (criteria 1-4) --------------------------------

struct RunKey {
  double ratio;
  Variant variant;
  std::uint64_t seed;
  auto operator<=>(const RunKey&) const = default;
};

struct RunOutcome {
  double final_acc = 0.0;
  std::vector<long> steps;
  std::vector<double> acc;
  std::vector<double> w;
  double seconds = 0.0;
  std::string error;
};

RunOutcome run_synthetic(const RunKey& key) {
  RunManifest base;
  base.config = preset_config("synthetic");
  SweepSpec spec;
  SweepCell cell{key.ratio, key.variant, key.seed, ""};
  const RunManifest m = cell_manifest(base, spec, cell, "");
  RunOutcome out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const RunData data = load_run_data(m);
    const TrainResult r = train(m.config, data.src, data.tgt, data.tgt_eval ? &*data.tgt_eval : nullptr);
    for (const auto& rec : r.records) {
      out.steps.push_back(rec.step);
      out.acc.push_back(rec.tgt_acc.value_or(0.0));
      out.w.push_back(rec.w_estimate);
    }
    out.final_acc = out.acc.empty() ? 0.0 : out.acc.back();
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::map<RunKey, RunOutcome> run_all(const std::set<RunKey>& keys) {
  std::vector<RunKey> list(keys.begin(), keys.end());
  std::vector<RunOutcome> results(list.size());
  std::atomic<std::size_t> next{0};
  std::mutex log;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < list.size();) {
      results[i] = run_synthetic(list[i]);
      std::lock_guard lock(log);
      std::fprintf(stderr, "  run r=%s %s seed %llu: tgt_acc %s in %.1fs%s%s\n", fmt(list[i].ratio).c_str(),
                   to_string(list[i].variant).c_str(), static_cast<unsigned long long>(list[i].seed),
                   fmt(results[i].final_acc).c_str(), results[i].seconds, results[i].error.empty() ? "" : ": ",
                   results[i].error.c_str());
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(sweep_threads(), static_cast<unsigned>(list.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  std::map<RunKey, RunOutcome> out;
  for (std::size_t i = 0; i < list.size(); ++i) out[list[i]] = std::move(results[i]);
  return out;
}

const std::vector<double> kRatios1{0.0, 0.2, 0.4, 0.6};
const std::vector<double> kRatios2{0.4, 0.6};
const std::vector<std::uint64_t> kSeeds3{1, 2, 3};
const std::vector<std::uint64_t> kSeeds5{1, 2, 3, 4, 5};
const std::vector<Variant> kAblation{Variant::rlpga, Variant::rga, Variant::wdgrl_ce};

std::set<RunKey> needed_runs(const std::set<int>& criteria) {
  std::set<RunKey> keys;
  if (criteria.count(1) || criteria.count(4))
    for (double r : kRatios1)
      for (auto s : kSeeds3) keys.insert({r, Variant::rlpga, s});
  if (criteria.count(2))
    for (double r : kRatios2)
      for (Variant v : kAblation)
        for (auto s : kSeeds5) keys.insert({r, v, s});
  if (criteria.count(3))
    for (Variant v : {Variant::rlpga, Variant::wdgrl_ce})
      for (auto s : kSeeds5) keys.insert({0.4, v, s});
  return keys;
}

Verdict criterion1(const std::map<RunKey, RunOutcome>& runs) {
  bool pass = true;
  double slowest = 0.0;
  std::ostringstream d;
  for (double r : kRatios1) {
    int ok = 0;
    for (auto s : kSeeds3) {
      const RunOutcome& o = runs.at({r, Variant::rlpga, s});
      ok += o.error.empty() && o.final_acc >= 0.98 && o.steps.back() <= 5000;
      slowest = std::max(slowest, o.seconds);
    }
    d << "r=" << fmt(r) << ": " << ok << "/3 >= 0.98; ";
    pass = pass && ok >= 2;
  }
  d << "slowest run " << fmt(slowest, 3) << "s";
  pass = pass && slowest <= 300.0;
  return {pass, d.str()};
}

Verdict criterion2(const std::map<RunKey, RunOutcome>& runs) {
  bool pass = true;
  std::ostringstream d;
  for (double r : kRatios2) {
    std::map<Variant, double> m;
    for (Variant v : kAblation) {
      std::vector<double> accs;
      for (auto s : kSeeds5) accs.push_back(runs.at({r, v, s}).final_acc);
      m[v] = mean(accs);
    }
    const bool order = m[Variant::rlpga] >= m[Variant::rga] && m[Variant::rga] >= m[Variant::wdgrl_ce];
    pass = pass && order;
    d << "r=" << fmt(r) << " rlpga " << fmt(m[Variant::rlpga]) << ", rga " << fmt(m[Variant::rga])
      << ", wdgrl_ce " << fmt(m[Variant::wdgrl_ce]);
    if (r == 0.6) {
      const double gap = m[Variant::rlpga] - m[Variant::wdgrl_ce];
      pass = pass && gap >= 0.03;
      d << ", gap " << fmt(gap);
    }
    d << "; ";
  }
  return {pass, list_text(d)};
}

double tail_stddev(const RunOutcome& o) {
  const long last = o.steps.back();
  std::vector<double> tail;
  for (std::size_t i = 0; i < o.steps.size(); ++i)
    if (o.steps[i] > last - 1000) tail.push_back(o.acc[i]);
  return oracle::stddev(tail);
}

Verdict criterion3(const std::map<RunKey, RunOutcome>& runs) {
  int wins = 0;
  std::ostringstream d;
  for (auto s : kSeeds5) {
    const double a = tail_stddev(runs.at({0.4, Variant::rlpga, s}));
    const double b = tail_stddev(runs.at({0.4, Variant::wdgrl_ce, s}));
    wins += a < b;
    d << "s" << s << " " << fmt(a, 3) << " vs " << fmt(b, 3) << "; ";
  }
  d << wins << "/5 seeds steadier";
  return {wins >= 4, d.str()};
}

Verdict criterion4(const std::map<RunKey, RunOutcome>& runs) {
  double worst = 0.0;
  int ok = 0, total = 0;
  for (double r : kRatios1)
    for (auto s : kSeeds3) {
      const RunOutcome& o = runs.at({r, Variant::rlpga, s});
      std::vector<double> x, y;
      for (std::size_t i = 0; i < o.steps.size(); ++i)
        if (o.steps[i] >= 3000 && o.steps[i] <= 5000) {
          x.push_back(static_cast<double>(o.steps[i]));
          y.push_back(o.w[i]);
        }
      const double slope = x.size() >= 2 ? std::abs(oracle::ls_slope(x, y)) : INFINITY;
      worst = std::max(worst, slope);
      ok += slope < 1e-5;
      ++total;
    }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " runs under 1e-5; largest |slope| " +
                           fmt(worst, 3) + " per step"};
}

// ---- exact properties (criteria 5, 6) --------------------------------------

double det_of(const Tensor& t) {
  const Slogdet s = slogdet(t);
  return s.sign == 0 ? 0.0 : s.sign * std::exp(s.logabs);
}

Verdict criterion5() {
  Rng rng(501);
  int failures = 0;
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t c = 2 + t % 3;
    const Tensor t1 = oracle::random_joint(rng, c);
    const Tensor tn = oracle::random_transition(rng, c);
    const double err = std::abs(std::abs(det_of(matmul(t1, tn))) - std::abs(det_of(t1)) * std::abs(det_of(tn)));
    worst = std::max(worst, err);
    failures += !(err <= 1e-12);
  }
  return {failures == 0, std::to_string(failures) + " failures in 1000; max error " + fmt(worst, 3)};
}

// Exact joint of a classifier with a common label marginal: rows of a random
// conditional Pr(h | y) scaled by a fixed Pr(y).
Tensor joint_with_marginal(Rng& rng, const std::vector<double>& py) {
  const std::size_t c = py.size();
  Tensor t(c, c);
  for (std::size_t y = 0; y < c; ++y) {
    double s = 0.0;
    for (std::size_t h = 0; h < c; ++h) s += (t(h, y) = rng.uniform(0.01, 1.0));
    for (std::size_t h = 0; h < c; ++h) t(h, y) *= py[y] / s;
  }
  return t;
}

Verdict criterion6() {
  Rng rng(601);
  int violations = 0, ties = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t c = 2 + t % 3;
    std::vector<double> py(c);
    double s = 0.0;
    for (double& p : py) s += (p = rng.uniform(0.2, 1.0));
    for (double& p : py) p /= s;
    const Tensor a = joint_with_marginal(rng, py), b = joint_with_marginal(rng, py);
    const Tensor tn = oracle::random_transition(rng, c);
    // Loss ordering: -log|det| on clean joints vs noisy joints T·T_noise.
    const double clean = -std::log(std::abs(det_of(a))) + std::log(std::abs(det_of(b)));
    const double noisy = -std::log(std::abs(det_of(matmul(a, tn)))) + std::log(std::abs(det_of(matmul(b, tn))));
    if (std::abs(clean) < 1e-12 || std::abs(noisy) < 1e-12) {
      ++ties;
      continue;
    }
    violations += (clean > 0) != (noisy > 0);
  }
  return {violations == 0,
          std::to_string(violations) + " order changes in " + std::to_string(1000 - ties) + " non-tied pairs"};
}

// ---- gradients (criterion 7) ------------------------------------------------

using TapeLoss = std::function<Var(Tape&, std::span<const Var>)>;

double tape_grad_error(ParamSet& ps, const TapeLoss& build) {
  const LossWithGrad loss = [&](ParamSet& p) {
    Tape tape;
    const auto vars = tape.bind(p, true);
    const Var out = build(tape, vars);
    tape.backward(out);
    tape.accumulate_into(vars, p);
    return tape.scalar(out);
  };
  ps.zero_grad();
  return grad_check(loss, ps);
}

Tensor symmetric_weights(Rng& rng, std::size_t n) {
  Tensor h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (rng.uniform() < 0.6) h(i, j) = h(j, i) = rng.uniform(-1.0, 1.0);
  return h;
}

Verdict criterion7() {
  Rng rng(701);
  std::map<std::string, double> worst;
  std::map<std::string, int> fails;
  auto record = [&](const std::string& name, double err) {
    worst[name] = std::max(worst[name], err);
    fails[name] += !(err < 1e-4);
  };
  for (int t = 0; t < 100; ++t) {
    const std::size_t c = 2 + t % 3;
    const std::size_t n = c + 2 + rng.below(6);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i < c ? i : rng.below(c));
    const Tensor onehot = one_hot(labels, c);
    const double gamma = rng.uniform(0.0, 2.0);
    {
      ParamSet ps;
      ps.add("o", softmax_rows(oracle::random_matrix(rng, n, c, -2.0, 2.0)));
      record("L_clf", tape_grad_error(ps, [&](Tape& tape, std::span<const Var> v) {
               return nodes::dmi_loss(tape, v[0], onehot, gamma);
             }));
      record("L_r", tape_grad_error(ps, [&](Tape& tape, std::span<const Var> v) {
               return nodes::entropy_regularizer(tape, v[0]);
             }));
    }
    {
      const std::size_t m = 4 + rng.below(5);
      ParamSet ps;
      ps.add("zs", oracle::random_matrix(rng, m, 2));
      ps.add("zt", oracle::random_matrix(rng, m, 2));
      const Tensor hs = symmetric_weights(rng, m), ht = symmetric_weights(rng, m);
      record("Dis_pn", tape_grad_error(ps, [&](Tape& tape, std::span<const Var> v) {
               const nodes::DisPnInput in[] = {{v[0], &hs}, {v[1], &ht}};
               return nodes::dispn_loss(tape, in);
             }));
    }
    {
      const MlpShape shape{{3, 8, 1}, false};
      ParamSet critic = init_mlp("critic", shape, rng);
      for (auto& p : critic)
        for (double& v : p.value.data()) v += rng.uniform(-0.2, 0.2);
      const Tensor zs = oracle::random_matrix(rng, 6, 3), zt = oracle::random_matrix(rng, 6, 3, -0.5, 1.5);
      const Tensor pts = penalty_interpolates(zs, zt, rng);
      record("critic objective", tape_grad_error(critic, [&](Tape& tape, std::span<const Var> v) {
               const Var cs = mlp_forward(tape, v, tape.constant(zs), shape);
               const Var ct = mlp_forward(tape, v, tape.constant(zt), shape);
               return tape.combine({{1.0, nodes::wasserstein_estimate(tape, cs, ct)},
                                    {-10.0, nodes::gradient_penalty(tape, v, shape, pts)}});
             }));
      record("gradient penalty", tape_grad_error(critic, [&](Tape& tape, std::span<const Var> v) {
               return nodes::gradient_penalty(tape, v, shape, pts);
             }));
    }
  }
  bool pass = true;
  std::ostringstream d;
  for (const auto& [name, w] : worst) {
    pass = pass && fails[name] == 0;
    d << name << " " << fmt(w, 2) << (fails[name] ? " (" + std::to_string(fails[name]) + " over)" : "") << "; ";
  }
  return {pass, "max rel. error over 100 instances each: " + list_text(d)};
}

// ---- graph oracles (criterion 8) ---------------------------------------------

Verdict criterion8() {
  Rng rng(801);
  int knn_bad = 0, cluster_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + rng.below(49);
    const std::size_t k = 1 + rng.below(std::min<std::uint64_t>(5, n - 1));
    Tensor x(n, 2);
    // Half the instances sit on an integer grid so distance ties are frequent.
    for (double& v : x.data()) v = t % 2 ? static_cast<double>(rng.below(6)) : rng.uniform(-1.0, 1.0);
    const DistanceMatrix d = pairwise_distances(x, Metric::euclidean);
    std::vector<std::vector<double>> rows(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) rows[i][j] = d(i, j);
    const AdjacencyMask mask = knn_adjacency(d, k);
    const auto want = oracle::knn_brute(rows, k);
    bool same = true;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) same = same && mask(i, j) == want[i][j];
    knn_bad += !same;
    cluster_bad += nn_clusters(d).labels != oracle::nn_components_bfs(rows);
  }
  return {knn_bad == 0 && cluster_bad == 0, "kNN mismatches " + std::to_string(knn_bad) +
                                                ", cluster mismatches " + std::to_string(cluster_bad) +
                                                " in 1000 instances"};
}

// ---- noise (criterion 9) -----------------------------------------------------

Verdict criterion9() {
  Rng rng(901);
  const std::pair<std::string, TransitionMatrix> cases[] = {
      {"case1", build_case1(0.4)},
      {"pairwise", build_pairwise(4, 0.3, default_pair_map(4))},
      {"uniform", build_uniform(5, 0.3)}};
  bool pass = true;
  std::ostringstream d;
  for (const auto& [name, m] : cases) {
    const std::size_t c = m.classes();
    std::vector<int> y;
    for (std::size_t k = 0; k < c; ++k) y.insert(y.end(), 100000, static_cast<int>(k));
    const Tensor e = empirical_transition(y, corrupt_labels(y, m, rng), c);
    double worst = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) worst = std::max(worst, std::abs(e[i] - m.t[i]));
    pass = pass && worst <= 0.02;
    d << name << " " << fmt(worst, 2) << "; ";
  }
  return {pass, "max entry deviation: " + list_text(d)};
}

// ---- Wasserstein sanity (criterion 10) -------------------------------------

Verdict criterion10() {
  Rng rng(1001);
  Tensor s(512, 1), t(512, 1);
  std::vector<double> a, b;
  for (std::size_t i = 0; i < 512; ++i) a.push_back(s(i, 0) = rng.normal(0.0, 1.0));
  for (std::size_t i = 0; i < 512; ++i) b.push_back(t(i, 0) = rng.normal(3.0, 1.0));
  const double w1 = oracle::w1_sorted(a, b);
  const MlpShape shape{{1, 20, 1}, false};
  ParamSet critic = init_mlp("critic", shape, rng);
  AdamState adam = make_adam_state(critic);
  const double lr = 1e-3;
  for (int step = 0; step < 2000; ++step) critic_ascent_step(critic, adam, shape, s, t, 10.0, lr, rng);
  const Tensor cs = mlp_forward(critic, s, shape), ct = mlp_forward(critic, t, shape);
  const double est = std::abs(wasserstein_estimate(cs.data(), ct.data()));
  const double rel = std::abs(est - w1) / w1;
  return {rel <= 0.15, "estimate " + fmt(est) + " vs sorted-sample W1 " + fmt(w1) + " (" + fmt(100 * rel, 3) +
                           "% off) after 2000 steps"};
}

// ---- feature CSV pipeline (criterion 11) -----------------------------------

std::string masked_metrics(const std::string& path) {
  std::ifstream in(path);
  std::string out;
  for (std::string line; std::getline(in, line);) {
    std::stringstream ss(line);
    int col = 0;
    for (std::string cell; std::getline(ss, cell, ','); ++col) out += (col >= 8 ? "*" : cell) + ",";
    out += "\n";
  }
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict criterion11(const std::string& fixtures) {
  const fs::path root = fs::temp_directory_path() / ("rlpga_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  auto run = [&](const std::string& name) {
    std::ostringstream out, err;
    const std::vector<std::string> args{"rlpga", "run", "--preset", "office31", "--dataset", "csv",
                                        "--src-csv", fixtures + "/fixture_src.csv",
                                        "--tgt-csv", fixtures + "/fixture_tgt.csv",
                                        "--tgt-eval-csv", fixtures + "/fixture_tgt_eval.csv",
                                        "--noise", "pairwise:0.2", "--seed", "11", "--steps", "100",
                                        "--eval-interval", "20", "--out", (root / name).string()};
    const int code = run_cli(args, out, err);
    if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
    return code;
  };
  const int a = run("a"), b = run("b");
  Verdict v;
  if (a != 0 || b != 0) {
    v = {false, "pipeline exited with " + std::to_string(a) + "/" + std::to_string(b)};
  } else {
    const std::string ma = masked_metrics((root / "a/metrics.csv").string());
    const std::size_t rows = static_cast<std::size_t>(std::count(ma.begin(), ma.end(), '\n')) - 1;
    const bool same = ma == masked_metrics((root / "b/metrics.csv").string()) &&
                      slurp((root / "a/params.json").string()) == slurp((root / "b/params.json").string());
    std::string acc;
    std::istringstream summary(slurp((root / "a/summary.txt").string()));
    for (std::string line; std::getline(summary, line);)
      if (line.rfind("tgt_acc=", 0) == 0) acc = line;
    v = {same && rows == 5 && !acc.empty(),
         std::to_string(rows) + " metric rows, repeat run " + (same ? "identical" : "different") + ", " + acc};
  }
  fs::remove_all(root);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::string fixtures = "tests/data";
  std::set<int> criteria;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (!a.empty() && std::isdigit(static_cast<unsigned char>(a[0]))) criteria.insert(std::stoi(a));
    else fixtures = a;
  }
  if (criteria.empty())
    for (int c = 1; c <= 11; ++c) criteria.insert(c);

  std::map<int, Verdict> verdicts;
  auto timed = [&](int id, const std::function<Verdict()>& f) {
    if (!criteria.count(id)) return;
    verdicts[id] = f();
  };
  timed(5, criterion5);
  timed(6, criterion6);
  timed(7, criterion7);
  timed(8, criterion8);
  timed(9, criterion9);
  timed(10, criterion10);
  timed(11, [&] { return criterion11(fixtures); });

  const std::set<RunKey> keys = needed_runs(criteria);
  if (!keys.empty()) {
    std::fprintf(stderr, "training %zu synthetic runs on %u worker(s)\n", keys.size(), sweep_threads());
    const auto runs = run_all(keys);
    timed(1, [&] { return criterion1(runs); });
    timed(2, [&] { return criterion2(runs); });
    timed(3, [&] { return criterion3(runs); });
    timed(4, [&] { return criterion4(runs); });
  }

  int failed = 0;
  for (const auto& [id, v] : verdicts) {
    std::printf("criterion %d: %s  %s\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    failed += !v.pass;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
