// SPDX-License-Identifier: Apache-2.0
#include "rlpga/sweep.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "rlpga/errors.hpp"
#include "rlpga/format.hpp"
#include "rlpga/runner.hpp"

namespace fs = std::filesystem;

namespace rlpga {

std::vector<SweepCell> enumerate_cells(const SweepSpec& spec) {
  std::vector<SweepCell> cells;
  for (double r : spec.ratios) {
    for (Variant v : spec.variants) {
      for (std::uint64_t s : spec.seeds) {
        cells.push_back({r, v, s, "r" + format_double(r) + "_" + to_string(v) + "_s" + std::to_string(s)});
      }
    }
  }
  return cells;
}

RunManifest cell_manifest(const RunManifest& base, const SweepSpec& spec, const SweepCell& cell,
                          const std::string& root) {
  RunManifest m = base;
  m.config.variant = cell.variant;
  m.config.seed = cell.seed;
  if (cell.variant == Variant::rga || cell.variant == Variant::wdgrl_ce) m.config.alpha = 0.0;
  m.noise.kind = cell.ratio == 0.0 ? NoiseKind::none : spec.kind;
  m.noise.ratio = cell.ratio;
  m.noise.seed = cell.seed;
  m.out_dir = (fs::path(root) / cell.dir).string();
  return m;
}

std::vector<CellResult> run_sweep(const RunManifest& base, const SweepSpec& spec,
                                  const std::string& root, unsigned threads) {
  const auto cells = enumerate_cells(spec);
  std::vector<CellResult> results(cells.size());
  fs::create_directories(root);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      CellResult& r = results[i];
      r.cell = cells[i];
      try {
        const RunSummary s = execute_run(cell_manifest(base, spec, cells[i], root));
        r.tgt_acc = s.last.tgt_acc;
      } catch (const std::exception& e) {
        r.error = e.what();
        std::error_code ec;
        fs::create_directories(fs::path(root) / cells[i].dir, ec);
        std::ofstream d(fs::path(root) / cells[i].dir / "diagnostics.txt", std::ios::app);
        if (d) d << "cell error: " << e.what() << '\n';
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cells.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ofstream out(fs::path(root) / "final_acc.csv", std::ios::binary);
  if (!out) throw DataError("cannot write final_acc.csv under " + root);
  out << "ratio,variant,seed,tgt_acc\n";
  for (const auto& r : results) {
    out << format_double(r.cell.ratio) << ',' << to_string(r.cell.variant) << ',' << r.cell.seed << ','
        << (r.tgt_acc ? format_double(*r.tgt_acc) : (r.error.empty() ? "" : "failed")) << '\n';
  }
  return results;
}

unsigned sweep_threads() {
  if (const char* env = std::getenv("RLPGA_THREADS")) {
    try {
      const long v = parse_long(env, "RLPGA_THREADS");
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const ConfigError&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace rlpga
