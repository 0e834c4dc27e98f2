// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rlpga/manifest.hpp"

namespace rlpga {

struct SweepSpec {
  NoiseKind kind = NoiseKind::case1;
  std::vector<double> ratios{0.0, 0.2, 0.4, 0.6};
  std::vector<Variant> variants{Variant::rlpga, Variant::rga, Variant::wdgrl_ce};
  std::vector<std::uint64_t> seeds{1, 2, 3};
};

struct SweepCell {
  double ratio = 0.0;
  Variant variant = Variant::rlpga;
  std::uint64_t seed = 0;
  std::string dir;  // relative to the sweep root
};

// Ratio-major, then variant, then seed.
std::vector<SweepCell> enumerate_cells(const SweepSpec& spec);

// The base manifest with the cell's ratio, variant, seed and output directory
// applied. Variants without the local preserving term get alpha = 0.
RunManifest cell_manifest(const RunManifest& base, const SweepSpec& spec, const SweepCell& cell,
                          const std::string& root);

struct CellResult {
  SweepCell cell;
  std::optional<double> tgt_acc;
  std::string error;  // empty on success
};

// Runs every cell on up to `threads` workers and writes root/final_acc.csv
// once all have finished. Failed cells are recorded and do not stop the sweep.
std::vector<CellResult> run_sweep(const RunManifest& base, const SweepSpec& spec,
                                  const std::string& root, unsigned threads);

// RLPGA_THREADS if set to a positive integer, else the hardware concurrency.
unsigned sweep_threads();

}  // namespace rlpga
