// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlpga/data.hpp"
#include "rlpga/manifest.hpp"
#include "rlpga/trainer.hpp"

namespace rlpga {

struct RunData {
  DomainDataset src;                      // training labels, noise applied
  std::vector<int> src_given_labels;      // labels before noise injection
  DomainDataset tgt;                      // features only
  std::optional<DomainDataset> tgt_eval;  // labelled target rows
  std::size_t classes = 0;
};

// Builds or loads the datasets and corrupts the source labels once, with an
// rng derived from the noise seed.
RunData load_run_data(const RunManifest& m);

// Raised by execute_run after the diagnostics file has been written.
class RunFailure : public std::runtime_error {
 public:
  RunFailure(const std::string& what, std::string diagnostics_path)
      : std::runtime_error(what), diagnostics_path_(std::move(diagnostics_path)) {}
  const std::string& diagnostics_path() const noexcept { return diagnostics_path_; }

 private:
  std::string diagnostics_path_;
};

struct RunSummary {
  IterationRecord last;
  double src_acc_given = 0.0;  // against the labels before noise injection
  std::size_t records = 0;
};

// Writes manifest.json before training, then metrics.csv (flushed per record),
// summary.txt, params.json and, when requested, graphs/. Configuration and
// data errors propagate before the output directory is touched; failures
// during training are reported through RunFailure.
RunSummary execute_run(const RunManifest& m);

void write_params_json(std::ostream& out, const Models& models);
// Throws DataError on malformed content.
Models read_params_json(std::istream& in);
Models load_params(const std::string& path);

// One row per sample: domain,label,z_1..z_p. Labels are 1-based; rows
// without a known label carry -1.
void write_embeddings_csv(std::ostream& out, const Models& models, const RunData& data);

}  // namespace rlpga
