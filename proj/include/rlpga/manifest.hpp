// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "rlpga/noise.hpp"
#include "rlpga/trainer.hpp"

namespace rlpga {

inline constexpr const char* kToolVersion = "0.3.0";

struct DatasetSpec {
  std::string kind = "synthetic";  // synthetic | csv
  std::string src_csv;             // labelled
  std::string tgt_csv;             // features only
  std::string tgt_eval_csv;        // labelled target rows, evaluation only
};

// Everything needed to replay a run.
struct RunManifest {
  std::string preset = "synthetic";
  TrainConfig config;
  DatasetSpec dataset;
  NoiseSpec noise;
  std::string out_dir;
  bool dump_graphs = false;
  std::string tool_version = kToolVersion;
  std::string started_at;  // informational; not used on replay
};

std::string manifest_to_json(const RunManifest& m);
// Throws ConfigError on missing or malformed fields.
RunManifest manifest_from_json(const std::string& text);

void write_manifest(const std::string& path, const RunManifest& m);
RunManifest read_manifest(const std::string& path);

// ISO-8601 UTC timestamp of the current time.
std::string utc_timestamp();

}  // namespace rlpga
