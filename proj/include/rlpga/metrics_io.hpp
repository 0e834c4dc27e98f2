// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rlpga/trainer.hpp"

namespace rlpga {

inline constexpr const char* kMetricsHeader =
    "step,w_estimate,l_clf,l_r,dis_pn,total,src_acc_noisy,tgt_acc,ms_critic,ms_main,ms_graph";

// Columns holding wall time; excluded from byte-level determinism checks.
inline constexpr const char* kTimingColumns[] = {"ms_critic", "ms_main", "ms_graph"};

void write_metrics_header(std::ostream& out);
// An absent tgt_acc is written as an empty field.
void write_metrics_row(std::ostream& out, const IterationRecord& r);

// A parsed metrics file. Empty fields are nullopt.
struct MetricsTable {
  std::string source;  // file name, for messages
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;

  bool has_column(const std::string& name) const;
  // Throws DataError naming the file when the column is missing.
  std::size_t column_index(const std::string& name) const;
  std::vector<std::optional<double>> column(const std::string& name) const;
};

// Throws DataError on unreadable files and malformed numbers.
MetricsTable parse_metrics(std::istream& in, const std::string& source);
MetricsTable read_metrics(const std::string& path);

// Throws DataError naming the file unless the header matches kMetricsHeader.
void require_metrics_schema(const MetricsTable& t);

}  // namespace rlpga
