// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "rlpga/metrics_io.hpp"

namespace rlpga {

struct PlotSeries {
  std::string label;  // legend text
  MetricsTable table;
};

inline constexpr int kPanelWidth = 800;
inline constexpr int kPanelHeight = 300;

// Two stacked panels (w_estimate vs step, tgt_acc vs step), one polyline per
// series in each. Throws DataError when a table is empty or off-schema.
std::string render_svg(const std::vector<PlotSeries>& series);

struct PhaseStats {
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;
};

struct TimingRow {
  std::string name;
  PhaseStats critic, main, graph;
};

// Throws DataError when a timing column is missing or has no values.
TimingRow timing_row(const std::string& name, const MetricsTable& t);
std::string format_timing_table(const std::vector<TimingRow>& rows);

// Nearest-rank percentile, q in (0, 100].
double percentile(std::vector<double> values, double q);

}  // namespace rlpga
