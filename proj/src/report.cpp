// SPDX-License-Identifier: Apache-2.0
#include "rlpga/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "rlpga/errors.hpp"

namespace rlpga {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

// Plot area inside a panel.
constexpr double kLeft = 70, kRight = 190, kTop = 30, kBottom = 45;

std::string fixed(double v, int digits = 2) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  }
};

struct Panel {
  std::string column;
  std::string y_label;
  bool unit_range;
};

void draw_panel(std::ostringstream& svg, const Panel& panel, int index,
                const std::vector<PlotSeries>& series, const Range& steps) {
  const double plot_w = kPanelWidth - kLeft - kRight;
  const double plot_h = kPanelHeight - kTop - kBottom;
  Range ys;
  if (panel.unit_range) {
    ys.add(0.0);
    ys.add(1.0);
  } else {
    for (const auto& s : series)
      for (const auto& v : s.table.column(panel.column))
        if (v && std::isfinite(*v)) ys.add(*v);
    ys.settle();
  }
  auto px = [&](double x) { return kLeft + (x - steps.lo) / (steps.hi - steps.lo) * plot_w; };
  auto py = [&](double y) { return kTop + (ys.hi - y) / (ys.hi - ys.lo) * plot_h; };

  svg << "<g class=\"panel\" id=\"panel-" << panel.column << "\" transform=\"translate(0,"
      << index * kPanelHeight << ")\">\n";
  svg << "<rect x=\"" << fixed(kLeft) << "\" y=\"" << fixed(kTop) << "\" width=\"" << fixed(plot_w)
      << "\" height=\"" << fixed(plot_h) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = steps.lo + (steps.hi - steps.lo) * t / 4.0;
    const double fy = ys.lo + (ys.hi - ys.lo) * t / 4.0;
    svg << "<text x=\"" << fixed(px(fx)) << "\" y=\"" << fixed(kTop + plot_h + 16)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << fixed(fx, 0) << "</text>\n";
    svg << "<text x=\"" << fixed(kLeft - 6) << "\" y=\"" << fixed(py(fy) + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << fixed(fy, 3) << "</text>\n";
  }
  svg << "<text x=\"" << fixed(kLeft + plot_w / 2) << "\" y=\"" << fixed(kPanelHeight - 8.0)
      << "\" font-size=\"12\" text-anchor=\"middle\">step</text>\n";
  svg << "<text x=\"14\" y=\"" << fixed(kTop + plot_h / 2) << "\" font-size=\"12\" "
      << "text-anchor=\"middle\" transform=\"rotate(-90 14 " << fixed(kTop + plot_h / 2) << ")\">"
      << escape_xml(panel.y_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto xs = series[s].table.column("step");
    const auto vs = series[s].table.column(panel.column);
    const char* color = kPalette[s % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!xs[i] || !vs[i] || !std::isfinite(*vs[i])) continue;
      svg << (first ? "" : " ") << fixed(px(*xs[i])) << ',' << fixed(py(*vs[i]));
      first = false;
    }
    svg << "\"/>\n";
    const double ly = kTop + 12 + 18.0 * static_cast<double>(s);
    const double lx = kLeft + plot_w + 12;
    svg << "<line x1=\"" << fixed(lx) << "\" y1=\"" << fixed(ly - 4) << "\" x2=\"" << fixed(lx + 18)
        << "\" y2=\"" << fixed(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text class=\"legend\" x=\"" << fixed(lx + 24) << "\" y=\"" << fixed(ly)
        << "\" font-size=\"11\">" << escape_xml(series[s].label) << "</text>\n";
  }
  svg << "</g>\n";
}

PhaseStats stats_of(const MetricsTable& t, const std::string& column) {
  std::vector<double> v;
  for (const auto& x : t.column(column))
    if (x) v.push_back(*x);
  if (v.empty()) throw DataError(t.source + ": column '" + column + "' has no values");
  PhaseStats s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  s.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  s.p95 = percentile(std::move(v), 95.0);
  return s;
}

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series) {
  if (series.empty()) throw DataError("plot: no metrics files given");
  Range steps;
  for (const auto& s : series) {
    require_metrics_schema(s.table);
    if (s.table.rows.empty()) throw DataError(s.table.source + ": no metric rows");
    for (const auto& v : s.table.column("step"))
      if (v) steps.add(*v);
  }
  steps.settle();

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kPanelWidth << "\" height=\""
      << 2 * kPanelHeight << "\" viewBox=\"0 0 " << kPanelWidth << ' ' << 2 * kPanelHeight
      << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  draw_panel(svg, {"w_estimate", "W estimate", false}, 0, series, steps);
  draw_panel(svg, {"tgt_acc", "target accuracy", true}, 1, series, steps);
  svg << "</svg>\n";
  return svg.str();
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ContractError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double rank = std::ceil(q / 100.0 * static_cast<double>(values.size()));
  const std::size_t idx = static_cast<std::size_t>(std::clamp(rank, 1.0, double(values.size()))) - 1;
  return values[idx];
}

TimingRow timing_row(const std::string& name, const MetricsTable& t) {
  TimingRow row;
  row.name = name;
  row.critic = stats_of(t, "ms_critic");
  row.main = stats_of(t, "ms_main");
  row.graph = stats_of(t, "ms_graph");
  return row;
}

std::string format_timing_table(const std::vector<TimingRow>& rows) {
  std::size_t width = 3;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  std::ostringstream out;
  auto pad = [&](const std::string& s, std::size_t w) { return s + std::string(w - std::min(w, s.size()), ' '); };
  out << pad("run", width);
  for (const char* phase : {"critic", "main", "graph"})
    for (const char* stat : {"mean", "median", "p95"})
      out << "  " << pad(std::string(phase) + "_" + stat, 13);
  out << '\n';
  for (const auto& r : rows) {
    out << pad(r.name, width);
    for (const PhaseStats* s : {&r.critic, &r.main, &r.graph})
      for (double v : {s->mean, s->median, s->p95}) out << "  " << pad(fixed(v, 4), 13);
    out << '\n';
  }
  return out.str();
}

}  // namespace rlpga
