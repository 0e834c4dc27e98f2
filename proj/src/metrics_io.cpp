// SPDX-License-Identifier: Apache-2.0
#include "rlpga/metrics_io.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "rlpga/errors.hpp"
#include "rlpga/format.hpp"

namespace rlpga {

void write_metrics_header(std::ostream& out) { out << kMetricsHeader << '\n'; }

void write_metrics_row(std::ostream& out, const IterationRecord& r) {
  out << r.step << ',' << format_double(r.w_estimate) << ',' << format_double(r.l_clf) << ','
      << format_double(r.l_r) << ',' << format_double(r.dis_pn) << ',' << format_double(r.total)
      << ',' << format_double(r.src_acc_noisy) << ',' << (r.tgt_acc ? format_double(*r.tgt_acc) : "")
      << ',' << format_double(r.ms_critic) << ',' << format_double(r.ms_main) << ','
      << format_double(r.ms_graph) << '\n';
}

bool MetricsTable::has_column(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::size_t MetricsTable::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw DataError(source + ": missing column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<std::optional<double>> MetricsTable::column(const std::string& name) const {
  const std::size_t c = column_index(name);
  std::vector<std::optional<double>> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[c]);
  return out;
}

MetricsTable parse_metrics(std::istream& in, const std::string& source) {
  MetricsTable t;
  t.source = source;
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw DataError(source + ": missing header");
  t.columns = split(trim(line), ',');
  for (auto& c : t.columns) c = std::string(trim(c));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    if (fields.size() != t.columns.size()) {
      throw DataError(source + ": line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(t.columns.size()));
    }
    std::vector<std::optional<double>> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      const auto v = trim(f);
      if (v.empty()) {
        row.emplace_back();
        continue;
      }
      try {
        row.emplace_back(parse_double(v, "metric"));
      } catch (const ConfigError& e) {
        throw DataError(source + ": line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

MetricsTable read_metrics(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return parse_metrics(in, path);
}

void require_metrics_schema(const MetricsTable& t) {
  const auto expected = split(kMetricsHeader, ',');
  if (t.columns != expected) {
    throw DataError(t.source + ": header does not match the metrics schema (expected " +
                    std::string(kMetricsHeader) + ")");
  }
}

}  // namespace rlpga
