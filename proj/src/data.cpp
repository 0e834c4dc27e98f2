// SPDX-License-Identifier: Apache-2.0
#include "rlpga/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>

#include "rlpga/errors.hpp"
#include "rlpga/format.hpp"
#include "rlpga/losses.hpp"

namespace rlpga {

std::string to_string(Domain d) { return d == Domain::source ? "source" : "target"; }

std::size_t DomainDataset::classes() const {
  if (!labels || labels->empty()) return 0;
  return static_cast<std::size_t>(*std::max_element(labels->begin(), labels->end())) + 1;
}

std::pair<DomainDataset, DomainDataset> gen_synthetic(std::uint64_t seed) {
  constexpr std::size_t per_class = 1000;
  constexpr double sd = 0.5;
  const double means[2][2] = {{-2.0, 0.0}, {2.0, 0.0}};
  Rng rng(seed);

  auto draw = [&](Domain domain, const std::string& name) {
    DomainDataset ds;
    ds.domain = domain;
    ds.name = name;
    ds.features = Tensor(2 * per_class, 2);
    ds.labels = std::vector<int>(2 * per_class);
    for (std::size_t c = 0; c < 2; ++c) {
      for (std::size_t i = 0; i < per_class; ++i) {
        const std::size_t row = c * per_class + i;
        ds.features(row, 0) = rng.normal(means[c][0], sd);
        ds.features(row, 1) = rng.normal(means[c][1], sd);
        (*ds.labels)[row] = static_cast<int>(c);
      }
    }
    return ds;
  };

  DomainDataset source = draw(Domain::source, "synthetic-source");
  DomainDataset target = draw(Domain::target, "synthetic-target");
  const double angle = std::numbers::pi / 6.0;
  const double cs = std::cos(angle), sn = std::sin(angle);
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double x = target.features(i, 0), y = target.features(i, 1);
    target.features(i, 0) = cs * x - sn * y + 1.0;
    target.features(i, 1) = sn * x + cs * y + 1.0;
  }
  return {std::move(source), std::move(target)};
}

DomainDataset parse_feature_csv(std::istream& in, bool has_labels, Domain domain,
                                const std::string& name) {
  DomainDataset ds;
  ds.domain = domain;
  ds.name = name;
  std::vector<double> values;
  std::vector<int> labels;
  std::size_t dim = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = split(body, ',');
    const std::size_t width = fields.size() - (has_labels ? 1 : 0);
    if (width == 0) throw DataError("line " + std::to_string(line_no) + ": no feature columns");
    if (rows == 0) {
      dim = width;
    } else if (width != dim) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                      " feature columns, found " + std::to_string(width));
    }
    std::size_t first = 0;
    if (has_labels) {
      const std::string_view f = trim(fields[0]);
      long label = 0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), label);
      if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size() || label < 1) {
        throw DataError("line " + std::to_string(line_no) + ": invalid label '" + std::string(f) +
                        "' (labels are integers starting at 1)");
      }
      labels.push_back(static_cast<int>(label - 1));
      first = 1;
    }
    for (std::size_t c = first; c < fields.size(); ++c) {
      std::string_view f = trim(fields[c]);
      if (!f.empty() && f.front() == '+') f.remove_prefix(1);
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw DataError("line " + std::to_string(line_no) + ": cannot parse '" + std::string(f) + "'");
      }
      if (!std::isfinite(v)) throw DataError("line " + std::to_string(line_no) + ": non-finite value");
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw DataError("feature file '" + name + "' has no data rows");
  ds.features = Tensor(rows, dim, std::move(values));
  if (has_labels) ds.labels = std::move(labels);
  return ds;
}

DomainDataset load_feature_csv(const std::string& path, bool has_labels, Domain domain) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open feature file '" + path + "'");
  return parse_feature_csv(in, has_labels, domain, path);
}

void write_feature_csv(std::ostream& out, const DomainDataset& data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    bool first = true;
    if (data.labels) {
      out << (*data.labels)[i] + 1;
      first = false;
    }
    for (double v : data.features.row(i)) {
      if (!first) out << ',';
      out << format_double(v);
      first = false;
    }
    out << '\n';
  }
}

namespace {

// First `count` entries of a partial Fisher-Yates shuffle of `pool`.
std::vector<std::size_t> draw_without_replacement(Rng& rng, std::vector<std::size_t> pool,
                                                  std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& idx) {
  Tensor out(idx.size(), x.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    auto src = x.row(idx[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace

DomainBatch sample_batch(Rng& rng, const DomainDataset& src, const DomainDataset& tgt,
                         std::size_t m_b, bool stratified, std::size_t classes) {
  if (!src.labels) throw ConfigError("source dataset has no labels");
  if (m_b == 0 || m_b > src.size() || m_b > tgt.size()) {
    throw ConfigError("batch size " + std::to_string(m_b) + " exceeds dataset size (source " +
                      std::to_string(src.size()) + ", target " + std::to_string(tgt.size()) + ")");
  }
  if (src.dim() != tgt.dim()) throw ConfigError("source and target feature widths differ");
  DomainBatch batch;
  if (stratified) {
    if (m_b < classes) throw ConfigError("stratified batch smaller than class count");
    const std::size_t per_class = m_b / classes;
    std::vector<std::vector<std::size_t>> by_class(classes);
    for (std::size_t i = 0; i < src.size(); ++i) by_class.at((*src.labels)[i]).push_back(i);
    std::vector<bool> used(src.size(), false);
    for (auto& members : by_class) {
      const std::size_t take = std::min(per_class, members.size());
      for (std::size_t i : draw_without_replacement(rng, std::move(members), take)) {
        batch.src_index.push_back(i);
        used[i] = true;
      }
    }
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < src.size(); ++i)
      if (!used[i]) rest.push_back(i);
    for (std::size_t i : draw_without_replacement(rng, std::move(rest), m_b - batch.src_index.size()))
      batch.src_index.push_back(i);
  } else {
    batch.src_index = draw_without_replacement(rng, all_indices(src.size()), m_b);
  }
  batch.tgt_index = draw_without_replacement(rng, all_indices(tgt.size()), m_b);

  batch.src_x = gather_rows(src.features, batch.src_index);
  std::vector<int> src_labels;
  for (std::size_t i : batch.src_index) src_labels.push_back((*src.labels)[i]);
  batch.src_onehot = one_hot(src_labels, classes);
  batch.tgt_x = gather_rows(tgt.features, batch.tgt_index);
  if (tgt.labels) {
    batch.tgt_y.emplace();
    for (std::size_t i : batch.tgt_index) batch.tgt_y->push_back((*tgt.labels)[i]);
  }
  return batch;
}

}  // namespace rlpga
