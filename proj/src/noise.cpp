// SPDX-License-Identifier: Apache-2.0
#include "rlpga/noise.hpp"

#include <cmath>

#include "rlpga/errors.hpp"
#include "rlpga/format.hpp"
#include "rlpga/linalg.hpp"

namespace rlpga {

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::none: return "none";
    case NoiseKind::case1: return "case1";
    case NoiseKind::pairwise: return "pairwise";
    case NoiseKind::uniform: return "uniform";
    case NoiseKind::random: return "random";
  }
  return "none";
}

NoiseKind parse_noise_kind(const std::string& s) {
  for (NoiseKind k : {NoiseKind::none, NoiseKind::case1, NoiseKind::pairwise, NoiseKind::uniform,
                      NoiseKind::random}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown noise kind '" + s + "'");
}

NoiseSpec parse_noise(const std::string& s) {
  NoiseSpec spec;
  const auto colon = s.find(':');
  spec.kind = parse_noise_kind(s.substr(0, colon));
  if (spec.kind == NoiseKind::none) {
    if (colon != std::string::npos) throw ConfigError("noise 'none' takes no ratio");
    return spec;
  }
  if (colon == std::string::npos) throw ConfigError("noise '" + s + "' needs a ratio, e.g. case1:0.4");
  spec.ratio = parse_double(s.substr(colon + 1), "--noise");
  if (!(spec.ratio >= 0.0 && spec.ratio < 1.0)) throw ConfigError("noise ratio must be in [0, 1)");
  return spec;
}

std::string to_string(const NoiseSpec& spec) {
  if (spec.kind == NoiseKind::none) return "none";
  return to_string(spec.kind) + ":" + format_double(spec.ratio);
}

PairMap parse_pair_map(const std::string& s) {
  PairMap map;
  if (trim(s).empty()) return map;
  for (const auto& item : split(s, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw ConfigError("pair map entry '" + item + "' must be FROM:TO");
    const long from = parse_long(parts[0], "--pair-map");
    const long to = parse_long(parts[1], "--pair-map");
    if (from < 1 || to < 1) throw ConfigError("pair map classes are 1-based");
    map.emplace_back(static_cast<int>(from - 1), static_cast<int>(to - 1));
  }
  return map;
}

std::string pair_map_to_string(const PairMap& map) {
  std::string out;
  for (const auto& [from, to] : map) {
    if (!out.empty()) out += ',';
    out += std::to_string(from + 1) + ":" + std::to_string(to + 1);
  }
  return out;
}

void validate_invertible(const Tensor& t) {
  const Slogdet sd = slogdet(t);
  if (sd.sign == 0 || std::exp(sd.logabs) <= 1e-10) {
    throw SingularMatrixError("transition matrix is singular (|det| <= 1e-10); noisy labels "
                              "would carry no recoverable class information");
  }
}

void validate_row_stochastic(const Tensor& t) {
  if (t.rank() != 2 || t.rows() != t.cols()) throw ContractError("transition matrix must be square");
  for (std::size_t i = 0; i < t.rows(); ++i) {
    double s = 0.0;
    for (double v : t.row(i)) {
      if (!(v >= 0.0 && v <= 1.0)) throw ContractError("transition entry outside [0,1] in row " + std::to_string(i));
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-12) throw ContractError("transition row " + std::to_string(i) + " does not sum to 1");
  }
}

namespace {

TransitionMatrix checked(NoiseKind kind, Tensor t) {
  validate_row_stochastic(t);
  validate_invertible(t);
  return {kind, std::move(t)};
}

void check_ratio(double r) {
  if (!(r >= 0.0)) throw ConfigError("noise ratio must be non-negative");
}

}  // namespace

TransitionMatrix build_case1(double r) {
  check_ratio(r);
  if (r >= 1.0) throw SingularMatrixError("case1 noise with r >= 1 is singular");
  return checked(NoiseKind::case1, Tensor::matrix({{1.0, 0.0}, {r, 1.0 - r}}));
}

PairMap default_pair_map(std::size_t classes) {
  PairMap map;
  for (std::size_t c = 1; c < classes; c += 2)
    map.emplace_back(static_cast<int>(c), static_cast<int>((c + 1) % classes));
  return map;
}

TransitionMatrix build_pairwise(std::size_t classes, double r, const PairMap& map) {
  check_ratio(r);
  if (r >= 1.0) throw SingularMatrixError("pairwise noise with r >= 1 is singular");
  if (classes < 2) throw ConfigError("pairwise noise needs at least 2 classes");
  Tensor t = Tensor::identity(classes);
  std::vector<bool> seen(classes, false);
  for (const auto& [from, to] : map) {
    if (from < 0 || to < 0 || static_cast<std::size_t>(from) >= classes ||
        static_cast<std::size_t>(to) >= classes) {
      throw ConfigError("pair map class out of range");
    }
    if (from == to) throw ConfigError("pair map sends class " + std::to_string(from + 1) + " to itself");
    if (seen[from]) throw ConfigError("pair map lists class " + std::to_string(from + 1) + " twice");
    seen[from] = true;
    t(from, from) = 1.0 - r;
    t(from, to) = r;
  }
  return checked(NoiseKind::pairwise, std::move(t));
}

TransitionMatrix build_uniform(std::size_t classes, double r) {
  check_ratio(r);
  if (classes < 2) throw ConfigError("uniform noise needs at least 2 classes");
  const double c = static_cast<double>(classes);
  if (r >= (c - 1.0) / c) {
    throw SingularMatrixError("uniform noise with r >= (C-1)/C is singular");
  }
  Tensor t(classes, classes, r / (c - 1.0));
  for (std::size_t i = 0; i < classes; ++i) t(i, i) = 1.0 - r;
  return checked(NoiseKind::uniform, std::move(t));
}

TransitionMatrix build_transition(const NoiseSpec& spec, std::size_t classes) {
  switch (spec.kind) {
    case NoiseKind::none: return {NoiseKind::none, Tensor::identity(classes)};
    case NoiseKind::case1:
      if (classes != 2) throw ConfigError("case1 noise is defined for 2 classes only");
      return build_case1(spec.ratio);
    case NoiseKind::pairwise:
      return build_pairwise(classes, spec.ratio,
                            spec.pair_map.empty() ? default_pair_map(classes) : spec.pair_map);
    case NoiseKind::uniform: return build_uniform(classes, spec.ratio);
    case NoiseKind::random: {
      TransitionMatrix t = build_uniform(classes, spec.ratio);
      t.kind = NoiseKind::random;
      return t;
    }
  }
  throw ConfigError("unhandled noise kind");
}

std::vector<int> corrupt_labels(std::span<const int> labels, const TransitionMatrix& t, Rng& rng) {
  const std::size_t classes = t.classes();
  std::vector<int> noisy(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw DataError("label " + std::to_string(y + 1) + " at index " + std::to_string(i) +
                      " outside 1.." + std::to_string(classes));
    }
    const double u = rng.uniform();
    double cumulative = 0.0;
    int drawn = y;
    for (std::size_t j = 0; j < classes; ++j) {
      const double p = t.t(y, j);
      if (p == 0.0) continue;
      cumulative += p;
      drawn = static_cast<int>(j);
      if (u < cumulative) break;
    }
    noisy[i] = drawn;
  }
  return noisy;
}

Tensor empirical_transition(std::span<const int> clean, std::span<const int> noisy,
                            std::size_t classes) {
  if (clean.size() != noisy.size()) throw ContractError("label vectors differ in length");
  Tensor counts(classes, classes);
  for (std::size_t i = 0; i < clean.size(); ++i) counts(clean[i], noisy[i]) += 1.0;
  for (std::size_t i = 0; i < classes; ++i) {
    double s = 0.0;
    for (double v : counts.row(i)) s += v;
    if (s > 0)
      for (double& v : counts.row(i)) v /= s;
  }
  return counts;
}

}  // namespace rlpga
