// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rlpga/rng.hpp"
#include "rlpga/tensor.hpp"

namespace rlpga {

enum class NoiseKind { none, case1, pairwise, uniform, random };

std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(const std::string& s);

// T(i, j) = Pr(noisy = j | clean = i); row-stochastic and invertible.
struct TransitionMatrix {
  NoiseKind kind = NoiseKind::none;
  Tensor t;

  std::size_t classes() const noexcept { return t.rows(); }
};

// Pairwise flip targets as (class, target) pairs, 0-based, class != target.
using PairMap = std::vector<std::pair<int, int>>;

struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  double ratio = 0.0;
  PairMap pair_map;  // empty: default_pair_map(C)
  std::uint64_t seed = 0;
};

// "none", "case1:0.4", "pairwise:0.2", "uniform:0.3", "random:0.1".
NoiseSpec parse_noise(const std::string& s);
std::string to_string(const NoiseSpec& spec);
// "1:2,3:4" with 1-based classes.
PairMap parse_pair_map(const std::string& s);
std::string pair_map_to_string(const PairMap& map);

// [[1, 0], [r, 1 - r]].
TransitionMatrix build_case1(double r);
// Mapped classes keep 1 - r and send r to their target; others stay clean.
TransitionMatrix build_pairwise(std::size_t classes, double r, const PairMap& map);
// Odd (0-based) classes flip to the next class, cyclically. For two classes
// this coincides with case (1).
PairMap default_pair_map(std::size_t classes);
// Diagonal 1 - r, off-diagonal r / (C - 1).
TransitionMatrix build_uniform(std::size_t classes, double r);
TransitionMatrix build_transition(const NoiseSpec& spec, std::size_t classes);

// Throws SingularMatrixError unless |det T| > 1e-10.
void validate_invertible(const Tensor& t);
// Throws ContractError unless entries lie in [0,1] and rows sum to 1 within 1e-12.
void validate_row_stochastic(const Tensor& t);

// Draws each noisy label from row T[y_i]. Labels are 0-based.
std::vector<int> corrupt_labels(std::span<const int> labels, const TransitionMatrix& t, Rng& rng);

// Row-normalized frequency of (clean, noisy) pairs.
Tensor empirical_transition(std::span<const int> clean, std::span<const int> noisy,
                            std::size_t classes);

}  // namespace rlpga
