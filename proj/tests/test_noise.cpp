// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <doctest.h>

#include "oracles.hpp"
#include "rlpga/errors.hpp"
#include "rlpga/linalg.hpp"
#include "rlpga/noise.hpp"

using namespace rlpga;

namespace {

double det_of(const Tensor& t) {
  const Slogdet s = slogdet(t);
  return s.sign == 0 ? 0.0 : s.sign * std::exp(s.logabs);
}

void check_valid(const TransitionMatrix& m) {
  CHECK_NOTHROW(validate_row_stochastic(m.t));
  CHECK_NOTHROW(validate_invertible(m.t));
}

std::vector<int> balanced_labels(std::size_t classes, std::size_t per_class) {
  std::vector<int> y;
  for (std::size_t c = 0; c < classes; ++c) y.insert(y.end(), per_class, static_cast<int>(c));
  return y;
}

}  // namespace

TEST_CASE("case1 examples") {
  CHECK(build_case1(0.0).t == Tensor::identity(2));
  const TransitionMatrix m = build_case1(0.4);
  CHECK(m.t == Tensor::matrix({{1, 0}, {0.4, 0.6}}));
  CHECK(det_of(m.t) == doctest::Approx(0.6));
  CHECK(det_of(build_case1(0.99).t) == doctest::Approx(0.01));
  check_valid(build_case1(0.99));
  CHECK_THROWS_AS(build_case1(1.0), SingularMatrixError);
}

TEST_CASE("pairwise examples") {
  CHECK(build_pairwise(4, 0.0, default_pair_map(4)).t == Tensor::identity(4));
  const TransitionMatrix m = build_pairwise(3, 0.2, parse_pair_map("1:2"));
  CHECK(m.t == Tensor::matrix({{0.8, 0.2, 0}, {0, 1, 0}, {0, 0, 1}}));

  PairMap cyclic;
  for (int c = 0; c < 10; ++c) cyclic.push_back({c, (c + 1) % 10});
  const TransitionMatrix ten = build_pairwise(10, 0.4, cyclic);
  CHECK(det_of(ten.t) == doctest::Approx(std::pow(0.6, 10) - std::pow(0.4, 10)).epsilon(1e-10));
  check_valid(ten);
  CHECK_THROWS_AS(build_pairwise(10, 0.5, cyclic), SingularMatrixError);
}

TEST_CASE("pairwise map validation") {
  CHECK_THROWS_AS(build_pairwise(3, 0.2, {{1, 1}}), ConfigError);
  CHECK_THROWS_AS(build_pairwise(3, 0.2, {{0, 3}}), ConfigError);
  CHECK_THROWS_AS(build_pairwise(3, 0.2, {{0, 1}, {0, 2}}), ConfigError);
  CHECK_THROWS_AS(parse_pair_map("1-2"), ConfigError);
  CHECK_THROWS_AS(parse_pair_map("0:1"), ConfigError);
  CHECK(pair_map_to_string(parse_pair_map("1:2,3:4")) == "1:2,3:4");
}

TEST_CASE("default pair map") {
  CHECK(default_pair_map(2) == PairMap{{1, 0}});
  CHECK(build_pairwise(2, 0.3, default_pair_map(2)).t == build_case1(0.3).t);
  for (std::size_t c = 2; c <= 12; ++c) check_valid(build_pairwise(c, 0.45, default_pair_map(c)));
}

TEST_CASE("uniform examples") {
  const TransitionMatrix m = build_uniform(3, 0.3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(m.t(i, j) == doctest::Approx(i == j ? 0.7 : 0.15));
  CHECK(build_uniform(4, 0.0).t == Tensor::identity(4));
  CHECK_THROWS_AS(build_uniform(2, 0.5), SingularMatrixError);
  CHECK_NOTHROW(validate_invertible(build_uniform(2, 0.49).t));
  CHECK(det_of(build_uniform(2, 0.49).t) == doctest::Approx(0.02));
}

TEST_CASE("validate_invertible") {
  CHECK_NOTHROW(validate_invertible(Tensor::identity(3)));
  CHECK_THROWS_AS(validate_invertible(Tensor::matrix({{0.5, 0.5}, {0.5, 0.5}})), SingularMatrixError);
  CHECK_THROWS_AS(validate_row_stochastic(Tensor::matrix({{0.5, 0.6}, {0, 1}})), ContractError);
}

TEST_CASE("every constructed matrix is valid") {
  Rng rng(1);
  for (int t = 0; t < 300; ++t) {
    const std::size_t c = 2 + rng.below(9);
    const double r = rng.uniform(0.0, 0.49);
    check_valid(build_pairwise(c, r, default_pair_map(c)));
    check_valid(build_uniform(c, r * (c - 1.0) / c * 1.9));
    if (c == 2) check_valid(build_case1(r * 2));
  }
}

TEST_CASE("noise spec parsing") {
  const NoiseSpec s = parse_noise("case1:0.4");
  CHECK(s.kind == NoiseKind::case1);
  CHECK(s.ratio == 0.4);
  CHECK(parse_noise("none").kind == NoiseKind::none);
  CHECK(to_string(parse_noise("pairwise:0.2")) == "pairwise:0.2");
  CHECK_THROWS_AS(parse_noise("case1"), ConfigError);
  CHECK_THROWS_AS(parse_noise("case1:1"), ConfigError);
  CHECK_THROWS_AS(parse_noise("gaussian:0.1"), ConfigError);
  CHECK_THROWS_AS(parse_noise("uniform:0,3"), ConfigError);
  CHECK_THROWS_AS(build_transition(parse_noise("case1:0.2"), 3), ConfigError);
  CHECK(build_transition(parse_noise("random:0.2"), 3).t == build_uniform(3, 0.2).t);
  CHECK(build_transition(parse_noise("none"), 3).t == Tensor::identity(3));
}

TEST_CASE("identity noise leaves labels unchanged") {
  Rng rng(2);
  const std::vector<int> y = balanced_labels(4, 50);
  CHECK(corrupt_labels(y, build_uniform(4, 0.0), rng) == y);
}

TEST_CASE("corruption is reproducible and rejects bad labels") {
  const std::vector<int> y = balanced_labels(3, 100);
  Rng a(5), b(5);
  const TransitionMatrix m = build_uniform(3, 0.3);
  CHECK(corrupt_labels(y, m, a) == corrupt_labels(y, m, b));
  std::vector<int> bad = y;
  bad[17] = 3;
  try {
    corrupt_labels(bad, m, a);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("index 17") != std::string::npos);
  }
}

TEST_CASE("case1 at 0.5 flips half of class 2") {
  Rng rng(6);
  const std::vector<int> y(100000, 1);
  const std::vector<int> noisy = corrupt_labels(y, build_case1(0.5), rng);
  std::size_t flipped = 0;
  for (int v : noisy) flipped += v == 0;
  CHECK(std::abs(static_cast<double>(flipped) / 100000.0 - 0.5) <= 0.02);
}

TEST_CASE("empirical transition converges to the matrix") {
  Rng rng(7);
  const TransitionMatrix cases[] = {build_case1(0.4), build_pairwise(4, 0.3, default_pair_map(4)),
                                    build_uniform(5, 0.3)};
  for (const TransitionMatrix& m : cases) {
    const std::size_t c = m.classes();
    const std::vector<int> y = balanced_labels(c, 100000);
    const Tensor e = empirical_transition(y, corrupt_labels(y, m, rng), c);
    for (std::size_t i = 0; i < m.t.size(); ++i) CHECK(std::abs(e[i] - m.t[i]) <= 0.02);
  }
}
