// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <doctest.h>

#include "rlpga/data.hpp"
#include "rlpga/errors.hpp"

using namespace rlpga;

namespace {

DomainDataset parse(const std::string& text, bool labels = true) {
  std::istringstream in(text);
  return parse_feature_csv(in, labels, Domain::source, "mem");
}

std::string error_of(const std::string& text, bool labels = true) {
  try {
    parse(text, labels);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("synthetic sizes and balance") {
  const auto [src, tgt] = gen_synthetic(1);
  CHECK(src.size() == 2000);
  CHECK(tgt.size() == 2000);
  CHECK(src.dim() == 2);
  for (const DomainDataset* d : {&src, &tgt}) {
    REQUIRE(d->has_labels());
    CHECK(std::count(d->labels->begin(), d->labels->end(), 0) == 1000);
    CHECK(std::count(d->labels->begin(), d->labels->end(), 1) == 1000);
  }
  CHECK(src.domain == Domain::source);
  CHECK(tgt.domain == Domain::target);
}

TEST_CASE("synthetic class means") {
  const auto [src, tgt] = gen_synthetic(2);
  double m[2][2] = {};
  for (std::size_t i = 0; i < src.size(); ++i) {
    const int c = (*src.labels)[i];
    m[c][0] += src.features(i, 0) / 1000.0;
    m[c][1] += src.features(i, 1) / 1000.0;
  }
  CHECK(std::abs(m[0][0] + 2.0) <= 0.05);
  CHECK(std::abs(m[0][1]) <= 0.05);
  CHECK(std::abs(m[1][0] - 2.0) <= 0.05);
  CHECK(std::abs(m[1][1]) <= 0.05);

  // Target means follow the 30 degree rotation and (1,1) shift.
  double t[2][2] = {};
  for (std::size_t i = 0; i < tgt.size(); ++i) {
    const int c = (*tgt.labels)[i];
    t[c][0] += tgt.features(i, 0) / 1000.0;
    t[c][1] += tgt.features(i, 1) / 1000.0;
  }
  const double cs = std::cos(std::numbers::pi / 6), sn = std::sin(std::numbers::pi / 6);
  CHECK(std::abs(t[1][0] - (2 * cs + 1)) <= 0.05);
  CHECK(std::abs(t[1][1] - (2 * sn + 1)) <= 0.05);
  CHECK(std::abs(t[0][0] - (-2 * cs + 1)) <= 0.05);
  CHECK(std::abs(t[0][1] - (-2 * sn + 1)) <= 0.05);
}

TEST_CASE("synthetic determinism") {
  const auto a = gen_synthetic(3), b = gen_synthetic(3), c = gen_synthetic(4);
  CHECK(a.first.features == b.first.features);
  CHECK(a.second.features == b.second.features);
  CHECK_FALSE(a.first.features == c.first.features);
}

TEST_CASE("feature csv examples") {
  const DomainDataset d = parse("1,0.5,0.25\n2,1.0,0.0\n1,0.0,1.0");
  CHECK(d.size() == 3);
  CHECK(d.dim() == 2);
  CHECK(*d.labels == std::vector<int>{0, 1, 0});
  CHECK(d.features(0, 1) == 0.25);
  const DomainDataset h = parse("# label,x,y\n1,0.5,0.25\n");
  CHECK(h.size() == 1);
  const DomainDataset u = parse("0.5,0.25\n1,2\n", false);
  CHECK_FALSE(u.has_labels());
  CHECK(u.dim() == 2);
}

TEST_CASE("feature csv errors name the line") {
  CHECK(error_of("1,abc").find("line 1") != std::string::npos);
  CHECK(error_of("1,0.5,0.5\n2,0.5\n").find("line 2") != std::string::npos);
  CHECK(error_of("1,0.5\n1,nan\n").find("line 2") != std::string::npos);
  CHECK(error_of("0,0.5\n").find("line 1") != std::string::npos);
  CHECK(error_of("1.5,0.5\n").find("line 1") != std::string::npos);
  CHECK(error_of("1,0,5\n1,0.5\n").find("line 2") != std::string::npos);
  CHECK_FALSE(error_of("# only a comment\n").empty());
  CHECK_THROWS_AS(load_feature_csv("/nonexistent/x.csv", true, Domain::source), DataError);
}

TEST_CASE("feature csv round trip is lossless") {
  const auto [src, tgt] = gen_synthetic(5);
  std::ostringstream out;
  write_feature_csv(out, src);
  const DomainDataset back = parse(out.str());
  CHECK(back.features == src.features);
  CHECK(*back.labels == *src.labels);
}

TEST_CASE("full-size batch is a permutation") {
  const auto [src, tgt] = gen_synthetic(6);
  Rng rng(1);
  const DomainBatch b = sample_batch(rng, src, tgt, 2000, false, 2);
  std::set<std::size_t> seen(b.src_index.begin(), b.src_index.end());
  CHECK(seen.size() == 2000);
  CHECK(b.src_x.rows() == 2000);
}

TEST_CASE("batches are without replacement and one-hot") {
  const auto [src, tgt] = gen_synthetic(7);
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const DomainBatch b = sample_batch(rng, src, tgt, 32, t % 2 == 0, 2);
    CHECK(std::set<std::size_t>(b.src_index.begin(), b.src_index.end()).size() == 32);
    CHECK(std::set<std::size_t>(b.tgt_index.begin(), b.tgt_index.end()).size() == 32);
    for (std::size_t i = 0; i < 32; ++i) {
      CHECK(b.src_onehot(i, (*src.labels)[b.src_index[i]]) == 1.0);
      CHECK(b.src_onehot(i, 0) + b.src_onehot(i, 1) == 1.0);
      CHECK(b.src_x(i, 0) == src.features(b.src_index[i], 0));
      CHECK(b.tgt_x(i, 1) == tgt.features(b.tgt_index[i], 1));
    }
  }
}

TEST_CASE("stratified batches balance the noisy classes") {
  const auto [src, tgt] = gen_synthetic(8);
  Rng rng(3);
  const DomainBatch b = sample_batch(rng, src, tgt, 32, true, 2);
  double ones = 0.0;
  for (std::size_t i = 0; i < 32; ++i) ones += b.src_onehot(i, 1);
  CHECK(ones == 16.0);

  DomainDataset skew = src;
  for (std::size_t i = 5; i < 1000; ++i) (*skew.labels)[i] = 1;  // class 0 keeps 5 rows
  const DomainBatch s = sample_batch(rng, skew, tgt, 32, true, 2);
  double zeros = 0.0;
  for (std::size_t i = 0; i < 32; ++i) zeros += s.src_onehot(i, 0);
  CHECK(zeros == 5.0);
  CHECK_THROWS_AS(sample_batch(rng, src, tgt, 1, true, 2), ConfigError);
}

TEST_CASE("sampling is reproducible and validates sizes") {
  const auto [src, tgt] = gen_synthetic(9);
  Rng a(4), b(4);
  CHECK(sample_batch(a, src, tgt, 32, false, 2).src_index == sample_batch(b, src, tgt, 32, false, 2).src_index);
  CHECK_THROWS_AS(sample_batch(a, src, tgt, 2001, false, 2), ConfigError);
  CHECK_THROWS_AS(sample_batch(a, src, tgt, 0, false, 2), ConfigError);
}

TEST_CASE("training view carries no target labels") {
  const auto [src, tgt] = gen_synthetic(10);
  Rng rng(5);
  const DomainBatch b = sample_batch(rng, src, tgt, 16, false, 2);
  REQUIRE(b.tgt_y.has_value());
  const TrainingView v = b.training_view();
  CHECK(&v.tgt_x == &b.tgt_x);
  CHECK(&v.src_onehot == &b.src_onehot);
}
