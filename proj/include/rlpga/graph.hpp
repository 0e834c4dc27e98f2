// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rlpga/tensor.hpp"

namespace rlpga {

enum class Metric { euclidean, cosine };

std::string to_string(Metric m);
Metric parse_metric(const std::string& s);
// Cosine above 64 input dimensions, euclidean otherwise.
Metric default_metric(std::size_t dim) noexcept;

struct DistanceMatrix {
  Metric metric = Metric::euclidean;
  Tensor d;  // symmetric n×n, zero diagonal

  std::size_t n() const noexcept { return d.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return d(i, j); }
};

// Dense symmetric boolean matrix.
class AdjacencyMask {
 public:
  explicit AdjacencyMask(std::size_t n) : n_(n), bits_(n * n, 0) {}
  std::size_t n() const noexcept { return n_; }
  bool operator()(std::size_t i, std::size_t j) const { return bits_[i * n_ + j] != 0; }
  void link(std::size_t i, std::size_t j) {
    bits_[i * n_ + j] = 1;
    bits_[j * n_ + i] = 1;
  }
  friend bool operator==(const AdjacencyMask&, const AdjacencyMask&) = default;

 private:
  std::size_t n_;
  std::vector<std::uint8_t> bits_;
};

struct Clusters {
  std::vector<int> labels;  // 1..count, numbered by first appearance
  int count = 0;
};

// Heat-kernel bandwidth: either the median of the batch's nonzero squared
// pairwise distances or a fixed positive constant.
struct Bandwidth {
  bool median = true;
  double value = 0.0;

  static Bandwidth median_heuristic() { return {true, 0.0}; }
  static Bandwidth fixed(double t1) { return {false, t1}; }
};

Bandwidth parse_bandwidth(const std::string& s);
std::string to_string(const Bandwidth& b);

struct SignedWeightGraph {
  Tensor h_pos;
  Tensor h_neg;
  Tensor h_pn;  // h_pos - h_neg
  Clusters clusters;
  std::size_t k = 0;
  double t1 = 0.0;

  std::size_t n() const noexcept { return h_pos.rows(); }
};

DistanceMatrix pairwise_distances(const Tensor& x, Metric metric);

// mask(i, j) iff j is among the k nearest neighbours of i or vice versa.
// Ties in distance go to the lower index.
AdjacencyMask knn_adjacency(const DistanceMatrix& dist, std::size_t k);

// exp(-d^2 / t1) on masked pairs, zero elsewhere.
Tensor heat_kernel_weights(const DistanceMatrix& dist, const AdjacencyMask& mask, double t1);

// Connected components of the undirected 1-nearest-neighbour graph.
Clusters nn_clusters(const DistanceMatrix& dist);
std::vector<std::pair<std::size_t, std::size_t>> nn_edges(const DistanceMatrix& dist);

// exp(-d^2 / t1) for pairs in different clusters, zero elsewhere.
Tensor negative_weights(const DistanceMatrix& dist, const Clusters& clusters, double t1);

// Median of the nonzero squared off-diagonal distances; 1 if all are zero.
double median_bandwidth(const DistanceMatrix& dist);

SignedWeightGraph build_signed_graph(const Tensor& x, std::size_t k, Bandwidth bandwidth,
                                     Metric metric);

// Header i,j,h_pos,h_neg,b_i,b_j, then one row per ordered off-diagonal pair with a
// nonzero weight.
void write_graph_csv(std::ostream& os, const SignedWeightGraph& g);

}  // namespace rlpga
