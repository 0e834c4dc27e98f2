// SPDX-License-Identifier: Apache-2.0
#include "rlpga/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "rlpga/errors.hpp"
#include "rlpga/format.hpp"
#include "rlpga/union_find.hpp"

namespace rlpga {

std::string to_string(Metric m) { return m == Metric::cosine ? "cosine" : "euclidean"; }

Metric parse_metric(const std::string& s) {
  if (s == "euclidean") return Metric::euclidean;
  if (s == "cosine") return Metric::cosine;
  throw ConfigError("unknown metric '" + s + "'");
}

Metric default_metric(std::size_t dim) noexcept {
  return dim > 64 ? Metric::cosine : Metric::euclidean;
}

Bandwidth parse_bandwidth(const std::string& s) {
  if (s == "median") return Bandwidth::median_heuristic();
  const double t1 = parse_double(s, "--t1");
  if (!(t1 > 0.0) || !std::isfinite(t1)) throw ConfigError("t1 must be positive, got " + s);
  return Bandwidth::fixed(t1);
}

std::string to_string(const Bandwidth& b) { return b.median ? "median" : format_double(b.value); }

DistanceMatrix pairwise_distances(const Tensor& x, Metric metric) {
  if (x.rank() != 2) throw ContractError("pairwise_distances expects a matrix");
  const std::size_t n = x.rows();
  const std::size_t dim = x.cols();
  if (n < 2) throw ContractError("pairwise_distances needs at least 2 points");
  DistanceMatrix out{metric, Tensor(n, n)};
  std::vector<double> norms;
  if (metric == Metric::cosine) {
    norms.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (double v : x.row(i)) s += v * v;
      norms[i] = std::sqrt(s);
      if (norms[i] == 0.0) {
        throw DataError("cosine distance undefined for zero-norm row " + std::to_string(i));
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = 0.0;
      if (metric == Metric::euclidean) {
        for (std::size_t c = 0; c < dim; ++c) {
          const double diff = x(i, c) - x(j, c);
          d += diff * diff;
        }
        d = std::sqrt(d);
      } else {
        double dot = 0.0;
        for (std::size_t c = 0; c < dim; ++c) dot += x(i, c) * x(j, c);
        d = std::clamp(1.0 - dot / (norms[i] * norms[j]), 0.0, 2.0);
      }
      out.d(i, j) = d;
      out.d(j, i) = d;
    }
  }
  return out;
}

namespace {

// Neighbours of i ordered by (distance, index).
std::vector<std::size_t> ranked_neighbours(const DistanceMatrix& dist, std::size_t i) {
  std::vector<std::size_t> order;
  order.reserve(dist.n() - 1);
  for (std::size_t j = 0; j < dist.n(); ++j)
    if (j != i) order.push_back(j);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist(i, a) < dist(i, b); });
  return order;
}

}  // namespace

AdjacencyMask knn_adjacency(const DistanceMatrix& dist, std::size_t k) {
  const std::size_t n = dist.n();
  if (k < 1 || k + 1 > n) {
    throw ConfigError("k must be in [1, n-1]; got k=" + std::to_string(k) + " with n=" +
                      std::to_string(n));
  }
  AdjacencyMask mask(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto order = ranked_neighbours(dist, i);
    for (std::size_t r = 0; r < k; ++r) mask.link(i, order[r]);
  }
  return mask;
}

Tensor heat_kernel_weights(const DistanceMatrix& dist, const AdjacencyMask& mask, double t1) {
  if (!(t1 > 0.0)) throw ConfigError("t1 must be positive");
  const std::size_t n = dist.n();
  Tensor w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && mask(i, j)) w(i, j) = std::exp(-dist(i, j) * dist(i, j) / t1);
  return w;
}

std::vector<std::pair<std::size_t, std::size_t>> nn_edges(const DistanceMatrix& dist) {
  if (dist.n() < 2) throw ContractError("nn_clusters needs at least 2 points");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < dist.n(); ++i) {
    std::size_t best = i == 0 ? 1 : 0;
    for (std::size_t j = 0; j < dist.n(); ++j) {
      if (j != i && dist(i, j) < dist(i, best)) best = j;
    }
    edges.emplace_back(i, best);
  }
  return edges;
}

Clusters nn_clusters(const DistanceMatrix& dist) {
  const std::size_t n = dist.n();
  UnionFind sets(n);
  for (const auto& [i, j] : nn_edges(dist)) sets.unite(i, j);
  Clusters out;
  out.labels.assign(n, 0);
  std::vector<int> root_label(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = sets.find(i);
    if (root_label[root] == 0) root_label[root] = ++out.count;
    out.labels[i] = root_label[root];
  }
  return out;
}

Tensor negative_weights(const DistanceMatrix& dist, const Clusters& clusters, double t1) {
  if (!(t1 > 0.0)) throw ConfigError("t1 must be positive");
  const std::size_t n = dist.n();
  if (clusters.labels.size() != n) throw ContractError("cluster labels do not match distance matrix");
  Tensor w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (clusters.labels[i] != clusters.labels[j]) w(i, j) = std::exp(-dist(i, j) * dist(i, j) / t1);
  return w;
}

double median_bandwidth(const DistanceMatrix& dist) {
  std::vector<double> sq;
  for (std::size_t i = 0; i < dist.n(); ++i)
    for (std::size_t j = i + 1; j < dist.n(); ++j) {
      const double d2 = dist(i, j) * dist(i, j);
      if (d2 > 0.0) sq.push_back(d2);
    }
  if (sq.empty()) return 1.0;
  std::sort(sq.begin(), sq.end());
  const std::size_t m = sq.size();
  return m % 2 == 1 ? sq[m / 2] : 0.5 * (sq[m / 2 - 1] + sq[m / 2]);
}

SignedWeightGraph build_signed_graph(const Tensor& x, std::size_t k, Bandwidth bandwidth,
                                     Metric metric) {
  const DistanceMatrix dist = pairwise_distances(x, metric);
  SignedWeightGraph g;
  g.k = k;
  g.t1 = bandwidth.median ? median_bandwidth(dist) : bandwidth.value;
  g.h_pos = heat_kernel_weights(dist, knn_adjacency(dist, k), g.t1);
  g.clusters = nn_clusters(dist);
  g.h_neg = negative_weights(dist, g.clusters, g.t1);
  g.h_pn = g.h_pos;
  for (std::size_t i = 0; i < g.h_pn.size(); ++i) g.h_pn[i] -= g.h_neg[i];
  return g;
}

void write_graph_csv(std::ostream& os, const SignedWeightGraph& g) {
  os << "i,j,h_pos,h_neg,b_i,b_j\n";
  for (std::size_t i = 0; i < g.n(); ++i) {
    for (std::size_t j = 0; j < g.n(); ++j) {
      if (i == j || (g.h_pos(i, j) == 0.0 && g.h_neg(i, j) == 0.0)) continue;
      os << i << ',' << j << ',' << format_double(g.h_pos(i, j)) << ','
         << format_double(g.h_neg(i, j)) << ',' << g.clusters.labels[i] << ','
         << g.clusters.labels[j] << '\n';
    }
  }
}

}  // namespace rlpga
