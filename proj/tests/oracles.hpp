// SPDX-License-Identifier: Apache-2.0
// Reference implementations used only by the tests. Each one is written the
// slow, obvious way and shares no code with the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <utility>
#include <vector>

#include "rlpga/rng.hpp"
#include "rlpga/tensor.hpp"

namespace oracle {

using rlpga::Rng;
using rlpga::Tensor;

inline Tensor random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                            double hi = 1.0) {
  Tensor t(rows, cols);
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

// Laplace expansion along the first row.
inline double cofactor_det(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  double det = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::vector<double>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<double> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(a[r][k]);
      minor.push_back(row);
    }
    det += (c % 2 == 0 ? 1.0 : -1.0) * a[0][c] * cofactor_det(minor);
  }
  return det;
}

inline double cofactor_det(const Tensor& t) {
  std::vector<std::vector<double>> a(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) a[i][j] = t(i, j);
  return cofactor_det(a);
}

inline Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  Tensor out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

inline double sq_dist(const Tensor& x, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t c = 0; c < x.cols(); ++c) s += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
  return s;
}

// Indices of the k nearest other points of i by a full sort; equal distances
// keep the lower index first.
inline std::vector<std::size_t> k_nearest(const std::vector<std::vector<double>>& d, std::size_t i,
                                          std::size_t k) {
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < d.size(); ++j)
    if (j != i) idx.push_back(j);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return d[i][a] < d[i][b]; });
  idx.resize(std::min(k, idx.size()));
  return idx;
}

// Symmetric kNN adjacency: i~j when either is among the other's k nearest.
inline std::vector<std::vector<bool>> knn_brute(const std::vector<std::vector<double>>& d, std::size_t k) {
  const std::size_t n = d.size();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : k_nearest(d, i, k)) adj[i][j] = adj[j][i] = true;
  return adj;
}

// Component labels 1..M by BFS over the 1-NN edges, numbered in order of the
// smallest member index.
inline std::vector<int> nn_components_bfs(const std::vector<std::vector<double>>& d) {
  const std::size_t n = d.size();
  std::vector<std::vector<std::size_t>> nbr(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto nn = k_nearest(d, i, 1);
    if (nn.empty()) continue;
    nbr[i].push_back(nn[0]);
    nbr[nn[0]].push_back(i);
  }
  std::vector<int> label(n, 0);
  int next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s]) continue;
    label[s] = ++next;
    std::queue<std::size_t> q;
    q.push(s);
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t v : nbr[u])
        if (!label[v]) {
          label[v] = next;
          q.push(v);
        }
    }
  }
  return label;
}

// Same partition? (labels may be numbered differently)
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

// Random C×C row-stochastic matrix with every row dominated by its diagonal,
// hence invertible.
inline Tensor random_transition(Rng& rng, std::size_t c) {
  Tensor t(c, c);
  for (std::size_t i = 0; i < c; ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (i == j) continue;
      t(i, j) = rng.uniform(0.0, 1.0);
      off += t(i, j);
    }
    const double keep = rng.uniform(0.55, 0.95);
    for (std::size_t j = 0; j < c; ++j) t(i, j) = i == j ? keep : (1.0 - keep) * t(i, j) / off;
  }
  return t;
}

// Random C×C joint distribution (non-negative, sums to 1).
inline Tensor random_joint(Rng& rng, std::size_t c) {
  Tensor p(c, c);
  double s = 0.0;
  for (double& v : p.data()) s += (v = rng.uniform(0.01, 1.0));
  for (double& v : p.data()) v /= s;
  return p;
}

// 1-D W1 between two equal-size empirical samples: mean |sorted difference|.
inline double w1_sorted(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

inline double stddev(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / n);
}

}  // namespace oracle
