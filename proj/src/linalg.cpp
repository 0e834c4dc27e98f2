// SPDX-License-Identifier: Apache-2.0
#include "rlpga/linalg.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "rlpga/errors.hpp"

namespace rlpga {
namespace {

void require_square(const Tensor& a, const char* what) {
  if (a.rank() != 2 || a.rows() != a.cols()) {
    throw ContractError(std::string(what) + ": expected square matrix, got " + a.shape_string());
  }
}

struct Lu {
  Tensor lu;
  std::vector<std::size_t> perm;
  int parity = 1;
  bool singular = false;
};

Lu decompose(const Tensor& a) {
  const std::size_t n = a.rows();
  Lu out{a, std::vector<std::size_t>(n), 1, false};
  std::iota(out.perm.begin(), out.perm.end(), std::size_t{0});
  Tensor& m = out.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    double best = std::abs(m(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(m(i, k)) > best) {
        best = std::abs(m(i, k));
        pivot = i;
      }
    }
    if (best == 0.0) {
      out.singular = true;
      return out;
    }
    if (pivot != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(pivot, j));
      std::swap(out.perm[k], out.perm[pivot]);
      out.parity = -out.parity;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double factor = m(i, k) / m(k, k);
      m(i, k) = factor;
      for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= factor * m(k, j);
    }
  }
  return out;
}

}  // namespace

Slogdet slogdet(const Tensor& a) {
  require_square(a, "slogdet");
  const Lu lu = decompose(a);
  if (lu.singular) return {0, -std::numeric_limits<double>::infinity()};
  int sign = lu.parity;
  double logabs = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double u = lu.lu(i, i);
    if (u < 0) sign = -sign;
    logabs += std::log(std::abs(u));
  }
  return {sign, logabs};
}

Tensor inverse(const Tensor& a) {
  require_square(a, "inverse");
  const std::size_t n = a.rows();
  const Lu lu = decompose(a);
  if (lu.singular) throw SingularMatrixError("matrix is singular");
  Tensor inv(n, n);
  std::vector<double> col(n);
  for (std::size_t c = 0; c < n; ++c) {
    // Solve L U x = P e_c.
    for (std::size_t i = 0; i < n; ++i) col[i] = lu.perm[i] == c ? 1.0 : 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) col[i] -= lu.lu(i, j) * col[j];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) col[i] -= lu.lu(i, j) * col[j];
      col[i] /= lu.lu(i, i);
    }
    for (std::size_t i = 0; i < n; ++i) inv(i, c) = col[i];
  }
  return inv;
}

Tensor slogdet_backward(const Tensor& a) { return transpose(inverse(a)); }

}  // namespace rlpga
