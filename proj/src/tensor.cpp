// SPDX-License-Identifier: Apache-2.0
#include "rlpga/tensor.hpp"

#include <cmath>
#include <sstream>

#include "rlpga/errors.hpp"

namespace rlpga {

Tensor::Tensor(std::size_t n) : shape_{n}, data_(n, 0.0) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : shape_{rows, cols}, data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : shape_{rows, cols}, data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ContractError("tensor data length " + std::to_string(data_.size()) +
                        " does not match shape " + shape_string());
  }
}

Tensor Tensor::vector(std::vector<double> data) {
  Tensor t;
  t.shape_ = {data.size()};
  t.data_ = std::move(data);
  return t;
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ContractError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor(r, c, std::move(data));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

std::size_t Tensor::rows() const noexcept {
  if (shape_.size() == 2) return shape_[0];
  return shape_.empty() ? 0 : 1;
}

std::size_t Tensor::cols() const noexcept {
  if (shape_.size() == 2) return shape_[1];
  return shape_.empty() ? 0 : shape_[0];
}

void Tensor::fill(double v) {
  for (double& x : data_) x = v;
}

bool Tensor::all_finite() const noexcept {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::string Tensor::shape_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << 'x';
    os << shape_[i];
  }
  os << ')';
  return os.str();
}

Tensor transpose(const Tensor& a) {
  Tensor t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ContractError("matmul shape mismatch: " + a.shape_string() + " vs " + b.shape_string());
  }
  Tensor out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw ContractError("matmul_tn shape mismatch: " + a.shape_string() + " vs " +
                        b.shape_string());
  }
  Tensor out(a.cols(), b.cols());
  for (std::size_t n = 0; n < a.rows(); ++n) {
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double ani = a(n, i);
      if (ani == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += ani * b(n, j);
    }
  }
  return out;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ContractError(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " +
                        b.shape_string());
  }
}

}  // namespace rlpga
