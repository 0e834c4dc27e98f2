// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rlpga/tensor.hpp"

namespace rlpga {

struct Slogdet {
  int sign = 0;      // -1, 0 or +1
  double logabs = 0;  // -inf when sign == 0
};

// LU with partial pivoting; logabs = sum of log|u_ii|. Exactly singular input
// yields {0, -inf} rather than an exception.
Slogdet slogdet(const Tensor& a);

// d log|det A| / dA, i.e. inverse(A) transposed. Throws SingularMatrixError.
Tensor slogdet_backward(const Tensor& a);

// Throws SingularMatrixError on exactly singular input.
Tensor inverse(const Tensor& a);

}  // namespace rlpga
