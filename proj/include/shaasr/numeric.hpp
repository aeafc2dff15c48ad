// shaasr/numeric.hpp

// Copyright 2026  The shaasr authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SHAASR_NUMERIC_HPP_
#define SHAASR_NUMERIC_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "shaasr/error.hpp"
#include "shaasr/tensor.hpp"

namespace shaasr {

// Plain (non-differentiable) kernels over the last axis.  The autodiff tape
// reuses these for its forward values.

namespace kernel {

/// In-place shift-stable softmax of one slice.
inline void softmax_slice(double* p, std::size_t k) {
  double m = p[0];
  for (std::size_t i = 1; i < k; ++i) m = std::max(m, p[i]);
  double z = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    p[i] = std::exp(p[i] - m);
    z += p[i];
  }
  for (std::size_t i = 0; i < k; ++i) p[i] /= z;
}

/// In-place log-softmax of one slice (log-sum-exp stabilized).
inline void log_softmax_slice(double* p, std::size_t k) {
  double m = p[0];
  for (std::size_t i = 1; i < k; ++i) m = std::max(m, p[i]);
  double z = 0.0;
  for (std::size_t i = 0; i < k; ++i) z += std::exp(p[i] - m);
  double lz = m + std::log(z);
  for (std::size_t i = 0; i < k; ++i) p[i] -= lz;
}

}  // namespace kernel

/// Softmax over the last axis of any tensor with rank >= 1.
inline Tensor softmax(const Tensor& logits) {
  SHAASR_CHECK(logits.rank() >= 1, ErrKind::kData, "dimension error: softmax needs rank >= 1");
  logits.check_finite("softmax input");
  std::size_t k = logits.shape().back();
  Tensor out = logits;
  for (std::size_t off = 0; off < out.size(); off += k)
    kernel::softmax_slice(out.data().data() + off, k);
  return out;
}

inline Tensor log_softmax(const Tensor& logits) {
  SHAASR_CHECK(logits.rank() >= 1, ErrKind::kData, "dimension error: log_softmax needs rank >= 1");
  logits.check_finite("log_softmax input");
  std::size_t k = logits.shape().back();
  Tensor out = logits;
  for (std::size_t off = 0; off < out.size(); off += k)
    kernel::log_softmax_slice(out.data().data() + off, k);
  return out;
}

/// Mean over the batch of -log p(label); input is log-probabilities [B x K].
inline double cross_entropy(const Tensor& log_probs, std::span<const int> labels) {
  SHAASR_CHECK(log_probs.rank() == 2, ErrKind::kData,
               "dimension error: cross_entropy expects [B x K] log-probs");
  std::size_t b = log_probs.dim(0), k = log_probs.dim(1);
  SHAASR_CHECK(labels.size() == b, ErrKind::kData,
               "dimension error: %zu labels for batch of %zu", labels.size(), b);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    int y = labels[i];
    SHAASR_CHECK(y >= 0 && static_cast<std::size_t>(y) < k, ErrKind::kData,
                 "index error: label %d out of range [0,%zu)", y, k);
    total -= log_probs.at2(i, static_cast<std::size_t>(y));
  }
  return total / static_cast<double>(b);
}

/// Checks that every row of `probs` is a distribution (sum 1 within tol).
inline void check_rows_are_distributions(const Tensor& probs, double tol,
                                         const char* who) {
  SHAASR_CHECK(probs.rank() == 2, ErrKind::kData, "dimension error: %s expects [B x K]", who);
  std::size_t b = probs.dim(0), k = probs.dim(1);
  for (std::size_t i = 0; i < b; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += probs.at2(i, j);
    SHAASR_CHECK(std::fabs(s - 1.0) <= tol, ErrKind::kData,
                 "distribution error: %s row %zu sums to %.12g", who, i, s);
  }
}

/// Mean over the batch of sum_k t_k (ln t_k - ls_k).  Teacher rows must be
/// valid distributions; terms with t_k == 0 contribute zero.
inline double kl_divergence(const Tensor& teacher_probs, const Tensor& student_log_probs) {
  SHAASR_CHECK(teacher_probs.same_shape(student_log_probs), ErrKind::kData,
               "dimension error: KL teacher %s vs student %s",
               shape_str(teacher_probs).c_str(), shape_str(student_log_probs).c_str());
  check_rows_are_distributions(teacher_probs, 1e-6, "kl_divergence teacher");
  std::size_t b = teacher_probs.dim(0), k = teacher_probs.dim(1);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double t = teacher_probs.at2(i, j);
      if (t > 0.0) total += t * (std::log(t) - student_log_probs.at2(i, j));
    }
  }
  return total / static_cast<double>(b);
}

}  // namespace shaasr

#endif  // SHAASR_NUMERIC_HPP_
