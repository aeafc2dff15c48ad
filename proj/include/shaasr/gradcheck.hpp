// shaasr/gradcheck.hpp

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

#ifndef SHAASR_GRADCHECK_HPP_
#define SHAASR_GRADCHECK_HPP_

#include <cmath>
#include <functional>

#include "shaasr/tensor.hpp"

namespace shaasr {

/// Central-difference gradient of a deterministic scalar function:
/// g_i = (f(x + eps e_i) - f(x - eps e_i)) / (2 eps).
inline Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f,
                               const Tensor& x, double eps) {
  SHAASR_CHECK(eps > 0.0, ErrKind::kConfig, "parameter error: finite_diff eps must be > 0");
  Tensor g(x.shape());
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double orig = probe[i];
    probe[i] = orig + eps;
    double fp = f(probe);
    probe[i] = orig - eps;
    double fm = f(probe);
    probe[i] = orig;
    SHAASR_CHECK(std::isfinite(fp) && std::isfinite(fm), ErrKind::kData,
                 "numeric error: non-finite f in finite_diff_grad at coord %zu", i);
    g[i] = (fp - fm) / (2.0 * eps);
  }
  return g;
}

/// Mixed relative/absolute error used by the gradient suite:
/// |a - n| / max(1, |a|, |n|).
inline double grad_rel_err(double analytic, double numeric) {
  double denom = std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
  return std::fabs(analytic - numeric) / denom;
}

inline double max_grad_rel_err(const std::vector<double>& analytic, const Tensor& numeric) {
  SHAASR_CHECK(analytic.size() == numeric.size(), ErrKind::kData,
               "dimension error: gradcheck size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i)
    worst = std::max(worst, grad_rel_err(analytic[i], numeric[i]));
  return worst;
}

}  // namespace shaasr

#endif  // SHAASR_GRADCHECK_HPP_
