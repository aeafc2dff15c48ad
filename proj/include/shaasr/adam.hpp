// shaasr/adam.hpp

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

#ifndef SHAASR_ADAM_HPP_
#define SHAASR_ADAM_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

#include "shaasr/tensor.hpp"

namespace shaasr {

/// Adam with bias correction for one parameter tensor.
struct AdamState {
  std::vector<double> m;  // first moment
  std::vector<double> v;  // second moment
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-3;

  explicit AdamState(std::size_t n = 0, double lr = 1e-3)
      : m(n, 0.0), v(n, 0.0), learning_rate(lr) {}
};

/// In-place Adam update.  Deterministic: identical inputs give bitwise
/// identical outputs.
inline void adam_step(Tensor& params, const std::vector<double>& grads, AdamState& state) {
  SHAASR_CHECK(params.size() == grads.size() && params.size() == state.m.size() &&
                   params.size() == state.v.size(),
               ErrKind::kData,
               "dimension error: adam_step params %zu grads %zu moments %zu/%zu",
               params.size(), grads.size(), state.m.size(), state.v.size());
  state.step += 1;
  double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    double mhat = state.m[i] / b1t;
    double vhat = state.v[i] / b2t;
    params[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
  }
  params.check_finite("adam_step");
}

}  // namespace shaasr

#endif  // SHAASR_ADAM_HPP_
