// tests/support/test_support.hpp

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

// Shared oracles for the test suites.  Everything here recomputes results
// with plain independent loops -- no Tape, no library forward paths -- so it
// can stand as a second opinion against the implementation.

#ifndef SHAASR_TESTS_SUPPORT_TEST_SUPPORT_HPP_
#define SHAASR_TESTS_SUPPORT_TEST_SUPPORT_HPP_

#include <cmath>
#include <random>
#include <vector>

#include "shaasr/gradcheck.hpp"
#include "shaasr/model.hpp"
#include "shaasr/tensor.hpp"

namespace shaasr::testing {

inline Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng,
                            double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> d(lo, hi);
  for (double& v : t.data()) v = d(rng);
  return t;
}

/// Random values bounded away from zero (ReLU kink avoidance for inputs that
/// feed an activation directly).
inline Tensor random_tensor_away_from_zero(std::vector<std::size_t> shape,
                                           std::mt19937_64& rng, double lo = 0.2,
                                           double hi = 1.5) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> mag(lo, hi);
  std::bernoulli_distribution sign(0.5);
  for (double& v : t.data()) v = (sign(rng) ? 1.0 : -1.0) * mag(rng);
  return t;
}

// --- independent dense math -------------------------------------------------

inline std::vector<double> naive_affine(const std::vector<double>& x, const Tensor& w,
                                        const Tensor& b) {
  std::size_t in = w.dim(0), out = w.dim(1);
  std::vector<double> y(out);
  for (std::size_t j = 0; j < out; ++j) {
    double acc = b[j];
    for (std::size_t i = 0; i < in; ++i) acc += x[i] * w.at2(i, j);
    y[j] = acc;
  }
  return y;
}

inline std::vector<double> naive_softmax(const std::vector<double>& v) {
  double m = v[0];
  for (double x : v) m = std::max(m, x);
  std::vector<double> y(v.size());
  double z = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    y[i] = std::exp(v[i] - m);
    z += y[i];
  }
  for (double& x : y) x /= z;
  return y;
}

/// Step-by-step re-computation of the backbone for one chunk, tracking how
/// close any ReLU input came to its kink.
struct NaiveTrace {
  std::vector<std::vector<double>> hidden;  // per frame, post-backbone
  double min_abs_preact = std::numeric_limits<double>::infinity();
};

inline std::vector<double> naive_block(const BlockParams& blk, const std::vector<double>& x,
                                       double* min_abs) {
  auto pre = naive_affine(x, blk.lin.w, blk.lin.b);
  std::vector<double> y = x;
  for (std::size_t i = 0; i < pre.size(); ++i) {
    *min_abs = std::min(*min_abs, std::fabs(pre[i]));
    y[i] += pre[i] > 0.0 ? pre[i] : 0.0;
  }
  return y;
}

inline NaiveTrace naive_backbone(const AffineParams& input_proj,
                                 const std::vector<BlockParams>& blocks,
                                 const Tensor& chunk) {
  NaiveTrace trace;
  std::size_t frames = chunk.dim(0), fd = chunk.dim(1);
  for (std::size_t f = 0; f < frames; ++f) {
    std::vector<double> x(chunk.data().begin() + f * fd, chunk.data().begin() + (f + 1) * fd);
    auto pre = naive_affine(x, input_proj.w, input_proj.b);
    std::vector<double> h(pre.size());
    for (std::size_t i = 0; i < pre.size(); ++i) {
      trace.min_abs_preact = std::min(trace.min_abs_preact, std::fabs(pre[i]));
      h[i] = pre[i] > 0.0 ? pre[i] : 0.0;
    }
    for (const BlockParams& blk : blocks) h = naive_block(blk, h, &trace.min_abs_preact);
    trace.hidden.push_back(std::move(h));
  }
  return trace;
}

inline std::vector<double> naive_tower(const TowerParams& tower, std::vector<double> h,
                                       double* min_abs) {
  for (const BlockParams& blk : tower.blocks) h = naive_block(blk, h, min_abs);
  return naive_affine(h, tower.head.w, tower.head.b);
}

struct NaiveSingleOut {
  std::vector<double> posterior;
  NaiveTrace trace;
};

inline NaiveSingleOut naive_singlehead(const SingleHeadModel& m, const Tensor& chunk) {
  NaiveSingleOut out;
  out.trace = naive_backbone(m.input_proj, m.blocks, chunk);
  auto logits = naive_affine(out.trace.hidden[0], m.head.w, m.head.b);
  out.posterior = naive_softmax(logits);
  return out;
}

struct NaiveShaOut {
  double w_en = 0.0, w_hi = 0.0;
  std::vector<double> logits_en, logits_hi;
  std::vector<double> posterior;
  NaiveTrace trace;
};

inline NaiveShaOut naive_sha(const ShaModel& m, const Tensor& chunk) {
  NaiveShaOut out;
  out.trace = naive_backbone(m.input_proj, m.shared_blocks, chunk);
  // attention: scaled dot-product scores, softmax pooling, affine to 2 logits
  std::size_t frames = out.trace.hidden.size(), hd = m.cfg.hidden_dim;
  std::vector<double> scores(frames);
  double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < hd; ++i) acc += out.trace.hidden[f][i] * m.attention.query[i];
    scores[f] = acc * scale;
  }
  auto alpha = naive_softmax(scores);
  std::vector<double> pooled(hd, 0.0);
  for (std::size_t f = 0; f < frames; ++f)
    for (std::size_t i = 0; i < hd; ++i) pooled[i] += alpha[f] * out.trace.hidden[f][i];
  auto wlogits = naive_affine(pooled, m.attention.proj.w, m.attention.proj.b);
  auto weights = naive_softmax(wlogits);
  out.w_en = weights[0];
  out.w_hi = weights[1];
  double min_abs = out.trace.min_abs_preact;
  out.logits_en = naive_tower(m.tower_en, out.trace.hidden[0], &min_abs);
  out.logits_hi = naive_tower(m.tower_hi, out.trace.hidden[0], &min_abs);
  out.trace.min_abs_preact = min_abs;
  std::vector<double> combined(out.logits_en.size());
  for (std::size_t i = 0; i < combined.size(); ++i)
    combined[i] = out.w_en * out.logits_en[i] + out.w_hi * out.logits_hi[i];
  out.posterior = naive_softmax(combined);
  return out;
}

// --- gradient-check harness ----------------------------------------------------

struct GradCaseResult {
  std::size_t cases = 0;
  double worst_rel_err = 0.0;
};

/// Checks d(loss)/d(probe) for a tape-built scalar loss against central
/// differences.  `build` maps (tape, probe var) -> scalar loss var and must be
/// deterministic.
template <class BuildFn>
GradCaseResult check_gradient(BuildFn&& build, const Tensor& probe, double eps = 1e-5) {
  Tensor p = probe;
  Tape tape;
  Var pv = tape.param(p);
  Var loss = build(tape, pv);
  tape.backward(loss);
  std::vector<double> analytic = p.grad();

  auto f = [&build](const Tensor& x) {
    Tensor copy = x;
    Tape t;
    Var xv = t.leaf(copy);
    return t.val(build(t, xv))[0];
  };
  Tensor numeric = finite_diff_grad(f, probe, eps);
  GradCaseResult r;
  r.cases = 1;
  r.worst_rel_err = max_grad_rel_err(analytic, numeric);
  return r;
}

}  // namespace shaasr::testing

#endif  // SHAASR_TESTS_SUPPORT_TEST_SUPPORT_HPP_
