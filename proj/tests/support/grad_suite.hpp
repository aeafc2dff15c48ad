// tests/support/grad_suite.hpp

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

// The finite-difference gradient sweep shared by the unit tests and the
// acceptance suite: every differentiable op plus the full SHA forward with CE
// loss, on randomized inputs.

#ifndef SHAASR_TESTS_SUPPORT_GRAD_SUITE_HPP_
#define SHAASR_TESTS_SUPPORT_GRAD_SUITE_HPP_

#include <random>

#include "shaasr/autodiff.hpp"
#include "shaasr/model.hpp"
#include "shaasr/rng.hpp"
#include "support/test_support.hpp"

namespace shaasr::testing {

struct GradSuiteReport {
  std::size_t cases = 0;
  double worst_rel_err = 0.0;

  void absorb(const GradCaseResult& r) {
    cases += r.cases;
    worst_rel_err = std::max(worst_rel_err, r.worst_rel_err);
  }
  void absorb(double err) {
    cases += 1;
    worst_rel_err = std::max(worst_rel_err, err);
  }
};

inline Tensor grad_one_hot(int label, std::size_t k) {
  Tensor t({k});
  t[static_cast<std::size_t>(label)] = 1.0;
  return t;
}

/// Full-model check: CE through the SHA forward, finite differences taken
/// over every parameter tensor and the input chunk.
inline double sha_full_model_worst_err(std::uint64_t seed) {
  ModelConfig cfg;
  cfg.feature_dim = 3;
  cfg.num_shared_blocks = 2;
  cfg.hidden_dim = 4;
  cfg.num_chenones = 3;
  cfg.split_depth = 1;
  cfg.lookahead = 2;

  // sample until every ReLU input sits safely away from its kink
  ShaModel model;
  Tensor chunk;
  int label = 0;
  for (std::uint64_t attempt = 0;; ++attempt) {
    auto rng = make_rng(derive_seed(seed, "grad.sha", attempt));
    SingleHeadModel single = make_singlehead(cfg, derive_seed(seed, "grad.sha.m", attempt));
    model = split_from_single(single, derive_seed(seed, "grad.sha.s", attempt));
    // break the tower symmetry and give the attention head nonzero output
    for_each_param(model, [&rng](ParamGroup, const std::string&, Tensor& t) {
      std::uniform_real_distribution<double> d(-0.3, 0.3);
      for (double& v : t.data()) v += d(rng);
    });
    chunk = random_tensor({cfg.lookahead + 1, cfg.feature_dim}, rng, -1.2, 1.2);
    label = static_cast<int>(
        std::uniform_int_distribution<std::size_t>(0, cfg.num_chenones - 1)(rng));
    if (naive_sha(model, chunk).trace.min_abs_preact > 5e-2) break;
  }

  auto forward_loss = [&](const Tensor& input) {
    Tape t;
    auto fwd = sha_forward_vars(t, model, input);
    Var lp = t.log_softmax_last(t.stack_rows({fwd.combined}));
    return t.val(t.cross_entropy_loss(lp, {label}))[0];
  };

  // analytic gradients for all parameters and the input
  for_each_param(model, [](ParamGroup, const std::string&, Tensor& t) {
    t.grad();
    t.zero_grad();
  });
  Tensor chunk_probe = chunk;
  {
    Tape t;
    Var cv = t.param(chunk_probe);
    // same graph as forward_loss but with the chunk as a tape parameter
    Var h = t.relu(t.affine(cv, t.param(model.input_proj.w), t.param(model.input_proj.b)));
    for (auto& blk : model.shared_blocks)
      h = t.add(h, t.relu(t.affine(h, t.param(blk.lin.w), t.param(blk.lin.b))));
    double scale = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim));
    Var scores = t.dot_rows(h, t.param(model.attention.query), scale);
    Var alpha = t.softmax_last(scores);
    Var pooled = t.weighted_sum_rows(alpha, h);
    Var weights = t.softmax_last(
        t.affine(pooled, t.param(model.attention.proj.w), t.param(model.attention.proj.b)));
    Var frame0 = t.row(h, 0);
    auto tower = [&](TowerParams& tp, Var x) {
      for (auto& blk : tp.blocks)
        x = t.add(x, t.relu(t.affine(x, t.param(blk.lin.w), t.param(blk.lin.b))));
      return t.affine(x, t.param(tp.head.w), t.param(tp.head.b));
    };
    Var combined = t.add(t.scalar_mul(t.element(weights, 0), tower(model.tower_en, frame0)),
                         t.scalar_mul(t.element(weights, 1), tower(model.tower_hi, frame0)));
    Var lp = t.log_softmax_last(t.stack_rows({combined}));
    Var loss = t.cross_entropy_loss(lp, {label});
    t.backward(loss);
    // consistency: this hand-built graph must match the library forward
    double lib = forward_loss(chunk);
    SHAASR_CHECK(std::fabs(lib - t.val(loss)[0]) < 1e-12, ErrKind::kData,
                 "grad suite graph does not match the library forward");
  }

  double worst = 0.0;
  const double eps = 1e-5;
  for_each_param(model, [&](ParamGroup, const std::string&, Tensor& p) {
    const auto analytic = p.grad();
    for (std::size_t i = 0; i < p.size(); ++i) {
      double orig = p[i];
      p[i] = orig + eps;
      double fp = forward_loss(chunk);
      p[i] = orig - eps;
      double fm = forward_loss(chunk);
      p[i] = orig;
      worst = std::max(worst, grad_rel_err(analytic[i], (fp - fm) / (2.0 * eps)));
    }
  });
  {
    const auto& analytic = chunk_probe.grad();
    Tensor numeric = finite_diff_grad(forward_loss, chunk, eps);
    worst = std::max(worst, max_grad_rel_err(analytic, numeric));
  }
  return worst;
}

/// Randomized per-op cases plus full-model checks; at least 100 cases total.
inline GradSuiteReport run_gradient_suite(std::uint64_t seed) {
  GradSuiteReport report;

  // affine: gradients w.r.t. input, weights and bias
  for (std::uint64_t i = 0; i < 8; ++i) {
    auto rng = make_rng(derive_seed(seed, "grad.affine", i));
    std::size_t b = 2 + i % 3, in = 2 + i % 4, out = 2 + (i + 1) % 4;
    Tensor x = random_tensor({b, in}, rng);
    Tensor w = random_tensor({in, out}, rng);
    Tensor bias = random_tensor({out}, rng);
    Tensor coeffs = random_tensor({b, out}, rng);
    report.absorb(check_gradient(
        [&](Tape& t, Var xv) {
          return t.weighted_total(t.affine(xv, t.leaf(w), t.leaf(bias)), coeffs);
        },
        x));
    report.absorb(check_gradient(
        [&](Tape& t, Var wv) {
          return t.weighted_total(t.affine(t.leaf(x), wv, t.leaf(bias)), coeffs);
        },
        w));
    report.absorb(check_gradient(
        [&](Tape& t, Var bv) {
          return t.weighted_total(t.affine(t.leaf(x), t.leaf(w), bv), coeffs);
        },
        bias));
  }

  // relu (inputs bounded away from the kink)
  for (std::uint64_t i = 0; i < 8; ++i) {
    auto rng = make_rng(derive_seed(seed, "grad.relu", i));
    Tensor x = random_tensor_away_from_zero({3, 4}, rng);
    Tensor coeffs = random_tensor({3, 4}, rng);
    report.absorb(check_gradient(
        [&](Tape& t, Var xv) { return t.weighted_total(t.relu(xv), coeffs); }, x));
  }

  // softmax and log-softmax over the last axis
  for (std::uint64_t i = 0; i < 10; ++i) {
    auto rng = make_rng(derive_seed(seed, "grad.softmax", i));
    Tensor x = random_tensor({2, 3 + i % 3}, rng, -2.0, 2.0);
    Tensor coeffs = random_tensor(x.shape(), rng);
    report.absorb(check_gradient(
        [&](Tape& t, Var xv) { return t.weighted_total(t.softmax_last(xv), coeffs); }, x));
    report.absorb(check_gradient(
        [&](Tape& t, Var xv) { return t.weighted_total(t.log_softmax_last(xv), coeffs); },
        x));
  }

  // cross-entropy through log-softmax on raw logits
  for (std::uint64_t i = 0; i < 10; ++i) {
    auto rng = make_rng(derive_seed(seed, "grad.ce", i));
    std::size_t b = 2 + i % 3, k = 3 + i % 4;
    Tensor logits = random_tensor({b, k}, rng, -2.0, 2.0);
    std::vector<int> labels(b);
    for (auto& l : labels)
      l = static_cast<int>(std::uniform_int_distribution<std::size_t>(0, k - 1)(rng));
    report.absorb(check_gradient(
        [&](Tape& t, Var xv) {
          return t.cross_entropy_loss(t.log_softmax_last(xv), labels);
        },
        logits));
  }

  // KL divergence w.r.t. student logits
  for (std::uint64_t i = 0; i < 10; ++i) {
    auto rng = make_rng(derive_seed(seed, "grad.kl", i));
    std::size_t b = 2, k = 3 + i % 4;
    Tensor logits = random_tensor({b, k}, rng, -2.0, 2.0);
    Tensor teacher_logits = random_tensor({b, k}, rng, -2.0, 2.0);
    Tensor teacher = softmax(teacher_logits);
    report.absorb(check_gradient(
        [&](Tape& t, Var xv) { return t.kl_loss(teacher, t.log_softmax_last(xv)); },
        logits));
  }

  // attention-pooling pieces: dot_rows and weighted_sum_rows
  for (std::uint64_t i = 0; i < 8; ++i) {
    auto rng = make_rng(derive_seed(seed, "grad.pool", i));
    std::size_t n = 3 + i % 3, d = 4;
    Tensor m = random_tensor({n, d}, rng);
    Tensor q = random_tensor({d}, rng);
    Tensor a = random_tensor({n}, rng);
    Tensor cn = random_tensor({n}, rng);
    Tensor cd = random_tensor({d}, rng);
    report.absorb(check_gradient(
        [&](Tape& t, Var mv) { return t.weighted_total(t.dot_rows(mv, t.leaf(q), 0.5), cn); },
        m));
    report.absorb(check_gradient(
        [&](Tape& t, Var qv) { return t.weighted_total(t.dot_rows(t.leaf(m), qv, 0.5), cn); },
        q));
    report.absorb(check_gradient(
        [&](Tape& t, Var av) {
          return t.weighted_total(t.weighted_sum_rows(av, t.leaf(m)), cd);
        },
        a));
    report.absorb(check_gradient(
        [&](Tape& t, Var mv) {
          return t.weighted_total(t.weighted_sum_rows(t.leaf(a), mv), cd);
        },
        m));
  }

  // scalar combination ops
  for (std::uint64_t i = 0; i < 6; ++i) {
    auto rng = make_rng(derive_seed(seed, "grad.scalar", i));
    Tensor s = random_tensor({2}, rng, 0.2, 1.0);
    Tensor v = random_tensor({5}, rng);
    Tensor cv = random_tensor({5}, rng);
    report.absorb(check_gradient(
        [&](Tape& t, Var sv) {
          Var scaled = t.scalar_mul(t.element(sv, 0), t.leaf(v));
          Var scaled2 = t.scalar_mul(t.element(sv, 1), t.leaf(v));
          return t.weighted_total(t.add(scaled, scaled2), cv);
        },
        s));
    report.absorb(check_gradient(
        [&](Tape& t, Var vv) {
          Var st = t.leaf(s);
          Var sum = t.add(t.scalar_mul(t.element(st, 0), vv),
                          t.scalar_mul(t.element(st, 1), vv));
          return t.weighted_total(sum, cv);
        },
        v));
  }

  // full SHA model + CE
  for (std::uint64_t i = 0; i < 6; ++i)
    report.absorb(sha_full_model_worst_err(derive_seed(seed, "grad.full", i)));

  return report;
}

}  // namespace shaasr::testing

#endif  // SHAASR_TESTS_SUPPORT_GRAD_SUITE_HPP_
