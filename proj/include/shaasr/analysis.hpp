// shaasr/analysis.hpp

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

#ifndef SHAASR_ANALYSIS_HPP_
#define SHAASR_ANALYSIS_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "shaasr/corpus.hpp"
#include "shaasr/io.hpp"
#include "shaasr/model.hpp"
#include "shaasr/rng.hpp"

namespace shaasr {

/// One per-frame attention-weight observation.
struct WeightSample {
  std::string utterance_id;
  std::size_t frame = 0;
  Lang true_lang = Lang::en;
  double w_en = 0.0;
  double w_hi = 0.0;
};

/// One sample per frame of every utterance; deterministic.
inline std::vector<WeightSample> collect_weights(const ShaModel& model,
                                                 const std::vector<Utterance>& corpus) {
  std::vector<WeightSample> samples;
  for (const Utterance& u : corpus) {
    for (std::size_t f = 0; f < u.num_frames(); ++f) {
      Tensor chunk = make_chunk(u.frames, f, model.cfg.lookahead);
      auto [w_en, w_hi] = attention_weights(model, chunk);
      samples.push_back({u.id, f, u.frame_tags[f], w_en, w_hi});
    }
  }
  return samples;
}

// --- 1-D Gaussian mixture fitting ------------------------------------------------

struct GmmFit {
  std::size_t components = 0;
  std::vector<double> means;
  std::vector<double> variances;
  std::vector<double> weights;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  std::vector<double> ll_trace;  // per-iteration log-likelihood

  /// Component with the largest mixture weight.
  std::size_t dominant() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < weights.size(); ++i)
      if (weights[i] > weights[best]) best = i;
    return best;
  }
};

inline constexpr double kGmmVarianceFloor = 1e-6;

namespace gmm_detail {

inline double log_gauss(double x, double mean, double var) {
  double d = x - mean;
  return -0.5 * (std::log(2.0 * M_PI * var) + d * d / var);
}

/// Log-likelihood of the floored model (the same model EM updates).
inline double total_ll(const std::vector<double>& xs, const GmmFit& f) {
  double ll = 0.0;
  for (double x : xs) {
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(f.components);
    for (std::size_t c = 0; c < f.components; ++c) {
      terms[c] = std::log(f.weights[c]) + log_gauss(x, f.means[c], f.variances[c]);
      m = std::max(m, terms[c]);
    }
    double z = 0.0;
    for (double t : terms) z += std::exp(t - m);
    ll += m + std::log(z);
  }
  return ll;
}

/// k-means++-style seeding: first center uniform, the rest weighted by
/// squared distance to the nearest chosen center.
inline std::vector<double> seed_means(const std::vector<double>& xs, std::size_t k,
                                      std::mt19937_64& rng) {
  std::vector<double> centers;
  std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
  centers.push_back(xs[pick(rng)]);
  while (centers.size() < k) {
    std::vector<double> d2(xs.size());
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (double c : centers) nearest = std::min(nearest, (xs[i] - c) * (xs[i] - c));
      d2[i] = nearest;
      total += nearest;
    }
    if (total <= 0.0) {
      centers.push_back(xs[pick(rng)]);
      continue;
    }
    double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    double acc = 0.0;
    std::size_t chosen = xs.size() - 1;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      acc += d2[i];
      if (u < acc) {
        chosen = i;
        break;
      }
    }
    centers.push_back(xs[chosen]);
  }
  return centers;
}

}  // namespace gmm_detail

/// EM for a 1-D Gaussian mixture with a variance floor.  The floor is part of
/// the constrained M-step, so the log-likelihood trace is non-decreasing.
inline GmmFit fit_gmm_1d(const std::vector<double>& samples, std::size_t k,
                         std::uint64_t seed, double tol = 1e-8,
                         std::size_t max_iter = 200) {
  SHAASR_CHECK(k >= 1, ErrKind::kConfig, "parameter error: k must be >= 1");
  SHAASR_CHECK(samples.size() >= k, ErrKind::kData,
               "data error: %zu samples for %zu components", samples.size(), k);
  auto rng = make_rng(seed);
  GmmFit fit;
  fit.components = k;
  fit.means = gmm_detail::seed_means(samples, k, rng);
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  var = std::max(var / static_cast<double>(samples.size()), kGmmVarianceFloor);
  fit.variances.assign(k, var);
  fit.weights.assign(k, 1.0 / static_cast<double>(k));

  std::size_t n = samples.size();
  std::vector<double> resp(n * k);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    // E-step
    for (std::size_t i = 0; i < n; ++i) {
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        resp[i * k + c] = std::log(fit.weights[c]) +
                          gmm_detail::log_gauss(samples[i], fit.means[c], fit.variances[c]);
        m = std::max(m, resp[i * k + c]);
      }
      double z = 0.0;
      for (std::size_t c = 0; c < k; ++c) z += std::exp(resp[i * k + c] - m);
      double lz = m + std::log(z);
      for (std::size_t c = 0; c < k; ++c) resp[i * k + c] = std::exp(resp[i * k + c] - lz);
    }
    // M-step (variance clipped to the floor)
    for (std::size_t c = 0; c < k; ++c) {
      double nk = 0.0, mu = 0.0;
      for (std::size_t i = 0; i < n; ++i) nk += resp[i * k + c];
      if (nk < 1e-12) continue;  // starved component keeps its parameters
      for (std::size_t i = 0; i < n; ++i) mu += resp[i * k + c] * samples[i];
      mu /= nk;
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        v += resp[i * k + c] * (samples[i] - mu) * (samples[i] - mu);
      v = std::max(v / nk, kGmmVarianceFloor);
      fit.means[c] = mu;
      fit.variances[c] = v;
      fit.weights[c] = nk / static_cast<double>(n);
    }
    double wsum = 0.0;
    for (double w : fit.weights) wsum += w;
    for (double& w : fit.weights) w /= wsum;

    double ll = gmm_detail::total_ll(samples, fit);
    fit.ll_trace.push_back(ll);
    fit.iterations = iter + 1;
    fit.log_likelihood = ll;
    if (iter > 0 && std::fabs(ll - prev_ll) < tol) break;
    prev_ll = ll;
  }
  return fit;
}

/// Best of `restarts` EM runs (seeded independently), by log-likelihood.
inline GmmFit fit_gmm_1d_multistart(const std::vector<double>& samples, std::size_t k,
                                    std::uint64_t seed, std::size_t restarts = 5,
                                    double tol = 1e-8, std::size_t max_iter = 200) {
  SHAASR_CHECK(restarts >= 1, ErrKind::kConfig, "parameter error: restarts must be >= 1");
  GmmFit best;
  for (std::size_t r = 0; r < restarts; ++r) {
    GmmFit f = fit_gmm_1d(samples, k, derive_seed(seed, "gmm.restart", r), tol, max_iter);
    if (f.log_likelihood > best.log_likelihood) best = f;
  }
  return best;
}

// --- exports ---------------------------------------------------------------------

/// CSV `bin_left,bin_right,count` over [0,1]; intervals are right-open except
/// the last, which is closed.
inline void export_histogram(const std::vector<double>& samples, std::size_t bins,
                             const std::filesystem::path& path) {
  SHAASR_CHECK(bins >= 1, ErrKind::kConfig, "parameter error: bins must be >= 1");
  std::vector<std::size_t> counts(bins, 0);
  for (double x : samples) {
    double clamped = std::min(std::max(x, 0.0), 1.0);
    std::size_t b = std::min(static_cast<std::size_t>(clamped * static_cast<double>(bins)),
                             bins - 1);
    counts[b] += 1;
  }
  std::string out = "bin_left,bin_right,count\n";
  for (std::size_t b = 0; b < bins; ++b) {
    double left = static_cast<double>(b) / static_cast<double>(bins);
    double right = static_cast<double>(b + 1) / static_cast<double>(bins);
    out += fmt_double(left, 6) + "," + fmt_double(right, 6) + "," +
           std::to_string(counts[b]) + "\n";
  }
  write_file(path, out);
}

inline void export_weight_samples(const std::vector<WeightSample>& samples,
                                  const std::filesystem::path& path) {
  std::string out = "utterance,frame,lang,w_en,w_hi\n";
  for (const auto& s : samples) {
    out += s.utterance_id + "," + std::to_string(s.frame) + "," + lang_name(s.true_lang) +
           "," + fmt_double(s.w_en, 6) + "," + fmt_double(s.w_hi, 6) + "\n";
  }
  write_file(path, out);
}

inline void export_gmm_fit(const GmmFit& fit, const std::string& label,
                           const std::filesystem::path& path, bool append = false) {
  std::string out;
  if (!append) out = "label,component,weight,mean,variance,log_likelihood,iterations\n";
  for (std::size_t c = 0; c < fit.components; ++c) {
    out += label + "," + std::to_string(c) + "," + fmt_double(fit.weights[c], 6) + "," +
           fmt_double(fit.means[c], 6) + "," + fmt_double(fit.variances[c], 9) + "," +
           fmt_double(fit.log_likelihood, 6) + "," + std::to_string(fit.iterations) + "\n";
  }
  if (append) {
    std::string existing = std::filesystem::exists(path) ? slurp_file(path) : "";
    write_file(path, existing + out);
  } else {
    write_file(path, out);
  }
}

}  // namespace shaasr

#endif  // SHAASR_ANALYSIS_HPP_
