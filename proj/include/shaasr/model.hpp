// shaasr/model.hpp

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

#ifndef SHAASR_MODEL_HPP_
#define SHAASR_MODEL_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "shaasr/autodiff.hpp"
#include "shaasr/numeric.hpp"
#include "shaasr/rng.hpp"
#include "shaasr/tensor.hpp"

namespace shaasr {

enum class Lang : int { en = 0, hi = 1 };

inline const char* lang_name(Lang l) { return l == Lang::en ? "en" : "hi"; }

/// Scaled-down analog of the production setup.  Backbone blocks are plain
/// affine+ReLU with a residual connection; towers hold the language-specific
/// top of the network (split_depth blocks plus one projection head each).
struct ModelConfig {
  std::size_t feature_dim = 16;
  std::size_t num_shared_blocks = 3;  // total backbone depth of the SingleHead
  std::size_t hidden_dim = 32;
  std::size_t num_chenones = 64;      // K, one shared inventory for both languages
  std::size_t split_depth = 0;        // n: blocks carved off the backbone per language
  std::size_t lookahead = 4;          // L: future frames available when scoring frame t

  void validate() const {
    SHAASR_CHECK(feature_dim > 0 && num_shared_blocks > 0 && hidden_dim > 0 &&
                     num_chenones > 0,
                 ErrKind::kConfig, "config error: model dims must be positive");
    SHAASR_CHECK(split_depth <= num_shared_blocks, ErrKind::kConfig,
                 "config error: split_depth %zu > num_shared_blocks %zu", split_depth,
                 num_shared_blocks);
  }
};

struct AffineParams {
  Tensor w;  // [in x out]
  Tensor b;  // [out]

  static AffineParams glorot(std::size_t in, std::size_t out, std::mt19937_64& rng) {
    AffineParams p;
    p.w = Tensor::glorot({in, out}, in, out, rng);
    p.b = Tensor({out});
    return p;
  }
  static AffineParams zeros(std::size_t in, std::size_t out) {
    return AffineParams{Tensor({in, out}), Tensor({out})};
  }
};

/// Residual block: y = x + relu(x W + b).
struct BlockParams {
  AffineParams lin;
};

/// Language tower: split_depth residual blocks plus the projection head
/// (hidden -> K chenone logits).
struct TowerParams {
  std::vector<BlockParams> blocks;
  AffineParams head;
};

/// Self-attention pooling head: one learned query against the chunk's hidden
/// vectors, softmax pooling, then an affine map to one logit per language.
/// The final affine starts at zero so initial weights are exactly (0.5, 0.5).
struct AttentionParams {
  Tensor query;       // [hidden]
  AffineParams proj;  // [hidden x 2]
};

struct SingleHeadModel {
  ModelConfig cfg;
  AffineParams input_proj;          // feature -> hidden
  std::vector<BlockParams> blocks;  // num_shared_blocks
  AffineParams head;                // hidden -> K
};

struct ShaModel {
  ModelConfig cfg;
  AffineParams input_proj;
  std::vector<BlockParams> shared_blocks;  // num_shared_blocks - split_depth
  TowerParams tower_en;
  TowerParams tower_hi;
  AttentionParams attention;
};

// --- construction ----------------------------------------------------------

inline SingleHeadModel make_singlehead(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  auto rng = make_rng(derive_seed(seed, "model.init.single"));
  SingleHeadModel m;
  m.cfg = cfg;
  m.input_proj = AffineParams::glorot(cfg.feature_dim, cfg.hidden_dim, rng);
  for (std::size_t i = 0; i < cfg.num_shared_blocks; ++i)
    m.blocks.push_back({AffineParams::glorot(cfg.hidden_dim, cfg.hidden_dim, rng)});
  m.head = AffineParams::glorot(cfg.hidden_dim, cfg.num_chenones, rng);
  return m;
}

/// Stage-2 conversion: both language towers start as copies of the single
/// tower (the last split_depth blocks plus the head); the remaining backbone
/// is shared as-is.  The attention projection is zero so the initial weights
/// are exactly (0.5, 0.5).
inline ShaModel split_from_single(const SingleHeadModel& single, std::uint64_t seed) {
  const ModelConfig& cfg = single.cfg;
  ShaModel m;
  m.cfg = cfg;
  m.input_proj = single.input_proj;
  std::size_t shared = cfg.num_shared_blocks - cfg.split_depth;
  m.shared_blocks.assign(single.blocks.begin(), single.blocks.begin() + shared);
  TowerParams tower;
  tower.blocks.assign(single.blocks.begin() + shared, single.blocks.end());
  tower.head = single.head;
  m.tower_en = tower;
  m.tower_hi = tower;
  auto rng = make_rng(derive_seed(seed, "model.init.attention"));
  m.attention.query = Tensor::glorot({cfg.hidden_dim}, cfg.hidden_dim, 1, rng);
  m.attention.proj = AffineParams::zeros(cfg.hidden_dim, 2);
  return m;
}

// --- parameter enumeration ---------------------------------------------------

enum class ParamGroup { shared, tower_en, tower_hi, attention };

inline const char* param_group_name(ParamGroup g) {
  switch (g) {
    case ParamGroup::shared: return "shared";
    case ParamGroup::tower_en: return "tower_en";
    case ParamGroup::tower_hi: return "tower_hi";
    case ParamGroup::attention: return "attention";
  }
  return "?";
}

/// Visits every trainable tensor in declaration order: f(group, name, tensor).
template <class Model, class F>
void for_each_param(Model& m, F&& f);

template <class F>
void for_each_param_impl(AffineParams& a, ParamGroup g, const std::string& prefix, F&& f) {
  f(g, prefix + ".w", a.w);
  f(g, prefix + ".b", a.b);
}

template <class F>
void for_each_param(SingleHeadModel& m, F&& f) {
  for_each_param_impl(m.input_proj, ParamGroup::shared, "input_proj", f);
  for (std::size_t i = 0; i < m.blocks.size(); ++i)
    for_each_param_impl(m.blocks[i].lin, ParamGroup::shared, "block." + std::to_string(i), f);
  for_each_param_impl(m.head, ParamGroup::shared, "head", f);
}

template <class F>
void for_each_param(ShaModel& m, F&& f) {
  for_each_param_impl(m.input_proj, ParamGroup::shared, "input_proj", f);
  for (std::size_t i = 0; i < m.shared_blocks.size(); ++i)
    for_each_param_impl(m.shared_blocks[i].lin, ParamGroup::shared,
                        "shared_block." + std::to_string(i), f);
  for (std::size_t i = 0; i < m.tower_en.blocks.size(); ++i)
    for_each_param_impl(m.tower_en.blocks[i].lin, ParamGroup::tower_en,
                        "tower_en.block." + std::to_string(i), f);
  for_each_param_impl(m.tower_en.head, ParamGroup::tower_en, "tower_en.head", f);
  for (std::size_t i = 0; i < m.tower_hi.blocks.size(); ++i)
    for_each_param_impl(m.tower_hi.blocks[i].lin, ParamGroup::tower_hi,
                        "tower_hi.block." + std::to_string(i), f);
  for_each_param_impl(m.tower_hi.head, ParamGroup::tower_hi, "tower_hi.head", f);
  f(ParamGroup::attention, std::string("attention.query"), m.attention.query);
  for_each_param_impl(m.attention.proj, ParamGroup::attention, "attention.proj", f);
}

template <class Model>
std::size_t param_count(const Model& m) {
  std::size_t n = 0;
  for_each_param(const_cast<Model&>(m),
                 [&n](ParamGroup, const std::string&, Tensor& t) { n += t.size(); });
  return n;
}

inline std::size_t param_count(const AffineParams& a) { return a.w.size() + a.b.size(); }

// --- forward passes ----------------------------------------------------------

// The backbone applies per frame; the chunk of lookahead frames exists for the
// attention pooling (and for full-context teacher evaluation).

namespace detail {

inline Var apply_block(Tape& t, BlockParams& blk, Var x) {
  Var wv = t.param(blk.lin.w);
  Var bv = t.param(blk.lin.b);
  return t.add(x, t.relu(t.affine(x, wv, bv)));
}

inline Var apply_affine(Tape& t, AffineParams& a, Var x) {
  return t.affine(x, t.param(a.w), t.param(a.b));
}

/// Shared stack applied to the whole chunk: [N x F] -> [N x H].
inline Var chunk_hidden(Tape& t, AffineParams& input_proj, std::vector<BlockParams>& blocks,
                        const Tensor& chunk) {
  SHAASR_CHECK(chunk.rank() == 2 && chunk.dim(0) >= 1, ErrKind::kData,
               "chunk error: expected [frames x feature_dim], got %s",
               shape_str(chunk).c_str());
  Var h = t.relu(apply_affine(t, input_proj, t.leaf(chunk)));
  for (BlockParams& blk : blocks) h = apply_block(t, blk, h);
  return h;
}

/// Tower applied to a single hidden vector: [H] -> K logits.
inline Var tower_logits(Tape& t, TowerParams& tower, Var h) {
  for (BlockParams& blk : tower.blocks) h = apply_block(t, blk, h);
  return apply_affine(t, tower.head, h);
}

/// Attention pooling over the chunk's shared hidden states -> [2] weights.
inline Var attention_weight_var(Tape& t, AttentionParams& attn, Var hidden_chunk,
                                std::size_t hidden_dim) {
  double scale = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  Var scores = t.dot_rows(hidden_chunk, t.param(attn.query), scale);
  Var alpha = t.softmax_last(scores);
  Var pooled = t.weighted_sum_rows(alpha, hidden_chunk);
  return t.softmax_last(apply_affine(t, attn.proj, pooled));
}

}  // namespace detail

/// Differentiable SingleHead route: chenone logits for the chunk's first
/// frame.  Accepts any chunk length >= 1 (full-context evaluation included).
inline Var singlehead_logits(Tape& t, SingleHeadModel& m, const Tensor& chunk) {
  SHAASR_CHECK(chunk.rank() == 2 && chunk.dim(1) == m.cfg.feature_dim, ErrKind::kData,
               "chunk error: feature dim %s vs model %zu", shape_str(chunk).c_str(),
               m.cfg.feature_dim);
  Var hidden = detail::chunk_hidden(t, m.input_proj, m.blocks, chunk);
  return detail::apply_affine(t, m.head, t.row(hidden, 0));
}

struct ShaForwardVars {
  Var weights;    // [2] (w_en, w_hi)
  Var logits_en;  // [K]
  Var logits_hi;  // [K]
  Var combined;   // [K] = w_en*logits_en + w_hi*logits_hi
};

/// Differentiable SHA route for one chunk.
inline ShaForwardVars sha_forward_vars(Tape& t, ShaModel& m, const Tensor& chunk) {
  SHAASR_CHECK(chunk.rank() == 2 && chunk.dim(1) == m.cfg.feature_dim, ErrKind::kData,
               "chunk error: feature dim %s vs model %zu", shape_str(chunk).c_str(),
               m.cfg.feature_dim);
  Var hidden = detail::chunk_hidden(t, m.input_proj, m.shared_blocks, chunk);
  Var weights = detail::attention_weight_var(t, m.attention, hidden, m.cfg.hidden_dim);
  Var frame0 = t.row(hidden, 0);
  ShaForwardVars out;
  out.weights = weights;
  out.logits_en = detail::tower_logits(t, m.tower_en, frame0);
  out.logits_hi = detail::tower_logits(t, m.tower_hi, frame0);
  out.combined = t.add(t.scalar_mul(t.element(weights, 0), out.logits_en),
                       t.scalar_mul(t.element(weights, 1), out.logits_hi));
  return out;
}

/// Differentiable SplitHead route: selected tower only, attention bypassed.
inline Var splithead_logits(Tape& t, ShaModel& m, const Tensor& chunk, Lang lang) {
  SHAASR_CHECK(chunk.rank() == 2 && chunk.dim(1) == m.cfg.feature_dim, ErrKind::kData,
               "chunk error: feature dim %s vs model %zu", shape_str(chunk).c_str(),
               m.cfg.feature_dim);
  Var hidden = detail::chunk_hidden(t, m.input_proj, m.shared_blocks, chunk);
  Var frame0 = t.row(hidden, 0);
  TowerParams& tower = lang == Lang::en ? m.tower_en : m.tower_hi;
  return detail::tower_logits(t, tower, frame0);
}

// --- spec-surface (streaming) ops: chunk must hold exactly L+1 frames -------

inline void check_streaming_chunk(const ModelConfig& cfg, const Tensor& chunk) {
  SHAASR_CHECK(chunk.rank() == 2 && chunk.dim(0) == cfg.lookahead + 1, ErrKind::kData,
               "chunk error: expected %zu frames (L+1), got %s", cfg.lookahead + 1,
               shape_str(chunk).c_str());
}

/// Posterior over chenones for the chunk's frame t. Chunk must be [L+1 x F].
inline Tensor forward_singlehead(const SingleHeadModel& m, const Tensor& chunk) {
  check_streaming_chunk(m.cfg, chunk);
  Tape t;
  Var logits = singlehead_logits(t, const_cast<SingleHeadModel&>(m), chunk);
  return softmax(t.val(logits));
}

inline Tensor forward_sha(const ShaModel& m, const Tensor& chunk) {
  check_streaming_chunk(m.cfg, chunk);
  Tape t;
  auto fwd = sha_forward_vars(t, const_cast<ShaModel&>(m), chunk);
  return softmax(t.val(fwd.combined));
}

inline Tensor forward_splithead(const ShaModel& m, const Tensor& chunk, Lang lang) {
  check_streaming_chunk(m.cfg, chunk);
  Tape t;
  Var logits = splithead_logits(t, const_cast<ShaModel&>(m), chunk, lang);
  return softmax(t.val(logits));
}

/// Per-frame language weights (w_en, w_hi) for the chunk's frame t; the pair
/// is a 2-way softmax so it sums to 1.
inline std::pair<double, double> attention_weights(const ShaModel& m, const Tensor& chunk) {
  check_streaming_chunk(m.cfg, chunk);
  Tape t;
  auto fwd = sha_forward_vars(t, const_cast<ShaModel&>(m), chunk);
  const Tensor& w = t.val(fwd.weights);
  return {w[0], w[1]};
}

// --- full-context (non-streaming) posteriors --------------------------------

inline Tensor forward_singlehead_ctx(const SingleHeadModel& m, const Tensor& chunk) {
  Tape t;
  Var logits = singlehead_logits(t, const_cast<SingleHeadModel&>(m), chunk);
  return softmax(t.val(logits));
}

inline Tensor forward_sha_ctx(const ShaModel& m, const Tensor& chunk) {
  Tape t;
  auto fwd = sha_forward_vars(t, const_cast<ShaModel&>(m), chunk);
  return softmax(t.val(fwd.combined));
}

inline Tensor forward_splithead_ctx(const ShaModel& m, const Tensor& chunk, Lang lang) {
  Tape t;
  Var logits = splithead_logits(t, const_cast<ShaModel&>(m), chunk, lang);
  return softmax(t.val(logits));
}

// --- utterance-level scanning ------------------------------------------------

/// Per-frame posterior rows; each row sums to 1.
struct Posteriors {
  Tensor probs;  // [T x K]

  std::size_t num_frames() const { return probs.dim(0); }
  std::size_t num_classes() const { return probs.dim(1); }
  const double* frame(std::size_t t) const {
    return probs.data().data() + t * probs.dim(1);
  }
  void validate(double tol = 1e-9) const {
    check_rows_are_distributions(probs, tol, "posteriors");
  }
};

/// Streaming chunk for frame t: frames t..t+L with edge padding at the end.
inline Tensor make_chunk(const Tensor& frames, std::size_t t, std::size_t lookahead) {
  SHAASR_CHECK(frames.rank() == 2 && t < frames.dim(0), ErrKind::kData,
               "chunk error: frame %zu out of range", t);
  std::size_t total = frames.dim(0), d = frames.dim(1);
  Tensor chunk({lookahead + 1, d});
  for (std::size_t i = 0; i <= lookahead; ++i) {
    std::size_t src = std::min(t + i, total - 1);
    std::copy_n(frames.data().data() + src * d, d, chunk.data().data() + i * d);
  }
  return chunk;
}

/// Suffix chunk for frame t: frames t..T-1 (full remaining context).
inline Tensor make_full_context_chunk(const Tensor& frames, std::size_t t) {
  SHAASR_CHECK(frames.rank() == 2 && t < frames.dim(0), ErrKind::kData,
               "chunk error: frame %zu out of range", t);
  std::size_t total = frames.dim(0), d = frames.dim(1);
  Tensor chunk({total - t, d});
  std::copy_n(frames.data().data() + t * d, (total - t) * d, chunk.data().data());
  return chunk;
}

enum class Route { single, sha, head_en, head_hi };

template <class Model>
Tensor frame_posterior(const Model& m, const Tensor& frames, std::size_t t, Route route,
                       bool full_context);

inline Tensor frame_posterior(const SingleHeadModel& m, const Tensor& frames, std::size_t t,
                              Route route, bool full_context) {
  SHAASR_CHECK(route == Route::single, ErrKind::kData,
               "model error: SingleHead model only supports the single route");
  Tensor chunk = full_context ? make_full_context_chunk(frames, t)
                              : make_chunk(frames, t, m.cfg.lookahead);
  return forward_singlehead_ctx(m, chunk);
}

inline Tensor frame_posterior(const ShaModel& m, const Tensor& frames, std::size_t t,
                              Route route, bool full_context) {
  Tensor chunk = full_context ? make_full_context_chunk(frames, t)
                              : make_chunk(frames, t, m.cfg.lookahead);
  switch (route) {
    case Route::sha: return forward_sha_ctx(m, chunk);
    case Route::head_en: return forward_splithead_ctx(m, chunk, Lang::en);
    case Route::head_hi: return forward_splithead_ctx(m, chunk, Lang::hi);
    default:
      SHAASR_THROW(ErrKind::kData, "model error: SHA model cannot run the single route");
  }
}

template <class Model>
Posteriors utterance_posteriors(const Model& m, const Tensor& frames, Route route,
                                bool full_context = false) {
  std::size_t total = frames.dim(0);
  Tensor out({total, m.cfg.num_chenones});
  for (std::size_t t = 0; t < total; ++t) {
    Tensor p = frame_posterior(m, frames, t, route, full_context);
    std::copy_n(p.data().data(), p.size(), out.data().data() + t * m.cfg.num_chenones);
  }
  return Posteriors{std::move(out)};
}

}  // namespace shaasr

#endif  // SHAASR_MODEL_HPP_
