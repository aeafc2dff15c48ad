// shaasr/trainer.hpp

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

#ifndef SHAASR_TRAINER_HPP_
#define SHAASR_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "shaasr/adam.hpp"
#include "shaasr/autodiff.hpp"
#include "shaasr/corpus.hpp"
#include "shaasr/model.hpp"
#include "shaasr/rng.hpp"

namespace shaasr {

enum class StageId { single, split, attention_only, full, distill };

inline const char* stage_name(StageId s) {
  switch (s) {
    case StageId::single: return "single";
    case StageId::split: return "split";
    case StageId::attention_only: return "attention_only";
    case StageId::full: return "full";
    case StageId::distill: return "distill";
  }
  return "?";
}

enum class DataSelector { en_only, hi_only, pooled, pooled_mix };

/// true = parameter group is updated by the optimizer.
struct FreezeMask {
  bool shared = true;
  bool tower_en = true;
  bool tower_hi = true;
  bool attention = true;

  bool allows(ParamGroup g) const {
    switch (g) {
      case ParamGroup::shared: return shared;
      case ParamGroup::tower_en: return tower_en;
      case ParamGroup::tower_hi: return tower_hi;
      case ParamGroup::attention: return attention;
    }
    return false;
  }
  bool operator==(const FreezeMask&) const = default;
};

struct StagePlan {
  StageId id = StageId::single;
  std::size_t epochs = 5;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  FreezeMask update;
  DataSelector data = DataSelector::pooled;

  void validate() const {
    SHAASR_CHECK(epochs >= 1 && batch_size >= 1 && learning_rate > 0.0, ErrKind::kConfig,
                 "plan error: epochs/batch_size/learning_rate out of range");
    switch (id) {
      case StageId::single:
        SHAASR_CHECK(update.shared, ErrKind::kConfig,
                     "plan error: single stage trains the shared group");
        break;
      case StageId::split:
        SHAASR_CHECK(update.shared && update.tower_en && update.tower_hi && !update.attention,
                     ErrKind::kConfig,
                     "plan error: split stage trains shared+towers, attention untouched");
        SHAASR_CHECK(data == DataSelector::pooled || data == DataSelector::en_only ||
                         data == DataSelector::hi_only,
                     ErrKind::kConfig,
                     "plan error: split stage needs language-tagged batches (no mix)");
        break;
      case StageId::attention_only:
        SHAASR_CHECK(!update.shared && !update.tower_en && !update.tower_hi && update.attention,
                     ErrKind::kConfig,
                     "plan error: attention_only stage updates only the attention head");
        break;
      case StageId::full:
      case StageId::distill:
        SHAASR_CHECK(update.shared && update.tower_en && update.tower_hi && update.attention,
                     ErrKind::kConfig, "plan error: %s stage updates the whole model",
                     stage_name(id));
        break;
    }
  }
};

/// Fills the stage-appropriate freeze mask and data selector.
inline StagePlan make_stage_plan(StageId id, std::size_t epochs, std::size_t batch_size,
                                 double learning_rate) {
  StagePlan p;
  p.id = id;
  p.epochs = epochs;
  p.batch_size = batch_size;
  p.learning_rate = learning_rate;
  switch (id) {
    case StageId::single:
      p.data = DataSelector::pooled;
      break;
    case StageId::split:
      p.update.attention = false;
      p.data = DataSelector::pooled;
      break;
    case StageId::attention_only:
      p.update = FreezeMask{false, false, false, true};
      p.data = DataSelector::pooled_mix;
      break;
    case StageId::full:
    case StageId::distill:
      p.data = DataSelector::pooled_mix;
      break;
  }
  p.validate();
  return p;
}

struct TrainingData {
  std::vector<Utterance> en;
  std::vector<Utterance> hi;
  std::vector<Utterance> mix;
};

struct LossRecord {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  double loss = 0.0;
};

struct TrainLog {
  std::vector<LossRecord> history;

  double first_loss() const { return history.empty() ? 0.0 : history.front().loss; }
  double last_loss() const { return history.empty() ? 0.0 : history.back().loss; }
};

// --- batching ------------------------------------------------------------------

struct Sample {
  const Utterance* utt = nullptr;
  std::size_t frame = 0;
};

/// Language-homogeneous minibatch; `group` is "en", "hi" or "mix".
struct Minibatch {
  std::string group;
  std::vector<Sample> samples;
};

namespace train_detail {

inline void push_group(const std::vector<Utterance>& utts, const char* group,
                       std::size_t batch_size, std::mt19937_64& rng,
                       std::vector<Minibatch>* out) {
  std::vector<Sample> samples;
  for (const Utterance& u : utts)
    for (std::size_t f = 0; f < u.num_frames(); ++f) samples.push_back({&u, f});
  std::shuffle(samples.begin(), samples.end(), rng);
  for (std::size_t i = 0; i < samples.size(); i += batch_size) {
    Minibatch b;
    b.group = group;
    for (std::size_t j = i; j < std::min(i + batch_size, samples.size()); ++j)
      b.samples.push_back(samples[j]);
    out->push_back(std::move(b));
  }
}

inline std::vector<Minibatch> make_batches(const TrainingData& data, DataSelector sel,
                                           std::size_t batch_size, std::mt19937_64& rng) {
  std::vector<Minibatch> batches;
  if (sel == DataSelector::en_only || sel == DataSelector::pooled ||
      sel == DataSelector::pooled_mix)
    push_group(data.en, "en", batch_size, rng, &batches);
  if (sel == DataSelector::hi_only || sel == DataSelector::pooled ||
      sel == DataSelector::pooled_mix)
    push_group(data.hi, "hi", batch_size, rng, &batches);
  if (sel == DataSelector::pooled_mix) push_group(data.mix, "mix", batch_size, rng, &batches);
  SHAASR_CHECK(!batches.empty(), ErrKind::kData, "data error: no training data selected");
  std::shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

}  // namespace train_detail

// --- optimizer over named parameters ----------------------------------------------

template <class Model>
class ModelOptimizer {
 public:
  explicit ModelOptimizer(double learning_rate) : lr_(learning_rate) {}

  /// Adam-steps every group the mask allows, using the accumulated grads.
  void step(Model& m, const FreezeMask& mask) {
    for_each_param(m, [this, &mask](ParamGroup g, const std::string& name, Tensor& t) {
      if (!mask.allows(g)) return;
      auto [it, inserted] = states_.try_emplace(name, AdamState(t.size(), lr_));
      adam_step(t, t.grad(), it->second);
    });
  }

 private:
  double lr_;
  std::map<std::string, AdamState> states_;
};

template <class Model>
void zero_model_grads(Model& m) {
  for_each_param(m, [](ParamGroup, const std::string&, Tensor& t) {
    t.grad();  // ensure allocated
    t.zero_grad();
  });
}

// --- batch losses ------------------------------------------------------------------

/// Mean CE over the batch through the requested route; differentiable.
inline Var batch_ce_loss(Tape& tape, SingleHeadModel& m, const std::vector<Sample>& samples) {
  std::vector<Var> rows;
  std::vector<int> labels;
  for (const Sample& s : samples) {
    Tensor chunk = make_chunk(s.utt->frames, s.frame, m.cfg.lookahead);
    rows.push_back(singlehead_logits(tape, m, chunk));
    labels.push_back(s.utt->labels[s.frame]);
  }
  Var lp = tape.log_softmax_last(tape.stack_rows(rows));
  return tape.cross_entropy_loss(lp, std::move(labels));
}

inline Var batch_ce_loss(Tape& tape, ShaModel& m, const std::vector<Sample>& samples,
                         Route route) {
  std::vector<Var> rows;
  std::vector<int> labels;
  for (const Sample& s : samples) {
    Tensor chunk = make_chunk(s.utt->frames, s.frame, m.cfg.lookahead);
    switch (route) {
      case Route::sha: rows.push_back(sha_forward_vars(tape, m, chunk).combined); break;
      case Route::head_en: rows.push_back(splithead_logits(tape, m, chunk, Lang::en)); break;
      case Route::head_hi: rows.push_back(splithead_logits(tape, m, chunk, Lang::hi)); break;
      default:
        SHAASR_THROW(ErrKind::kData, "model error: SHA batch cannot use the single route");
    }
    labels.push_back(s.utt->labels[s.frame]);
  }
  Var lp = tape.log_softmax_last(tape.stack_rows(rows));
  return tape.cross_entropy_loss(lp, std::move(labels));
}

// --- stage training -----------------------------------------------------------------

/// Stage 1: SingleHead CE training on pooled data.
inline TrainLog train_stage(SingleHeadModel& model, const TrainingData& data,
                            const StagePlan& plan, std::uint64_t seed) {
  plan.validate();
  SHAASR_CHECK(plan.id == StageId::single, ErrKind::kConfig,
               "plan error: stage %s needs the SHA form", stage_name(plan.id));
  ModelOptimizer<SingleHeadModel> opt(plan.learning_rate);
  TrainLog log;
  for (std::size_t epoch = 0; epoch < plan.epochs; ++epoch) {
    auto rng = make_rng(derive_seed(seed, "train.single.epoch", epoch));
    auto batches = train_detail::make_batches(data, plan.data, plan.batch_size, rng);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      zero_model_grads(model);
      Tape tape;
      Var loss = batch_ce_loss(tape, model, batches[b].samples);
      tape.backward(loss);
      opt.step(model, plan.update);
      log.history.push_back({epoch, b, tape.val(loss)[0]});
    }
  }
  return log;
}

/// Stages 2-4 on the SHA form.  In the split stage each language-homogeneous
/// batch routes CE through the matching tower (attention bypassed); the
/// attention_only and full stages use the full SHA forward.
inline TrainLog train_stage(ShaModel& model, const TrainingData& data, const StagePlan& plan,
                            std::uint64_t seed) {
  plan.validate();
  SHAASR_CHECK(plan.id == StageId::split || plan.id == StageId::attention_only ||
                   plan.id == StageId::full,
               ErrKind::kConfig, "plan error: stage %s does not run on the SHA form",
               stage_name(plan.id));
  ModelOptimizer<ShaModel> opt(plan.learning_rate);
  TrainLog log;
  for (std::size_t epoch = 0; epoch < plan.epochs; ++epoch) {
    auto rng = make_rng(derive_seed(seed, "train.sha.epoch", epoch));
    auto batches = train_detail::make_batches(data, plan.data, plan.batch_size, rng);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const Minibatch& batch = batches[b];
      Route route = Route::sha;
      if (plan.id == StageId::split) {
        SHAASR_CHECK(batch.group != "mix", ErrKind::kData,
                     "plan error: split stage cannot take mix batches");
        route = batch.group == "en" ? Route::head_en : Route::head_hi;
      }
      zero_model_grads(model);
      Tape tape;
      Var loss = batch_ce_loss(tape, model, batch.samples, route);
      tape.backward(loss);
      opt.step(model, plan.update);
      log.history.push_back({epoch, b, tape.val(loss)[0]});
    }
  }
  return log;
}

// --- ensemble teacher and distillation ------------------------------------------------

struct TeacherWeights {
  double non_streaming = 0.4;
  double sha_student = 0.6;

  void validate() const {
    SHAASR_CHECK(non_streaming >= 0.0 && sha_student >= 0.0 &&
                     std::fabs(non_streaming + sha_student - 1.0) <= 1e-12,
                 ErrKind::kConfig, "config error: teacher weights must sum to 1");
  }
};

struct DistillConfig {
  double w_kld = 0.95;
  TeacherWeights teacher;

  void validate() const {
    SHAASR_CHECK(w_kld >= 0.0 && w_kld <= 1.0, ErrKind::kConfig,
                 "config error: w_kld must lie in [0,1]");
    teacher.validate();
  }
};

/// Probability-space convex combination of the full-context model and the
/// streaming SHA model for one frame.
inline Tensor ensemble_teacher(const SingleHeadModel& non_streaming, const ShaModel& sha,
                               const TeacherWeights& weights,
                               const Tensor& chunk_full_context,
                               const Tensor& chunk_streaming) {
  weights.validate();
  SHAASR_CHECK(non_streaming.cfg.num_chenones == sha.cfg.num_chenones, ErrKind::kData,
               "inventory error: teacher K=%zu vs student K=%zu",
               non_streaming.cfg.num_chenones, sha.cfg.num_chenones);
  Tensor p_ns = forward_singlehead_ctx(non_streaming, chunk_full_context);
  Tensor p_sha = forward_sha(sha, chunk_streaming);
  Tensor out = p_ns;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = weights.non_streaming * p_ns[i] + weights.sha_student * p_sha[i];
  return out;
}

/// Per-frame teacher distribution supplier.
using TeacherFn = std::function<Tensor(const Utterance&, std::size_t)>;

/// Builds the paper-style ensemble teacher from a non-streaming data-pooled
/// model and a frozen snapshot of the SHA student.
inline TeacherFn make_ensemble_teacher(SingleHeadModel non_streaming, ShaModel sha_snapshot,
                                       TeacherWeights weights) {
  weights.validate();
  auto ns = std::make_shared<SingleHeadModel>(std::move(non_streaming));
  auto sha = std::make_shared<ShaModel>(std::move(sha_snapshot));
  return [ns, sha, weights](const Utterance& u, std::size_t frame) {
    Tensor full = make_full_context_chunk(u.frames, frame);
    Tensor stream = make_chunk(u.frames, frame, sha->cfg.lookahead);
    return ensemble_teacher(*ns, *sha, weights, full, stream);
  };
}

/// Differentiable distillation loss for one batch:
/// (1 - w_kld) * CE(labels) + w_kld * KL(teacher || student).
inline Var batch_distill_loss(Tape& tape, ShaModel& student, const TeacherFn& teacher,
                              const std::vector<Sample>& samples, const DistillConfig& cfg) {
  std::vector<Var> rows;
  std::vector<int> labels;
  Tensor teacher_probs({samples.size(), student.cfg.num_chenones});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    Tensor chunk = make_chunk(s.utt->frames, s.frame, student.cfg.lookahead);
    rows.push_back(sha_forward_vars(tape, student, chunk).combined);
    labels.push_back(s.utt->labels[s.frame]);
    Tensor t = teacher(*s.utt, s.frame);
    SHAASR_CHECK(t.size() == student.cfg.num_chenones, ErrKind::kData,
                 "inventory error: teacher emitted %zu classes, student has %zu", t.size(),
                 student.cfg.num_chenones);
    std::copy_n(t.data().data(), t.size(),
                teacher_probs.data().data() + i * student.cfg.num_chenones);
  }
  check_rows_are_distributions(teacher_probs, 1e-6, "teacher");
  Var lp = tape.log_softmax_last(tape.stack_rows(rows));
  Var ce = tape.cross_entropy_loss(lp, std::move(labels));
  Var kld = tape.kl_loss(std::move(teacher_probs), lp);
  return tape.add_scaled(ce, 1.0 - cfg.w_kld, kld, cfg.w_kld);
}

/// Teacher-student finetuning of the SHA student; gradients flow only into
/// the student.
inline TrainLog distill(ShaModel& student, const TeacherFn& teacher, const TrainingData& data,
                        const DistillConfig& cfg, const StagePlan& plan, std::uint64_t seed) {
  cfg.validate();
  plan.validate();
  SHAASR_CHECK(plan.id == StageId::distill, ErrKind::kConfig,
               "plan error: distill() needs a distill-stage plan, got %s",
               stage_name(plan.id));
  ModelOptimizer<ShaModel> opt(plan.learning_rate);
  TrainLog log;
  for (std::size_t epoch = 0; epoch < plan.epochs; ++epoch) {
    auto rng = make_rng(derive_seed(seed, "train.distill.epoch", epoch));
    auto batches = train_detail::make_batches(data, plan.data, plan.batch_size, rng);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      zero_model_grads(student);
      Tape tape;
      Var loss = batch_distill_loss(tape, student, teacher, batches[b].samples, cfg);
      tape.backward(loss);
      opt.step(student, plan.update);
      log.history.push_back({epoch, b, tape.val(loss)[0]});
    }
  }
  return log;
}

// --- frame accuracy -------------------------------------------------------------------

struct FrameAccuracy {
  std::size_t total = 0, correct = 0;
  std::size_t en_total = 0, en_correct = 0;
  std::size_t hi_total = 0, hi_correct = 0;

  double overall() const { return total ? static_cast<double>(correct) / total : 0.0; }
  double en() const { return en_total ? static_cast<double>(en_correct) / en_total : 0.0; }
  double hi() const { return hi_total ? static_cast<double>(hi_correct) / hi_total : 0.0; }
};

/// Accuracy of argmax posteriors against frame labels, bucketed by the true
/// frame language.  The posterior supplier makes oracle stubs testable.
inline FrameAccuracy evaluate_frame_accuracy_with(
    const std::function<Posteriors(const Utterance&)>& posteriors_fn,
    std::span<const Utterance> corpus) {
  SHAASR_CHECK(!corpus.empty(), ErrKind::kData, "data error: empty accuracy corpus");
  FrameAccuracy acc;
  for (const Utterance& u : corpus) {
    Posteriors post = posteriors_fn(u);
    for (std::size_t f = 0; f < u.num_frames(); ++f) {
      const double* row = post.frame(f);
      std::size_t argmax = 0;
      for (std::size_t k = 1; k < post.num_classes(); ++k)
        if (row[k] > row[argmax]) argmax = k;
      bool hit = static_cast<int>(argmax) == u.labels[f];
      acc.total += 1;
      acc.correct += hit;
      if (u.frame_tags[f] == Lang::en) {
        acc.en_total += 1;
        acc.en_correct += hit;
      } else {
        acc.hi_total += 1;
        acc.hi_correct += hit;
      }
    }
  }
  return acc;
}

template <class Model>
FrameAccuracy evaluate_frame_accuracy(const Model& m, std::span<const Utterance> corpus,
                                      Route route) {
  return evaluate_frame_accuracy_with(
      [&m, route](const Utterance& u) { return utterance_posteriors(m, u.frames, route); },
      corpus);
}

}  // namespace shaasr

#endif  // SHAASR_TRAINER_HPP_
