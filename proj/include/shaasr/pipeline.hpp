// shaasr/pipeline.hpp

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

#ifndef SHAASR_PIPELINE_HPP_
#define SHAASR_PIPELINE_HPP_

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "shaasr/analysis.hpp"
#include "shaasr/checkpoint.hpp"
#include "shaasr/config.hpp"
#include "shaasr/corpus.hpp"
#include "shaasr/decoder.hpp"
#include "shaasr/ngram.hpp"
#include "shaasr/trainer.hpp"
#include "shaasr/translit.hpp"

namespace shaasr {

// End-to-end experiment driver.  Runs synth -> stages 1-4 -> distillation ->
// LM build/interpolation -> decoding on the en and hi test sets, and writes a
// trend table shaped like the usual baseline-vs-stages WER comparison.

struct TrendRow {
  std::string no;      // "I".."VII"
  std::string system;  // acoustic model description
  std::string lm;      // "en" or "hinglish"
  double en_wer = 0.0;
  double hi_wer = 0.0;
};

struct PplRow {
  std::string lm;
  std::string testset;
  double perplexity = 0.0;
};

struct TrendReport {
  std::vector<TrendRow> rows;
  std::vector<WerReportRow> detail;
  double hi_head_wer_on_hi = 0.0;  // split model, hi test
  double en_head_wer_on_hi = 0.0;
  std::size_t params_single = 0;
  std::size_t params_sha = 0;
  double overhead_percent = 0.0;
  std::vector<PplRow> ppl;
  // handles for follow-up analysis
  SynthSpec spec;
  ShaModel final_model;
  SingleHeadModel baseline_en;
  std::vector<Utterance> test_en;
  std::vector<Utterance> test_hi;  // references already transliterated
};

namespace pipeline_detail {

inline void write_loss_csv(const TrainLog& log, const std::filesystem::path& path) {
  std::string out = "epoch,batch,loss\n";
  for (const auto& r : log.history)
    out += std::to_string(r.epoch) + "," + std::to_string(r.batch) + "," +
           fmt_double(r.loss, 9) + "\n";
  write_file(path, out);
}

inline void write_text_corpus(const std::vector<std::vector<std::string>>& text,
                              const std::filesystem::path& path) {
  std::string out;
  for (const auto& sentence : text) {
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      if (i) out += ' ';
      out += sentence[i];
    }
    out += '\n';
  }
  write_file(path, out);
}

inline std::vector<std::vector<std::string>> transliterate_text(
    const std::vector<std::vector<std::string>>& text, TranslitProvider& provider) {
  std::vector<std::string> joined;
  joined.reserve(text.size());
  for (const auto& s : text) joined.push_back(join_tokens(s));
  BatchResult batch = provider.transliterate(joined);
  std::vector<std::vector<std::string>> out;
  out.reserve(batch.sentences.size());
  for (const auto& s : batch.sentences) out.push_back(split_ws(s));
  return out;
}

/// hi test references are stored pre-transliterated: WER is computed in Latin
/// space for both languages.
inline void transliterate_references(std::vector<Utterance>* corpus,
                                     const TranslitTable& table) {
  for (Utterance& u : *corpus) {
    for (std::string& w : u.words) {
      if (auto latin = table.lookup(w)) w = *latin;
    }
  }
}

}  // namespace pipeline_detail

inline TrendReport run_reproduce_trend(const RunConfig& cfg,
                                       const std::filesystem::path& out_dir) {
  using namespace pipeline_detail;
  cfg.validate();
  std::uint64_t seed = cfg.seed;
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "config.cfg", cfg.to_text());

  TrendReport report;

  // ---- data -----------------------------------------------------------
  SynthSpec spec = build_synth_spec(cfg.synth, derive_seed(seed, "spec"));
  TrainingData train;
  train.en = synthesize_language(spec, Lang::en, cfg.counts.train_utts_en,
                                 derive_seed(seed, "train.en"));
  train.hi = synthesize_language(spec, Lang::hi, cfg.counts.train_utts_hi,
                                 derive_seed(seed, "train.hi"));
  train.mix = synthesize_codemix(spec, cfg.counts.mix_ratio_hi, cfg.counts.train_utts_mix,
                                 derive_seed(seed, "train.mix"));
  report.test_en = synthesize_language(spec, Lang::en, cfg.counts.test_utts,
                                       derive_seed(seed, "test.en"));
  report.test_hi = synthesize_language(spec, Lang::hi, cfg.counts.test_utts,
                                       derive_seed(seed, "test.hi"));
  transliterate_references(&report.test_hi, spec.translit_table);

  auto corpora_dir = out_dir / "corpora";
  save_corpus(train.en, corpora_dir / "train_en.jsonl");
  save_corpus(train.hi, corpora_dir / "train_hi.jsonl");
  save_corpus(train.mix, corpora_dir / "train_mix.jsonl");
  save_corpus(report.test_en, corpora_dir / "test_en.jsonl");
  save_corpus(report.test_hi, corpora_dir / "test_hi.jsonl");
  save_lexicon(spec.lexicon_en, corpora_dir / "lexicon_en.tsv");
  save_lexicon(spec.lexicon_hi, corpora_dir / "lexicon_hi.tsv");
  save_translit_table(spec.translit_table, corpora_dir / "translit_table.tsv");

  WordTableProvider word_provider(spec.translit_table);
  WordLexicon lexicon_hi_latin = transliterate_lexicon(spec.lexicon_hi, word_provider);
  save_lexicon(lexicon_hi_latin, corpora_dir / "lexicon_hi_translit.tsv");

  // ---- language models ---------------------------------------------------
  auto lm_dir = out_dir / "lm";
  auto en_text = synthesize_text(spec, Lang::en, cfg.counts.lm_train_sentences,
                                 derive_seed(seed, "lm.train.en"));
  auto hi_text_src = synthesize_codemix_text(spec, cfg.counts.lm_hi_corpus_hi_share,
                                             cfg.counts.lm_train_sentences,
                                             derive_seed(seed, "lm.train.hi"));
  auto hi_text = transliterate_text(hi_text_src, word_provider);
  write_text_corpus(en_text, lm_dir / "corpus_en.txt");
  write_text_corpus(hi_text_src, lm_dir / "corpus_hi_source.txt");
  write_text_corpus(hi_text, lm_dir / "corpus_hi_translit.txt");

  auto lm_en = std::make_shared<NGramModel>(
      NGramModel::estimate(count_ngrams(en_text, cfg.lm.order), Smoothing::witten_bell));
  auto lm_hi = std::make_shared<NGramModel>(
      NGramModel::estimate(count_ngrams(hi_text, cfg.lm.order), Smoothing::witten_bell));
  InterpolatedLM lm_interp(lm_en, lm_hi, cfg.lm.lambda_en);
  export_arpa(*lm_en, lm_dir / "en.arpa");
  export_arpa(*lm_hi, lm_dir / "hi_translit.arpa");

  auto en_test_text = synthesize_text(spec, Lang::en, cfg.counts.lm_test_sentences,
                                      derive_seed(seed, "lm.test.en"));
  auto hi_test_text = transliterate_text(
      synthesize_text(spec, Lang::hi, cfg.counts.lm_test_sentences,
                      derive_seed(seed, "lm.test.hi")),
      word_provider);
  report.ppl.push_back({"en", "en", perplexity(*lm_en, en_test_text)});
  report.ppl.push_back({"hinglish", "en", perplexity(lm_interp, en_test_text)});
  report.ppl.push_back({"en", "hi", perplexity(*lm_en, hi_test_text)});
  report.ppl.push_back({"hinglish", "hi", perplexity(lm_interp, hi_test_text)});
  {
    std::string out = "lm,testset,perplexity\n";
    for (const auto& r : report.ppl)
      out += r.lm + "," + r.testset + "," + fmt_double(r.perplexity, 4) + "\n";
    write_file(lm_dir / "perplexity.csv", out);
  }

  // ---- acoustic models -----------------------------------------------------
  auto ckpt_dir = out_dir / "checkpoints";
  auto loss_dir = out_dir / "loss";

  // row I/II acoustic model: en-only baseline
  SingleHeadModel baseline =
      make_singlehead(cfg.model, derive_seed(seed, "model.baseline"));
  {
    StagePlan plan = make_stage_plan(StageId::single, cfg.train.epochs_single,
                                     cfg.train.batch_size, cfg.train.learning_rate);
    plan.data = DataSelector::en_only;
    TrainLog log = train_stage(baseline, train, plan, derive_seed(seed, "stage.baseline"));
    write_loss_csv(log, loss_dir / "baseline_en.csv");
  }
  save_checkpoint(baseline, ckpt_dir / "baseline_en.ckpt");

  // stage 1: data-pooled SingleHead
  SingleHeadModel pooled = make_singlehead(cfg.model, derive_seed(seed, "model.stage1"));
  {
    StagePlan plan = make_stage_plan(StageId::single, cfg.train.epochs_single,
                                     cfg.train.batch_size, cfg.train.learning_rate);
    TrainLog log = train_stage(pooled, train, plan, derive_seed(seed, "stage.single"));
    write_loss_csv(log, loss_dir / "stage1_single.csv");
  }
  save_checkpoint(pooled, ckpt_dir / "stage1_single.ckpt");

  // stage 2: SplitHead
  ShaModel sha = split_from_single(pooled, derive_seed(seed, "model.split"));
  {
    StagePlan plan = make_stage_plan(StageId::split, cfg.train.epochs_split,
                                     cfg.train.batch_size, cfg.train.learning_rate);
    TrainLog log = train_stage(sha, train, plan, derive_seed(seed, "stage.split"));
    write_loss_csv(log, loss_dir / "stage2_split.csv");
  }
  save_checkpoint(sha, ckpt_dir / "stage2_split.ckpt");
  ShaModel split_model = sha;  // row IV snapshot

  // stage 3: attention only
  {
    StagePlan plan = make_stage_plan(StageId::attention_only, cfg.train.epochs_attention,
                                     cfg.train.batch_size, cfg.train.learning_rate);
    TrainLog log = train_stage(sha, train, plan, derive_seed(seed, "stage.attention"));
    write_loss_csv(log, loss_dir / "stage3_attention.csv");
  }
  save_checkpoint(sha, ckpt_dir / "stage3_attention.ckpt");
  ShaModel attn_model = sha;  // row V snapshot

  // stage 4: full model training
  {
    StagePlan plan = make_stage_plan(StageId::full, cfg.train.epochs_full,
                                     cfg.train.batch_size, cfg.train.learning_rate);
    TrainLog log = train_stage(sha, train, plan, derive_seed(seed, "stage.full"));
    write_loss_csv(log, loss_dir / "stage4_full.csv");
  }
  save_checkpoint(sha, ckpt_dir / "stage4_full.ckpt");
  ShaModel full_model = sha;  // row VI snapshot

  // distillation from the ensemble teacher (pooled non-streaming model +
  // frozen SHA snapshot)
  {
    TeacherWeights tw{cfg.distill.teacher_weight_nonstreaming,
                      1.0 - cfg.distill.teacher_weight_nonstreaming};
    TeacherFn teacher = make_ensemble_teacher(pooled, sha, tw);
    DistillConfig dc{cfg.distill.w_kld, tw};
    StagePlan plan = make_stage_plan(StageId::distill, cfg.distill.epochs,
                                     cfg.train.batch_size, cfg.distill.learning_rate);
    TrainLog log = distill(sha, teacher, train, dc, plan, derive_seed(seed, "stage.distill"));
    write_loss_csv(log, loss_dir / "stage5_distill.csv");
  }
  save_checkpoint(sha, ckpt_dir / "distilled.ckpt");

  // ---- parameter accounting -------------------------------------------------
  report.params_single = param_count(pooled);
  report.params_sha = param_count(sha);
  report.overhead_percent = 100.0 *
                            static_cast<double>(report.params_sha - report.params_single) /
                            static_cast<double>(report.params_single);
  {
    std::string out = "model,params\n";
    out += "singlehead," + std::to_string(report.params_single) + "\n";
    out += "sha," + std::to_string(report.params_sha) + "\n";
    out += "overhead_percent," + fmt_double(report.overhead_percent, 4) + "\n";
    write_file(out_dir / "params.csv", out);
  }

  // ---- decoding --------------------------------------------------------------
  WordLexicon union_entries = spec.lexicon_en;
  for (const auto& [w, s] : lexicon_hi_latin) union_entries[w] = s;
  Lexicon lex_en(spec.lexicon_en, cfg.model.num_chenones);
  Lexicon lex_union(union_entries, cfg.model.num_chenones);

  auto post_single = [](const SingleHeadModel& m) {
    return [&m](const Utterance& u) { return utterance_posteriors(m, u.frames, Route::single); };
  };
  auto post_sha = [](const ShaModel& m, Route r) {
    return [&m, r](const Utterance& u) { return utterance_posteriors(m, u.frames, r); };
  };

  auto eval_both = [&](const std::string& system, const PosteriorFn& fn,
                       const Lexicon& lex, const LanguageModel& lm) {
    auto rows_en = evaluate_testset(system, fn, report.test_en, lex, lm, cfg.decode);
    auto rows_hi = evaluate_testset(system, fn, report.test_hi, lex, lm, cfg.decode);
    report.detail.insert(report.detail.end(), rows_en.begin(), rows_en.end());
    report.detail.insert(report.detail.end(), rows_hi.begin(), rows_hi.end());
    return std::pair<double, double>(rows_en.front().wer_percent,
                                     rows_hi.front().wer_percent);
  };

  {
    auto [en_wer, hi_wer] = eval_both("I-en-baseline", post_single(baseline), lex_en, *lm_en);
    report.rows.push_back({"I", "en-baseline", "en", en_wer, hi_wer});
  }
  {
    auto [en_wer, hi_wer] =
        eval_both("II-en-hinglish-lm", post_single(baseline), lex_union, lm_interp);
    report.rows.push_back({"II", "en-baseline", "hinglish", en_wer, hi_wer});
  }
  {
    auto [en_wer, hi_wer] =
        eval_both("III-singlehead", post_single(pooled), lex_union, lm_interp);
    report.rows.push_back({"III", "singlehead", "hinglish", en_wer, hi_wer});
  }
  {
    // row IV: language-matched heads, plus both heads on the hi test
    auto rows_en = evaluate_testset("IV-splithead", post_sha(split_model, Route::head_en),
                                    report.test_en, lex_union, lm_interp, cfg.decode);
    auto rows_hi = evaluate_testset("IV-splithead", post_sha(split_model, Route::head_hi),
                                    report.test_hi, lex_union, lm_interp, cfg.decode);
    auto rows_hi_en_head =
        evaluate_testset("IV-splithead-en-head", post_sha(split_model, Route::head_en),
                         report.test_hi, lex_union, lm_interp, cfg.decode);
    report.detail.insert(report.detail.end(), rows_en.begin(), rows_en.end());
    report.detail.insert(report.detail.end(), rows_hi.begin(), rows_hi.end());
    report.detail.insert(report.detail.end(), rows_hi_en_head.begin(), rows_hi_en_head.end());
    report.hi_head_wer_on_hi = rows_hi.front().wer_percent;
    report.en_head_wer_on_hi = rows_hi_en_head.front().wer_percent;
    report.rows.push_back({"IV", "splithead", "hinglish", rows_en.front().wer_percent,
                           rows_hi.front().wer_percent});
  }
  {
    auto [en_wer, hi_wer] =
        eval_both("V-sha-attn", post_sha(attn_model, Route::sha), lex_union, lm_interp);
    report.rows.push_back({"V", "sha-pretrain-attn", "hinglish", en_wer, hi_wer});
  }
  {
    auto [en_wer, hi_wer] =
        eval_both("VI-sha-full", post_sha(full_model, Route::sha), lex_union, lm_interp);
    report.rows.push_back({"VI", "sha-full", "hinglish", en_wer, hi_wer});
  }
  {
    auto [en_wer, hi_wer] = eval_both("VII-sha-distill", post_sha(sha, Route::sha),
                                      lex_union, lm_interp);
    report.rows.push_back({"VII", "sha-distill", "hinglish", en_wer, hi_wer});
  }

  {
    std::string out = "no,system,lm,en_wer,hi_wer\n";
    for (const auto& r : report.rows)
      out += r.no + "," + r.system + "," + r.lm + "," + fmt_double(r.en_wer, 2) + "," +
             fmt_double(r.hi_wer, 2) + "\n";
    write_file(out_dir / "trend.csv", out);
  }
  write_file(out_dir / "wer_detail.csv", wer_report_csv(report.detail, true));
  {
    std::string out;
    out += "singlehead params: " + std::to_string(report.params_single) + "\n";
    out += "sha params: " + std::to_string(report.params_sha) + "\n";
    out += "sha overhead: " + fmt_double(report.overhead_percent, 2) + "%\n";
    const TrendRow& base = report.rows[0];
    const TrendRow& final_row = report.rows.back();
    if (base.hi_wer > 0.0) {
      out += "hi WER relative reduction (VII vs I): " +
             fmt_double(100.0 * (base.hi_wer - final_row.hi_wer) / base.hi_wer, 2) + "%\n";
    }
    out += "en WER change (VII - I): " + fmt_double(final_row.en_wer - base.en_wer, 2) +
           " absolute\n";
    write_file(out_dir / "summary.txt", out);
  }

  report.spec = std::move(spec);
  report.final_model = std::move(sha);
  report.baseline_en = std::move(baseline);
  return report;
}

}  // namespace shaasr

#endif  // SHAASR_PIPELINE_HPP_
