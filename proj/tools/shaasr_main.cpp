// tools/shaasr_main.cpp

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

// Bilingual ASR workbench: synthetic bilingual corpora, split-head acoustic
// models with attention-weighted language heads, n-gram LM interpolation,
// transliteration pipelines and a toy hybrid decoder.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "shaasr/analysis.hpp"
#include "shaasr/checkpoint.hpp"
#include "shaasr/config.hpp"
#include "shaasr/corpus.hpp"
#include "shaasr/decoder.hpp"
#include "shaasr/http_transport.hpp"
#include "shaasr/ngram.hpp"
#include "shaasr/pipeline.hpp"
#include "shaasr/trainer.hpp"
#include "shaasr/translit.hpp"

namespace fs = std::filesystem;
using namespace shaasr;

namespace {

RunConfig load_config(const std::string& config_path, std::optional<std::uint64_t> seed) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
  if (seed) cfg.seed = *seed;
  cfg.validate();
  return cfg;
}

std::vector<std::vector<std::string>> load_text_corpus(const fs::path& path) {
  std::vector<std::vector<std::string>> out;
  for (const auto& line : read_lines(path)) {
    auto toks = tokenize(line);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  SHAASR_CHECK(!out.empty(), ErrKind::kData, "data error: empty text corpus %s",
               path.string().c_str());
  return out;
}

TrainingData load_training_data(const fs::path& data_dir) {
  TrainingData d;
  d.en = load_corpus(data_dir / "train_en.jsonl");
  d.hi = load_corpus(data_dir / "train_hi.jsonl");
  if (fs::exists(data_dir / "train_mix.jsonl"))
    d.mix = load_corpus(data_dir / "train_mix.jsonl");
  return d;
}

Posteriors oracle_posteriors(const Utterance& u, std::size_t num_chenones) {
  Tensor p({u.num_frames(), num_chenones});
  for (std::size_t f = 0; f < u.num_frames(); ++f)
    p.at2(f, static_cast<std::size_t>(u.labels[f])) = 1.0;
  return Posteriors{std::move(p)};
}

int do_synth(const RunConfig& cfg, const fs::path& out_dir) {
  SynthSpec spec = build_synth_spec(cfg.synth, derive_seed(cfg.seed, "spec"));
  auto train_en = synthesize_language(spec, Lang::en, cfg.counts.train_utts_en,
                                      derive_seed(cfg.seed, "train.en"));
  auto train_hi = synthesize_language(spec, Lang::hi, cfg.counts.train_utts_hi,
                                      derive_seed(cfg.seed, "train.hi"));
  auto train_mix = synthesize_codemix(spec, cfg.counts.mix_ratio_hi,
                                      cfg.counts.train_utts_mix,
                                      derive_seed(cfg.seed, "train.mix"));
  auto test_en = synthesize_language(spec, Lang::en, cfg.counts.test_utts,
                                     derive_seed(cfg.seed, "test.en"));
  auto test_hi = synthesize_language(spec, Lang::hi, cfg.counts.test_utts,
                                     derive_seed(cfg.seed, "test.hi"));
  for (Utterance& u : test_hi)
    for (std::string& w : u.words)
      if (auto latin = spec.translit_table.lookup(w)) w = *latin;
  save_corpus(train_en, out_dir / "train_en.jsonl");
  save_corpus(train_hi, out_dir / "train_hi.jsonl");
  save_corpus(train_mix, out_dir / "train_mix.jsonl");
  save_corpus(test_en, out_dir / "test_en.jsonl");
  save_corpus(test_hi, out_dir / "test_hi.jsonl");
  save_lexicon(spec.lexicon_en, out_dir / "lexicon_en.tsv");
  save_lexicon(spec.lexicon_hi, out_dir / "lexicon_hi.tsv");
  WordTableProvider provider(spec.translit_table);
  save_lexicon(transliterate_lexicon(spec.lexicon_hi, provider),
               out_dir / "lexicon_hi_translit.tsv");
  save_translit_table(spec.translit_table, out_dir / "translit_table.tsv");
  write_file(out_dir / "config.cfg", cfg.to_text());
  std::printf("synth: wrote corpora and lexicons to %s\n", out_dir.string().c_str());
  return 0;
}

int do_train(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out_dir) {
  TrainingData data = load_training_data(data_dir);
  write_file(out_dir / "config.cfg", cfg.to_text());

  SingleHeadModel single = make_singlehead(cfg.model, derive_seed(cfg.seed, "model.stage1"));
  {
    StagePlan plan = make_stage_plan(StageId::single, cfg.train.epochs_single,
                                     cfg.train.batch_size, cfg.train.learning_rate);
    auto log = train_stage(single, data, plan, derive_seed(cfg.seed, "stage.single"));
    pipeline_detail::write_loss_csv(log, out_dir / "loss" / "stage1_single.csv");
  }
  save_checkpoint(single, out_dir / "checkpoints" / "stage1_single.ckpt");

  ShaModel sha = split_from_single(single, derive_seed(cfg.seed, "model.split"));
  {
    StagePlan plan = make_stage_plan(StageId::split, cfg.train.epochs_split,
                                     cfg.train.batch_size, cfg.train.learning_rate);
    auto log = train_stage(sha, data, plan, derive_seed(cfg.seed, "stage.split"));
    pipeline_detail::write_loss_csv(log, out_dir / "loss" / "stage2_split.csv");
  }
  save_checkpoint(sha, out_dir / "checkpoints" / "stage2_split.ckpt");
  {
    StagePlan plan = make_stage_plan(StageId::attention_only, cfg.train.epochs_attention,
                                     cfg.train.batch_size, cfg.train.learning_rate);
    auto log = train_stage(sha, data, plan, derive_seed(cfg.seed, "stage.attention"));
    pipeline_detail::write_loss_csv(log, out_dir / "loss" / "stage3_attention.csv");
  }
  save_checkpoint(sha, out_dir / "checkpoints" / "stage3_attention.ckpt");
  {
    StagePlan plan = make_stage_plan(StageId::full, cfg.train.epochs_full,
                                     cfg.train.batch_size, cfg.train.learning_rate);
    auto log = train_stage(sha, data, plan, derive_seed(cfg.seed, "stage.full"));
    pipeline_detail::write_loss_csv(log, out_dir / "loss" / "stage4_full.csv");
  }
  save_checkpoint(sha, out_dir / "checkpoints" / "stage4_full.ckpt");

  std::size_t p_single = param_count(single), p_sha = param_count(sha);
  std::printf("train: singlehead params %zu, sha params %zu, overhead %.2f%%\n", p_single,
              p_sha, 100.0 * static_cast<double>(p_sha - p_single) /
                         static_cast<double>(p_single));
  return 0;
}

int do_distill(const RunConfig& cfg, const fs::path& data_dir, const fs::path& student_path,
               const fs::path& teacher_single_path, const fs::path& out_dir) {
  TrainingData data = load_training_data(data_dir);
  ShaModel student = load_checkpoint<ShaModel>(student_path);
  SingleHeadModel teacher_single = load_checkpoint<SingleHeadModel>(teacher_single_path);
  TeacherWeights tw{cfg.distill.teacher_weight_nonstreaming,
                    1.0 - cfg.distill.teacher_weight_nonstreaming};
  TeacherFn teacher = make_ensemble_teacher(teacher_single, student, tw);
  DistillConfig dc{cfg.distill.w_kld, tw};
  StagePlan plan = make_stage_plan(StageId::distill, cfg.distill.epochs,
                                   cfg.train.batch_size, cfg.distill.learning_rate);
  auto log = distill(student, teacher, data, dc, plan, derive_seed(cfg.seed, "stage.distill"));
  pipeline_detail::write_loss_csv(log, out_dir / "loss" / "stage5_distill.csv");
  save_checkpoint(student, out_dir / "checkpoints" / "distilled.ckpt");
  std::printf("distill: final loss %.6f over %zu batches\n", log.last_loss(),
              log.history.size());
  return 0;
}

int do_lm_build(const RunConfig& cfg, const fs::path& text_path, const fs::path& out_path) {
  auto text = load_text_corpus(text_path);
  NGramModel lm =
      NGramModel::estimate(count_ngrams(text, cfg.lm.order), Smoothing::witten_bell);
  export_arpa(lm, out_path);
  std::printf("lm-build: order-%zu model over %zu sentences -> %s\n", cfg.lm.order,
              text.size(), out_path.string().c_str());
  return 0;
}

int do_lm_interp(double lambda_en, const fs::path& arpa_en, const fs::path& arpa_hi,
                 const fs::path& test_en_path, const fs::path& test_hi_path,
                 const fs::path& out_path) {
  auto lm_en = std::make_shared<NGramModel>(import_arpa(arpa_en));
  auto lm_hi = std::make_shared<NGramModel>(import_arpa(arpa_hi));
  InterpolatedLM mixed(lm_en, lm_hi, lambda_en);
  auto test_en = load_text_corpus(test_en_path);
  auto test_hi = load_text_corpus(test_hi_path);
  std::string out = "lm,testset,perplexity\n";
  out += "en,en," + fmt_double(perplexity(*lm_en, test_en), 4) + "\n";
  out += "hinglish,en," + fmt_double(perplexity(mixed, test_en), 4) + "\n";
  out += "en,hi," + fmt_double(perplexity(*lm_en, test_hi), 4) + "\n";
  out += "hinglish,hi," + fmt_double(perplexity(mixed, test_hi), 4) + "\n";
  if (out_path.empty()) {
    std::fputs(out.c_str(), stdout);
  } else {
    write_file(out_path, out);
  }
  return 0;
}

int do_translit(const std::string& mode, const fs::path& table_path,
                const fs::path& rules_path, const fs::path& in_path,
                const fs::path& out_path, const std::string& endpoint,
                const fs::path& cache_path) {
  auto lines = read_lines(in_path);
  std::vector<std::string> sentences;
  for (const auto& l : lines)
    if (!l.empty()) sentences.push_back(l);

  std::unique_ptr<TranslitProvider> provider;
  if (mode == "word") {
    provider = std::make_unique<WordTableProvider>(load_translit_table(table_path));
  } else if (mode == "contextual") {
    auto rules = rules_path.empty() ? std::vector<ContextRule>{}
                                    : load_context_rules(rules_path);
    provider = std::make_unique<ContextualRulesProvider>(load_translit_table(table_path),
                                                         std::move(rules));
  } else if (mode == "remote") {
    EndpointConfig ep;
    auto colon = endpoint.find(':');
    auto slash = endpoint.find('/', colon == std::string::npos ? 0 : colon);
    SHAASR_CHECK(colon != std::string::npos, ErrKind::kConfig,
                 "config error: endpoint must look like host:port/path");
    ep.host = endpoint.substr(0, colon);
    ep.port = std::stoi(endpoint.substr(colon + 1));
    if (slash != std::string::npos) ep.path = endpoint.substr(slash);
    if (!cache_path.empty()) {
      ep.cache_path = cache_path;
    } else if (const char* dir = std::getenv("SHA_ASR_CACHE_DIR")) {
      ep.cache_path = fs::path(dir) / "translit_cache.tsv";
    }
    provider = std::make_unique<RemoteProvider>(ep, std::make_shared<HttplibTransport>(ep));
  } else {
    SHAASR_THROW(ErrKind::kConfig, "config error: unknown translit mode '%s'", mode.c_str());
  }

  BatchResult res = provider->transliterate(sentences);
  std::string out;
  for (const auto& s : res.sentences) out += s + "\n";
  write_file(out_path, out);
  if (!res.unknown_tokens.empty()) {
    std::fprintf(stderr, "translit: %zu tokens passed through unchanged\n",
                 res.unknown_tokens.size());
  }
  return 0;
}

std::unique_ptr<LanguageModel> load_lm(const fs::path& arpa_en, const fs::path& arpa_hi,
                                       double lambda_en) {
  auto en = std::make_shared<NGramModel>(import_arpa(arpa_en));
  if (arpa_hi.empty()) return std::make_unique<NGramModel>(*en);
  auto hi = std::make_shared<NGramModel>(import_arpa(arpa_hi));
  return std::make_unique<InterpolatedLM>(en, hi, lambda_en);
}

PosteriorFn make_posterior_fn(const fs::path& ckpt, const std::string& route_name,
                              std::shared_ptr<void>& holder) {
  Route route = Route::sha;
  if (route_name == "single") route = Route::single;
  else if (route_name == "sha") route = Route::sha;
  else if (route_name == "head-en") route = Route::head_en;
  else if (route_name == "head-hi") route = Route::head_hi;
  else
    SHAASR_THROW(ErrKind::kConfig, "config error: unknown route '%s'", route_name.c_str());

  if (peek_checkpoint_kind(ckpt) == ModelKind::single) {
    SHAASR_CHECK(route == Route::single, ErrKind::kConfig,
                 "config error: checkpoint %s holds a SingleHead model; use --route single",
                 ckpt.string().c_str());
    auto m = std::make_shared<SingleHeadModel>(load_checkpoint<SingleHeadModel>(ckpt));
    holder = m;
    return [m](const Utterance& u) { return utterance_posteriors(*m, u.frames, Route::single); };
  }
  SHAASR_CHECK(route != Route::single, ErrKind::kConfig,
               "config error: checkpoint %s holds a SHA model; pick sha/head-en/head-hi",
               ckpt.string().c_str());
  auto m = std::make_shared<ShaModel>(load_checkpoint<ShaModel>(ckpt));
  holder = m;
  return [m, route](const Utterance& u) { return utterance_posteriors(*m, u.frames, route); };
}

int do_eval(const RunConfig& cfg, const fs::path& ckpt, const std::string& route_name,
            bool oracle, const fs::path& corpus_path, const fs::path& lexicon_path,
            const fs::path& arpa_en, const fs::path& arpa_hi, const fs::path& out_path,
            bool write_hyps, const fs::path& hyp_path) {
  auto corpus = load_corpus(corpus_path);
  Lexicon lexicon(load_lexicon(lexicon_path), cfg.model.num_chenones);
  auto lm = load_lm(arpa_en, arpa_hi, cfg.lm.lambda_en);

  std::shared_ptr<void> holder;
  PosteriorFn fn;
  if (oracle) {
    std::size_t k = cfg.model.num_chenones;
    fn = [k](const Utterance& u) { return oracle_posteriors(u, k); };
  } else {
    SHAASR_CHECK(!ckpt.empty(), ErrKind::kConfig,
                 "config error: eval needs --ckpt or --oracle-posteriors");
    fn = make_posterior_fn(ckpt, route_name, holder);
  }

  if (write_hyps) {
    std::string hyps;
    for (const Utterance& u : corpus) {
      DecodeResult r = decode(fn(u), lexicon, *lm, cfg.decode);
      hyps += u.id + "\t" + join_tokens(r.words) + "\n";
    }
    write_file(hyp_path, hyps);
  }
  auto rows = evaluate_testset(oracle ? "oracle" : "model", fn, corpus, lexicon, *lm,
                               cfg.decode);
  std::string csv = wer_report_csv(rows, true);
  if (out_path.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    write_file(out_path, csv);
    std::fputs(csv.c_str(), stdout);
  }
  return 0;
}

int do_analyze(const RunConfig& cfg, const fs::path& ckpt, const fs::path& corpus_path,
               std::size_t components, const fs::path& out_dir) {
  ShaModel model = load_checkpoint<ShaModel>(ckpt);
  auto corpus = load_corpus(corpus_path);
  auto samples = collect_weights(model, corpus);
  fs::create_directories(out_dir);
  export_weight_samples(samples, out_dir / "weight_samples.csv");

  std::vector<double> w_en_on_en, w_hi_on_hi;
  for (const auto& s : samples) {
    if (s.true_lang == Lang::en) w_en_on_en.push_back(s.w_en);
    else w_hi_on_hi.push_back(s.w_hi);
  }
  export_histogram(w_en_on_en, 20, out_dir / "hist_w_en_on_en.csv");
  export_histogram(w_hi_on_hi, 20, out_dir / "hist_w_hi_on_hi.csv");

  bool first = true;
  for (const auto& [label, data] :
       {std::pair<std::string, const std::vector<double>*>{"w_en_on_en", &w_en_on_en},
        {"w_hi_on_hi", &w_hi_on_hi}}) {
    if (data->size() >= components) {
      GmmFit fit = fit_gmm_1d_multistart(*data, components, derive_seed(cfg.seed, "gmm"));
      export_gmm_fit(fit, label, out_dir / "gmm_fits.csv", !first);
      first = false;
      std::printf("analyze: %s dominant component mean %.4f (weight %.3f)\n", label.c_str(),
                  fit.means[fit.dominant()], fit.weights[fit.dominant()]);
    }
  }
  return 0;
}

int do_reproduce_trend(const RunConfig& cfg, const fs::path& out_dir) {
  TrendReport report = run_reproduce_trend(cfg, out_dir);
  std::printf("no,system,lm,en_wer,hi_wer\n");
  for (const auto& r : report.rows)
    std::printf("%s,%s,%s,%.2f,%.2f\n", r.no.c_str(), r.system.c_str(), r.lm.c_str(),
                r.en_wer, r.hi_wer);
  std::printf("params: singlehead %zu, sha %zu, overhead %.2f%%\n", report.params_single,
              report.params_sha, report.overhead_percent);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bilingual ASR workbench (split-head acoustic models + Hinglish LM)"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "run configuration file");
  app.add_option("--seed", seed, "override the global seed");

  std::string out_dir = "run";
  std::string data_dir, ckpt, teacher_ckpt, route = "sha", mode = "word";
  std::string text_path, arpa_en, arpa_hi, test_en_path, test_hi_path;
  std::string table_path, rules_path, in_path, out_path, endpoint, cache_path;
  std::string corpus_path, lexicon_path, hyp_path;
  bool oracle = false;
  double lambda_en = 0.9;
  std::size_t components = 2;

  auto* synth = app.add_subcommand("synth", "generate the synthetic bilingual corpora");
  synth->add_option("--out", out_dir, "output directory");

  auto* train = app.add_subcommand("train", "run training stages 1-4");
  train->add_option("--data", data_dir, "synth output directory")->required();
  train->add_option("--out", out_dir, "output directory");

  auto* dist = app.add_subcommand("distill", "teacher-student finetuning of a SHA model");
  dist->add_option("--data", data_dir, "synth output directory")->required();
  dist->add_option("--student", ckpt, "SHA student checkpoint")->required();
  dist->add_option("--teacher-single", teacher_ckpt, "pooled SingleHead checkpoint")
      ->required();
  dist->add_option("--out", out_dir, "output directory");

  auto* lmb = app.add_subcommand("lm-build", "estimate an n-gram LM and export ARPA");
  lmb->add_option("--text", text_path, "training text, one sentence per line")->required();
  lmb->add_option("--out", out_path, "output ARPA path")->required();

  auto* lmi = app.add_subcommand("lm-interp", "interpolate two ARPA models and report perplexity");
  lmi->add_option("--arpa-en", arpa_en, "English ARPA")->required();
  lmi->add_option("--arpa-hi", arpa_hi, "transliterated-Hindi ARPA")->required();
  lmi->add_option("--lambda-en", lambda_en, "English interpolation weight");
  lmi->add_option("--test-en", test_en_path, "English test text")->required();
  lmi->add_option("--test-hi", test_hi_path, "Hindi (Latin) test text")->required();
  lmi->add_option("--out", out_path, "output CSV (default: stdout)");

  auto* tr = app.add_subcommand("translit", "transliterate text");
  tr->add_option("--mode", mode, "word | contextual | remote");
  tr->add_option("--table", table_path, "TSV lookup table");
  tr->add_option("--rules", rules_path, "TSV context rules (contextual mode)");
  tr->add_option("--in", in_path, "input text")->required();
  tr->add_option("--out", out_path, "output text")->required();
  tr->add_option("--endpoint", endpoint, "host:port/path (remote mode)");
  tr->add_option("--cache", cache_path, "cache file (remote mode)");

  auto* dec = app.add_subcommand("decode", "decode a corpus and write hypotheses + WER");
  dec->add_option("--ckpt", ckpt, "model checkpoint");
  dec->add_option("--route", route, "single | sha | head-en | head-hi");
  dec->add_flag("--oracle-posteriors", oracle, "use one-hot true-label posteriors");
  dec->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  dec->add_option("--lexicon", lexicon_path, "lexicon TSV")->required();
  dec->add_option("--arpa-en", arpa_en, "ARPA LM (or English half)")->required();
  dec->add_option("--arpa-hi", arpa_hi, "optional second ARPA for interpolation");
  dec->add_option("--lambda-en", lambda_en, "interpolation weight when two ARPAs given");
  dec->add_option("--hyp", hyp_path, "hypothesis output file");
  dec->add_option("--out", out_path, "WER report CSV");

  auto* ev = app.add_subcommand("eval", "score a corpus, aggregated per language");
  ev->add_option("--ckpt", ckpt, "model checkpoint");
  ev->add_option("--route", route, "single | sha | head-en | head-hi");
  ev->add_flag("--oracle-posteriors", oracle, "use one-hot true-label posteriors");
  ev->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  ev->add_option("--lexicon", lexicon_path, "lexicon TSV")->required();
  ev->add_option("--arpa-en", arpa_en, "ARPA LM (or English half)")->required();
  ev->add_option("--arpa-hi", arpa_hi, "optional second ARPA for interpolation");
  ev->add_option("--lambda-en", lambda_en, "interpolation weight when two ARPAs given");
  ev->add_option("--out", out_path, "WER report CSV");

  auto* an = app.add_subcommand("analyze", "attention-weight distributions and GMM fits");
  an->add_option("--ckpt", ckpt, "SHA checkpoint")->required();
  an->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  an->add_option("--components", components, "GMM components per language subset");
  an->add_option("--out", out_dir, "output directory");

  auto* trend = app.add_subcommand("reproduce-trend",
                                   "full pipeline: synth, stages 1-4, distill, LMs, eval");
  trend->add_option("--out", out_dir, "run directory");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = load_config(config_path, seed);
    if (synth->parsed()) return do_synth(cfg, out_dir);
    if (train->parsed()) return do_train(cfg, data_dir, out_dir);
    if (dist->parsed()) return do_distill(cfg, data_dir, ckpt, teacher_ckpt, out_dir);
    if (lmb->parsed()) return do_lm_build(cfg, text_path, out_path);
    if (lmi->parsed())
      return do_lm_interp(lambda_en, arpa_en, arpa_hi, test_en_path, test_hi_path, out_path);
    if (tr->parsed())
      return do_translit(mode, table_path, rules_path, in_path, out_path, endpoint,
                         cache_path);
    if (dec->parsed())
      return do_eval(cfg, ckpt, route, oracle, corpus_path, lexicon_path, arpa_en, arpa_hi,
                     out_path, true, hyp_path.empty() ? "hyps.tsv" : hyp_path);
    if (ev->parsed())
      return do_eval(cfg, ckpt, route, oracle, corpus_path, lexicon_path, arpa_en, arpa_hi,
                     out_path, false, "");
    if (an->parsed()) return do_analyze(cfg, ckpt, corpus_path, components, out_dir);
    if (trend->parsed()) return do_reproduce_trend(cfg, out_dir);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
