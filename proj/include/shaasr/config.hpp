// shaasr/config.hpp

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

#ifndef SHAASR_CONFIG_HPP_
#define SHAASR_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "shaasr/corpus.hpp"
#include "shaasr/decoder.hpp"
#include "shaasr/io.hpp"
#include "shaasr/model.hpp"
#include "shaasr/trainer.hpp"

namespace shaasr {

namespace config_detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

/// Sectioned `key = value` text.  Every key must be consumed by the schema;
/// leftovers are rejected.
class KvReader {
 public:
  static KvReader parse(const std::string& text, const std::string& origin) {
    KvReader r;
    r.origin_ = origin;
    std::string section;
    std::size_t ln = 0;
    for (const auto& raw : split_on(text, '\n')) {
      ++ln;
      std::string line = trim(raw);
      if (line.empty() || line[0] == '#') continue;
      if (line.front() == '[' && line.back() == ']') {
        section = trim(line.substr(1, line.size() - 2));
        SHAASR_CHECK(!section.empty(), ErrKind::kConfig,
                     "config error: %s line %zu: empty section name", origin.c_str(), ln);
        continue;
      }
      auto eq = line.find('=');
      SHAASR_CHECK(eq != std::string::npos && !section.empty(), ErrKind::kConfig,
                   "config error: %s line %zu: expected 'key = value' inside a section",
                   origin.c_str(), ln);
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      SHAASR_CHECK(!key.empty(), ErrKind::kConfig, "config error: %s line %zu: empty key",
                   origin.c_str(), ln);
      SHAASR_CHECK(!r.values_.count(section + "." + key), ErrKind::kConfig,
                   "config error: %s line %zu: duplicate key %s.%s", origin.c_str(), ln,
                   section.c_str(), key.c_str());
      r.values_[section + "." + key] = value;
    }
    return r;
  }

  template <typename T>
  void take(const std::string& section, const std::string& key, T* out) {
    auto it = values_.find(section + "." + key);
    consumed_.insert(section + "." + key);
    if (it == values_.end()) return;  // keep default
    parse_value(it->second, section + "." + key, out);
  }

  void check_all_consumed() const {
    for (const auto& [k, v] : values_) {
      SHAASR_CHECK(consumed_.count(k), ErrKind::kConfig,
                   "config error: %s: unknown key '%s'", origin_.c_str(), k.c_str());
    }
  }

 private:
  void parse_value(const std::string& v, const std::string& where, double* out) {
    try {
      std::size_t used = 0;
      *out = std::stod(v, &used);
      SHAASR_CHECK(used == v.size(), ErrKind::kConfig, "config error: %s: bad float '%s'",
                   where.c_str(), v.c_str());
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      SHAASR_THROW(ErrKind::kConfig, "config error: %s: bad float '%s'", where.c_str(),
                   v.c_str());
    }
  }
  void parse_value(const std::string& v, const std::string& where, std::size_t* out) {
    try {
      std::size_t used = 0;
      long long parsed = std::stoll(v, &used);
      SHAASR_CHECK(used == v.size() && parsed >= 0, ErrKind::kConfig,
                   "config error: %s: bad non-negative integer '%s'", where.c_str(),
                   v.c_str());
      *out = static_cast<std::size_t>(parsed);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      SHAASR_THROW(ErrKind::kConfig, "config error: %s: bad integer '%s'", where.c_str(),
                   v.c_str());
    }
  }
  void parse_value(const std::string& v, const std::string& where, std::uint64_t* out) {
    std::size_t tmp = 0;
    parse_value(v, where, &tmp);
    *out = tmp;
  }

  std::string origin_;
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

}  // namespace config_detail

struct SynthCounts {
  std::size_t train_utts_en = 260;
  std::size_t train_utts_hi = 260;
  std::size_t train_utts_mix = 100;
  std::size_t test_utts = 60;
  double mix_ratio_hi = 0.5;
  std::size_t lm_train_sentences = 1500;
  std::size_t lm_test_sentences = 250;
  // the hi LM corpus is heavily code-mixed (Latin entities and loanwords),
  // so this is the share of hi-language segments in it
  double lm_hi_corpus_hi_share = 0.45;
};

struct TrainSettings {
  std::size_t batch_size = 32;
  double learning_rate = 2e-3;
  std::size_t epochs_single = 4;
  std::size_t epochs_split = 4;
  std::size_t epochs_attention = 3;
  std::size_t epochs_full = 2;
};

struct DistillSettings {
  std::size_t epochs = 2;
  double learning_rate = 1e-3;
  double w_kld = 0.95;
  double teacher_weight_nonstreaming = 0.4;
};

struct LmSettings {
  std::size_t order = 3;
  double lambda_en = 0.9;
};

/// Everything a run needs; one global seed feeds all named sub-streams.
struct RunConfig {
  ModelConfig model;
  SynthParams synth;
  SynthCounts counts;
  TrainSettings train;
  DistillSettings distill;
  LmSettings lm;
  DecodeConfig decode;
  std::uint64_t seed = 7;

  void validate() const {
    model.validate();
    decode.validate();
    SHAASR_CHECK(model.feature_dim == synth.feature_dim &&
                     model.num_chenones == synth.num_chenones,
                 ErrKind::kConfig,
                 "config error: model and synth must agree on feature_dim/num_chenones");
    SHAASR_CHECK(counts.mix_ratio_hi > 0.0 && counts.mix_ratio_hi < 1.0, ErrKind::kConfig,
                 "config error: mix_ratio_hi must lie in (0,1)");
    SHAASR_CHECK(counts.lm_hi_corpus_hi_share > 0.0 && counts.lm_hi_corpus_hi_share < 1.0,
                 ErrKind::kConfig, "config error: lm_hi_corpus_hi_share must lie in (0,1)");
    SHAASR_CHECK(lm.order >= 1, ErrKind::kConfig, "config error: lm order must be >= 1");
    SHAASR_CHECK(lm.lambda_en > 0.0 && lm.lambda_en < 1.0, ErrKind::kConfig,
                 "config error: lambda_en must lie in (0,1)");
    SHAASR_CHECK(distill.w_kld >= 0.0 && distill.w_kld <= 1.0, ErrKind::kConfig,
                 "config error: w_kld must lie in [0,1]");
    SHAASR_CHECK(distill.teacher_weight_nonstreaming >= 0.0 &&
                     distill.teacher_weight_nonstreaming <= 1.0,
                 ErrKind::kConfig, "config error: teacher weight must lie in [0,1]");
  }

  static RunConfig from_text(const std::string& text, const std::string& origin) {
    RunConfig c;
    auto kv = config_detail::KvReader::parse(text, origin);
    kv.take("model", "feature_dim", &c.model.feature_dim);
    kv.take("model", "hidden_dim", &c.model.hidden_dim);
    kv.take("model", "num_shared_blocks", &c.model.num_shared_blocks);
    kv.take("model", "num_chenones", &c.model.num_chenones);
    kv.take("model", "split_depth", &c.model.split_depth);
    kv.take("model", "lookahead", &c.model.lookahead);

    kv.take("synth", "en_vocab", &c.synth.en_vocab_size);
    kv.take("synth", "hi_vocab", &c.synth.hi_vocab_size);
    kv.take("synth", "chenones_per_word_min", &c.synth.chenones_per_word_min);
    kv.take("synth", "chenones_per_word_max", &c.synth.chenones_per_word_max);
    kv.take("synth", "frames_per_chenone_min", &c.synth.frames_per_chenone_min);
    kv.take("synth", "frames_per_chenone_max", &c.synth.frames_per_chenone_max);
    kv.take("synth", "words_per_utt_min", &c.synth.words_per_utt_min);
    kv.take("synth", "words_per_utt_max", &c.synth.words_per_utt_max);
    kv.take("synth", "chenone_mean_scale", &c.synth.chenone_mean_scale);
    kv.take("synth", "noise_scale", &c.synth.noise_scale);
    kv.take("synth", "lang_offset", &c.synth.lang_offset);
    kv.take("synth", "accent_jitter", &c.synth.accent_jitter);
    kv.take("synth", "train_utts_en", &c.counts.train_utts_en);
    kv.take("synth", "train_utts_hi", &c.counts.train_utts_hi);
    kv.take("synth", "train_utts_mix", &c.counts.train_utts_mix);
    kv.take("synth", "test_utts", &c.counts.test_utts);
    kv.take("synth", "mix_ratio_hi", &c.counts.mix_ratio_hi);
    kv.take("synth", "lm_train_sentences", &c.counts.lm_train_sentences);
    kv.take("synth", "lm_test_sentences", &c.counts.lm_test_sentences);
    kv.take("synth", "lm_hi_corpus_hi_share", &c.counts.lm_hi_corpus_hi_share);

    // models see what the generator emits
    c.synth.feature_dim = c.model.feature_dim;
    c.synth.num_chenones = c.model.num_chenones;

    kv.take("train", "batch_size", &c.train.batch_size);
    kv.take("train", "learning_rate", &c.train.learning_rate);
    kv.take("train", "epochs_single", &c.train.epochs_single);
    kv.take("train", "epochs_split", &c.train.epochs_split);
    kv.take("train", "epochs_attention", &c.train.epochs_attention);
    kv.take("train", "epochs_full", &c.train.epochs_full);

    kv.take("distill", "epochs", &c.distill.epochs);
    kv.take("distill", "learning_rate", &c.distill.learning_rate);
    kv.take("distill", "w_kld", &c.distill.w_kld);
    kv.take("distill", "teacher_weight_nonstreaming", &c.distill.teacher_weight_nonstreaming);

    kv.take("lm", "order", &c.lm.order);
    kv.take("lm", "lambda_en", &c.lm.lambda_en);

    kv.take("decode", "beam", &c.decode.beam);
    kv.take("decode", "acoustic_scale", &c.decode.acoustic_scale);
    kv.take("decode", "lm_scale", &c.decode.lm_scale);
    kv.take("decode", "word_insertion_penalty", &c.decode.word_insertion_penalty);

    kv.take("run", "seed", &c.seed);

    kv.check_all_consumed();
    c.validate();
    return c;
  }

  static RunConfig load(const std::filesystem::path& path) {
    return from_text(slurp_file(path), path.string());
  }

  /// Canonical snapshot; reparsing it reproduces the config.
  std::string to_text() const {
    std::string o;
    o += "[model]\n";
    o += "feature_dim = " + std::to_string(model.feature_dim) + "\n";
    o += "hidden_dim = " + std::to_string(model.hidden_dim) + "\n";
    o += "num_shared_blocks = " + std::to_string(model.num_shared_blocks) + "\n";
    o += "num_chenones = " + std::to_string(model.num_chenones) + "\n";
    o += "split_depth = " + std::to_string(model.split_depth) + "\n";
    o += "lookahead = " + std::to_string(model.lookahead) + "\n";
    o += "\n[synth]\n";
    o += "en_vocab = " + std::to_string(synth.en_vocab_size) + "\n";
    o += "hi_vocab = " + std::to_string(synth.hi_vocab_size) + "\n";
    o += "chenones_per_word_min = " + std::to_string(synth.chenones_per_word_min) + "\n";
    o += "chenones_per_word_max = " + std::to_string(synth.chenones_per_word_max) + "\n";
    o += "frames_per_chenone_min = " + std::to_string(synth.frames_per_chenone_min) + "\n";
    o += "frames_per_chenone_max = " + std::to_string(synth.frames_per_chenone_max) + "\n";
    o += "words_per_utt_min = " + std::to_string(synth.words_per_utt_min) + "\n";
    o += "words_per_utt_max = " + std::to_string(synth.words_per_utt_max) + "\n";
    o += "chenone_mean_scale = " + fmt_double_exact(synth.chenone_mean_scale) + "\n";
    o += "noise_scale = " + fmt_double_exact(synth.noise_scale) + "\n";
    o += "lang_offset = " + fmt_double_exact(synth.lang_offset) + "\n";
    o += "accent_jitter = " + fmt_double_exact(synth.accent_jitter) + "\n";
    o += "train_utts_en = " + std::to_string(counts.train_utts_en) + "\n";
    o += "train_utts_hi = " + std::to_string(counts.train_utts_hi) + "\n";
    o += "train_utts_mix = " + std::to_string(counts.train_utts_mix) + "\n";
    o += "test_utts = " + std::to_string(counts.test_utts) + "\n";
    o += "mix_ratio_hi = " + fmt_double_exact(counts.mix_ratio_hi) + "\n";
    o += "lm_train_sentences = " + std::to_string(counts.lm_train_sentences) + "\n";
    o += "lm_test_sentences = " + std::to_string(counts.lm_test_sentences) + "\n";
    o += "lm_hi_corpus_hi_share = " + fmt_double_exact(counts.lm_hi_corpus_hi_share) + "\n";
    o += "\n[train]\n";
    o += "batch_size = " + std::to_string(train.batch_size) + "\n";
    o += "learning_rate = " + fmt_double_exact(train.learning_rate) + "\n";
    o += "epochs_single = " + std::to_string(train.epochs_single) + "\n";
    o += "epochs_split = " + std::to_string(train.epochs_split) + "\n";
    o += "epochs_attention = " + std::to_string(train.epochs_attention) + "\n";
    o += "epochs_full = " + std::to_string(train.epochs_full) + "\n";
    o += "\n[distill]\n";
    o += "epochs = " + std::to_string(distill.epochs) + "\n";
    o += "learning_rate = " + fmt_double_exact(distill.learning_rate) + "\n";
    o += "w_kld = " + fmt_double_exact(distill.w_kld) + "\n";
    o += "teacher_weight_nonstreaming = " +
         std::string(fmt_double_exact(distill.teacher_weight_nonstreaming)) + "\n";
    o += "\n[lm]\n";
    o += "order = " + std::to_string(lm.order) + "\n";
    o += "lambda_en = " + fmt_double_exact(lm.lambda_en) + "\n";
    o += "\n[decode]\n";
    o += "beam = " + std::to_string(decode.beam) + "\n";
    o += "acoustic_scale = " + fmt_double_exact(decode.acoustic_scale) + "\n";
    o += "lm_scale = " + fmt_double_exact(decode.lm_scale) + "\n";
    o += "word_insertion_penalty = " + fmt_double_exact(decode.word_insertion_penalty) + "\n";
    o += "\n[run]\n";
    o += "seed = " + std::to_string(seed) + "\n";
    return o;
  }
};

}  // namespace shaasr

#endif  // SHAASR_CONFIG_HPP_
