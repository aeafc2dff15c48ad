// shaasr/ngram.hpp

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

#ifndef SHAASR_NGRAM_HPP_
#define SHAASR_NGRAM_HPP_

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "shaasr/error.hpp"
#include "shaasr/io.hpp"

namespace shaasr {

inline constexpr const char* kBos = "<s>";
inline constexpr const char* kEos = "</s>";
inline constexpr const char* kUnk = "<unk>";

/// ARPA sentinel for the unpredictable <s> token.
inline constexpr double kLog10Floor = -99.0;

enum class Smoothing { witten_bell };

/// Whitespace tokens, ASCII-lowercased (transliterated text is plain Latin;
/// other scripts pass through unchanged).
inline std::vector<std::string> tokenize(const std::string& line) {
  auto toks = split_ws(line);
  for (auto& t : toks)
    for (char& c : t)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return toks;
}

namespace ngram_detail {

inline constexpr char kSep = '\x1f';

inline std::string join_key(std::span<const std::string> toks) {
  std::string k;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) k.push_back(kSep);
    k += toks[i];
  }
  return k;
}

inline std::vector<std::string> split_key(const std::string& key) {
  return split_on(key, kSep);
}

}  // namespace ngram_detail

/// Exact counts of all k-grams, k <= order, over <s>-padded sentences.
struct NGramCounts {
  std::size_t order = 0;
  // grams[k-1]: joined k-gram -> count
  std::vector<std::map<std::string, std::uint64_t>> grams;

  std::uint64_t count(std::span<const std::string> toks) const {
    if (toks.empty() || toks.size() > order) return 0;
    const auto& m = grams[toks.size() - 1];
    auto it = m.find(ngram_detail::join_key(toks));
    return it == m.end() ? 0 : it->second;
  }
};

inline NGramCounts count_ngrams(const std::vector<std::vector<std::string>>& corpus,
                                std::size_t order) {
  SHAASR_CHECK(order >= 1, ErrKind::kConfig, "parameter error: order must be >= 1");
  NGramCounts counts;
  counts.order = order;
  counts.grams.resize(order);
  for (const auto& sentence : corpus) {
    std::vector<std::string> padded;
    padded.reserve(sentence.size() + 2);
    padded.push_back(kBos);
    padded.insert(padded.end(), sentence.begin(), sentence.end());
    padded.push_back(kEos);
    for (std::size_t k = 1; k <= order; ++k) {
      if (padded.size() < k) continue;
      for (std::size_t i = 0; i + k <= padded.size(); ++i) {
        counts.grams[k - 1][ngram_detail::join_key(
            std::span<const std::string>(padded.data() + i, k))] += 1;
      }
    }
  }
  return counts;
}

/// Common query surface shared by estimated and interpolated models.
/// Event space = vocab words + </s> + <unk>, excluding <s>.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  /// Natural-log probability; unknown words and history tokens map to <unk>.
  virtual double log_prob(std::span<const std::string> history,
                          const std::string& word) const = 0;
  virtual const std::set<std::string>& event_vocab() const = 0;
  virtual std::size_t order() const = 0;

  double log_prob(const std::vector<std::string>& history, const std::string& word) const {
    return log_prob(std::span<const std::string>(history.data(), history.size()), word);
  }
};

/// Backoff n-gram model with Witten-Bell smoothing.  Stored scores are
/// natural logs; per-context distributions over the event space sum to 1.
class NGramModel : public LanguageModel {
 public:
  NGramModel() = default;

  std::size_t order() const override { return order_; }
  const std::set<std::string>& event_vocab() const override { return events_; }
  Smoothing smoothing() const { return smoothing_; }
  bool knows_word(const std::string& w) const { return events_.count(w) > 0; }

  double log_prob(std::span<const std::string> history,
                  const std::string& word) const override {
    std::string w = knows_word(word) ? word : kUnk;
    std::vector<std::string> h = map_history(history);
    return backed_off(h, w);
  }
  using LanguageModel::log_prob;

  // --- construction -----------------------------------------------------

  static NGramModel estimate(const NGramCounts& counts, Smoothing smoothing) {
    SHAASR_CHECK(smoothing == Smoothing::witten_bell, ErrKind::kConfig,
                 "config error: unsupported smoothing");
    SHAASR_CHECK(counts.order >= 1 && !counts.grams.empty() && !counts.grams[0].empty(),
                 ErrKind::kData, "data error: cannot estimate from empty counts");
    NGramModel m;
    m.order_ = counts.order;
    m.smoothing_ = smoothing;
    m.probs_.resize(m.order_);
    m.bows_.resize(m.order_ >= 1 ? m.order_ - 1 : 0);

    // vocabulary and unigram level
    std::uint64_t total = 0, types = 0;
    for (const auto& [w, c] : counts.grams[0]) {
      m.events_.insert(w);
      if (w != kBos) {
        total += c;
        ++types;
      }
    }
    m.events_.erase(kBos);
    m.events_.insert(kUnk);
    SHAASR_CHECK(total > 0, ErrKind::kData, "data error: zero total count");
    double denom = static_cast<double>(total + types);
    for (const auto& [w, c] : counts.grams[0]) {
      if (w == kBos) continue;
      m.probs_[0][w] = std::log(static_cast<double>(c) / denom);
    }
    m.probs_[0][kUnk] = std::log(static_cast<double>(types) / denom);
    m.probs_[0][kBos] = kLog10Floor * std::log(10.0);

    // higher orders, bottom-up so backoff mass can query the level below
    for (std::size_t k = 2; k <= m.order_; ++k) {
      // group by context
      std::map<std::string, std::vector<std::pair<std::string, std::uint64_t>>> by_ctx;
      for (const auto& [key, c] : counts.grams[k - 1]) {
        auto toks = ngram_detail::split_key(key);
        std::string w = toks.back();
        toks.pop_back();
        by_ctx[ngram_detail::join_key(toks)].emplace_back(w, c);
      }
      for (const auto& [ctx_key, items] : by_ctx) {
        std::uint64_t n_ctx = 0;
        for (const auto& [w, c] : items) n_ctx += c;
        double t_ctx = static_cast<double>(items.size());
        double ctx_denom = static_cast<double>(n_ctx) + t_ctx;
        auto ctx_toks = ngram_detail::split_key(ctx_key);
        std::vector<std::string> shorter(ctx_toks.begin() + 1, ctx_toks.end());
        double seen_lower = 0.0;
        for (const auto& [w, c] : items) {
          m.probs_[k - 1][ctx_key + ngram_detail::kSep + w] =
              std::log(static_cast<double>(c) / ctx_denom);
          seen_lower += std::exp(m.backed_off(shorter, w));
        }
        double mass = t_ctx / ctx_denom;
        double leftover = 1.0 - seen_lower;
        SHAASR_CHECK(leftover > 0.0, ErrKind::kData,
                     "data error: degenerate backoff for context '%s'", ctx_key.c_str());
        m.bows_[k - 2][ctx_key] = std::log(mass / leftover);
      }
    }
    return m;
  }

  // --- raw access (ARPA io, tests) ---------------------------------------

  const std::map<std::string, double>& probs(std::size_t k) const { return probs_[k - 1]; }
  const std::map<std::string, double>& bows(std::size_t ctx_len) const {
    return bows_[ctx_len - 1];
  }

  static NGramModel from_raw(std::size_t order, Smoothing smoothing,
                             std::set<std::string> events,
                             std::vector<std::map<std::string, double>> probs,
                             std::vector<std::map<std::string, double>> bows) {
    NGramModel m;
    m.order_ = order;
    m.smoothing_ = smoothing;
    m.events_ = std::move(events);
    m.probs_ = std::move(probs);
    m.bows_ = std::move(bows);
    return m;
  }

 private:
  std::vector<std::string> map_history(std::span<const std::string> history) const {
    std::size_t take = std::min(history.size(), order_ - 1);
    std::vector<std::string> h;
    h.reserve(take);
    for (std::size_t i = history.size() - take; i < history.size(); ++i) {
      const std::string& t = history[i];
      h.push_back(t == kBos || events_.count(t) ? t : kUnk);
    }
    return h;
  }

  /// Standard backoff recursion over an already-mapped history.
  double backed_off(std::span<const std::string> history, const std::string& w) const {
    if (!history.empty()) {
      std::string key = ngram_detail::join_key(history) + ngram_detail::kSep + w;
      auto it = probs_[history.size()].find(key);
      if (it != probs_[history.size()].end()) return it->second;
      double bow = 0.0;
      auto bit = bows_[history.size() - 1].find(ngram_detail::join_key(history));
      if (bit != bows_[history.size() - 1].end()) bow = bit->second;
      return bow + backed_off(history.subspan(1), w);
    }
    auto it = probs_[0].find(w);
    return it != probs_[0].end() ? it->second : probs_[0].at(kUnk);
  }
  double backed_off(const std::vector<std::string>& history, const std::string& w) const {
    return backed_off(std::span<const std::string>(history.data(), history.size()), w);
  }

  std::size_t order_ = 0;
  Smoothing smoothing_ = Smoothing::witten_bell;
  std::set<std::string> events_;  // incl </s> and <unk>, excl <s>
  std::vector<std::map<std::string, double>> probs_;  // probs_[k-1]: k-gram -> ln p
  std::vector<std::map<std::string, double>> bows_;   // bows_[l-1]: context of len l -> ln bow
};

/// Linear interpolation of two component models over the union vocabulary.
/// Words a component does not know share that component's <unk> mass equally
/// with the <unk> event, keeping every per-context distribution normalized.
class InterpolatedLM : public LanguageModel {
 public:
  InterpolatedLM(std::shared_ptr<const NGramModel> en, std::shared_ptr<const NGramModel> hi,
                 double lambda_en)
      : en_(std::move(en)), hi_(std::move(hi)), lambda_en_(lambda_en) {
    SHAASR_CHECK(lambda_en_ > 0.0 && lambda_en_ < 1.0, ErrKind::kConfig,
                 "parameter error: lambda_en must lie in (0,1), got %g", lambda_en_);
    events_ = en_->event_vocab();
    events_.insert(hi_->event_vocab().begin(), hi_->event_vocab().end());
    std::size_t oov_en = 0, oov_hi = 0;
    for (const auto& w : events_) {
      if (w == kUnk) continue;
      if (!en_->knows_word(w)) ++oov_en;
      if (!hi_->knows_word(w)) ++oov_hi;
    }
    unk_share_en_ = static_cast<double>(oov_en + 1);
    unk_share_hi_ = static_cast<double>(oov_hi + 1);
  }

  std::size_t order() const override { return std::max(en_->order(), hi_->order()); }
  const std::set<std::string>& event_vocab() const override { return events_; }
  double lambda_en() const { return lambda_en_; }

  double log_prob(std::span<const std::string> history,
                  const std::string& word) const override {
    double pe = component_prob(*en_, unk_share_en_, history, word);
    double ph = component_prob(*hi_, unk_share_hi_, history, word);
    return std::log(lambda_en_ * pe + (1.0 - lambda_en_) * ph);
  }
  using LanguageModel::log_prob;

 private:
  static double component_prob(const NGramModel& m, double unk_share,
                               std::span<const std::string> history,
                               const std::string& word) {
    if (word != kUnk && m.knows_word(word)) return std::exp(m.log_prob(history, word));
    return std::exp(m.log_prob(history, kUnk)) / unk_share;
  }

  std::shared_ptr<const NGramModel> en_;
  std::shared_ptr<const NGramModel> hi_;
  double lambda_en_;
  double unk_share_en_ = 1.0;
  double unk_share_hi_ = 1.0;
  std::set<std::string> events_;
};

inline InterpolatedLM interpolate(std::shared_ptr<const NGramModel> en,
                                  std::shared_ptr<const NGramModel> hi, double lambda_en) {
  return InterpolatedLM(std::move(en), std::move(hi), lambda_en);
}

/// exp(-mean log p per token, sentence-end events included).
inline double perplexity(const LanguageModel& lm,
                         const std::vector<std::vector<std::string>>& corpus) {
  SHAASR_CHECK(!corpus.empty(), ErrKind::kData, "data error: empty perplexity corpus");
  double total = 0.0;
  std::size_t events = 0;
  for (const auto& sentence : corpus) {
    std::vector<std::string> history{kBos};
    for (const auto& w : sentence) {
      double lp = lm.log_prob(history, w);
      SHAASR_CHECK(std::isfinite(lp), ErrKind::kData,
                   "model error: zero probability for token '%s'", w.c_str());
      total += lp;
      ++events;
      history.push_back(w);
    }
    double lp_end = lm.log_prob(history, kEos);
    SHAASR_CHECK(std::isfinite(lp_end), ErrKind::kData,
                 "model error: zero probability for sentence end");
    total += lp_end;
    ++events;
  }
  return std::exp(-total / static_cast<double>(events));
}

// --- ARPA text format ----------------------------------------------------------

/// Standard ARPA layout: \data\ with per-order entry counts, \N-grams:
/// sections holding `log10p TAB tokens [TAB log10bow]`, then \end\.
inline void export_arpa(const NGramModel& m, const std::filesystem::path& path) {
  constexpr double ln10 = 2.302585092994045684;
  std::string out = "\\data\\\n";
  for (std::size_t k = 1; k <= m.order(); ++k)
    out += "ngram " + std::to_string(k) + "=" + std::to_string(m.probs(k).size()) + "\n";
  for (std::size_t k = 1; k <= m.order(); ++k) {
    out += "\n\\" + std::to_string(k) + "-grams:\n";
    for (const auto& [key, lnp] : m.probs(k)) {
      auto toks = ngram_detail::split_key(key);
      std::string line = fmt_double_exact(lnp / ln10) + "\t";
      for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) line += ' ';
        line += toks[i];
      }
      if (k < m.order()) {
        const auto& bows = m.bows(k);
        auto bit = bows.find(key);
        if (bit != bows.end()) line += "\t" + std::string(fmt_double_exact(bit->second / ln10));
      }
      out += line + "\n";
    }
  }
  out += "\n\\end\\\n";
  write_file(path, out);
}

inline NGramModel import_arpa(const std::filesystem::path& path) {
  constexpr double ln10 = 2.302585092994045684;
  auto lines = read_lines(path);
  std::size_t ln = 0;
  auto fail = [&](const char* why) -> void {
    SHAASR_THROW(ErrKind::kData, "parse error: %s line %zu: %s", path.string().c_str(),
                 ln + 1, why);
  };
  auto next_nonempty = [&]() -> const std::string* {
    while (ln < lines.size()) {
      if (!lines[ln].empty()) return &lines[ln];
      ++ln;
    }
    return nullptr;
  };

  const std::string* line = next_nonempty();
  if (!line || *line != "\\data\\") fail("expected \\data\\");
  ++ln;

  std::vector<std::size_t> declared;
  while (true) {
    line = next_nonempty();
    if (!line) fail("unexpected end of file in \\data\\ section");
    if (line->rfind("ngram ", 0) != 0) break;
    auto eq = line->find('=');
    if (eq == std::string::npos) fail("malformed ngram count");
    std::size_t k = std::stoul(line->substr(6, eq - 6));
    std::size_t n = std::stoul(line->substr(eq + 1));
    if (k != declared.size() + 1) fail("non-consecutive ngram orders");
    declared.push_back(n);
    ++ln;
  }
  if (declared.empty()) fail("no ngram counts declared");
  std::size_t order = declared.size();

  std::vector<std::map<std::string, double>> probs(order);
  std::vector<std::map<std::string, double>> bows(order >= 1 ? order - 1 : 0);
  for (std::size_t k = 1; k <= order; ++k) {
    line = next_nonempty();
    std::string header = "\\" + std::to_string(k) + "-grams:";
    if (!line || *line != header) fail("expected n-gram section header");
    ++ln;
    for (std::size_t i = 0; i < declared[k - 1]; ++i) {
      line = next_nonempty();
      if (!line || (*line)[0] == '\\') fail("fewer entries than declared");
      auto fields = split_ws(*line);
      bool has_bow = fields.size() == k + 2;
      if (!(has_bow || fields.size() == k + 1)) fail("malformed n-gram entry");
      double lp = 0.0, bw = 0.0;
      try {
        lp = std::stod(fields[0]);
        if (has_bow) bw = std::stod(fields.back());
      } catch (const std::exception&) {
        fail("bad float in n-gram entry");
      }
      std::vector<std::string> toks(fields.begin() + 1,
                                    fields.begin() + 1 + static_cast<long>(k));
      std::string key = ngram_detail::join_key(toks);
      probs[k - 1][key] = lp * ln10;
      if (has_bow) {
        if (k >= order) fail("backoff weight on highest order");
        bows[k - 1][key] = bw * ln10;
      }
      ++ln;
    }
  }
  line = next_nonempty();
  if (!line || *line != "\\end\\") fail("expected \\end\\");

  std::set<std::string> events;
  for (const auto& [w, lp] : probs[0])
    if (w != kBos) events.insert(w);
  SHAASR_CHECK(events.count(kUnk) == 1, ErrKind::kData,
               "parse error: %s: model lacks <unk>", path.string().c_str());
  return NGramModel::from_raw(order, Smoothing::witten_bell, std::move(events),
                              std::move(probs), std::move(bows));
}

}  // namespace shaasr

#endif  // SHAASR_NGRAM_HPP_
