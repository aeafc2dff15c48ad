// shaasr/decoder.hpp

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

#ifndef SHAASR_DECODER_HPP_
#define SHAASR_DECODER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "shaasr/corpus.hpp"
#include "shaasr/model.hpp"
#include "shaasr/ngram.hpp"

namespace shaasr {

/// Decoding lexicon: word list with chenone sequences over the shared
/// inventory.  Stand-in for the HMM graph of the full hybrid system.
class Lexicon {
 public:
  Lexicon(const WordLexicon& entries, std::size_t num_chenones) {
    SHAASR_CHECK(!entries.empty(), ErrKind::kData, "data error: empty lexicon");
    for (const auto& [word, seq] : entries) {
      SHAASR_CHECK(!seq.empty(), ErrKind::kData, "data error: word '%s' has empty sequence",
                   word.c_str());
      for (int c : seq)
        SHAASR_CHECK(c >= 0 && static_cast<std::size_t>(c) < num_chenones, ErrKind::kData,
                     "inventory error: word '%s' uses chenone %d outside [0,%zu)",
                     word.c_str(), c, num_chenones);
      words_.push_back(word);
      seqs_.push_back(seq);
    }
    num_chenones_ = num_chenones;
  }

  std::size_t size() const { return words_.size(); }
  std::size_t num_chenones() const { return num_chenones_; }
  const std::string& word(std::size_t i) const { return words_[i]; }
  const std::vector<int>& seq(std::size_t i) const { return seqs_[i]; }

 private:
  std::vector<std::string> words_;
  std::vector<std::vector<int>> seqs_;
  std::size_t num_chenones_ = 0;
};

inline constexpr std::size_t kInfiniteBeam = std::numeric_limits<std::size_t>::max();

struct DecodeConfig {
  std::size_t beam = 16;  // kInfiniteBeam disables pruning
  double acoustic_scale = 1.0;
  double lm_scale = 0.5;
  double word_insertion_penalty = 0.0;

  void validate() const {
    SHAASR_CHECK(beam >= 1, ErrKind::kConfig, "config error: beam must be >= 1");
    SHAASR_CHECK(acoustic_scale >= 0.0 && lm_scale >= 0.0, ErrKind::kConfig,
                 "config error: scales must be >= 0");
  }
};

struct DecodeResult {
  std::vector<std::string> words;
  double score = -std::numeric_limits<double>::infinity();
};

namespace decode_detail {

struct WordChain {
  std::int32_t word;
  std::shared_ptr<const WordChain> prev;
};

inline std::vector<std::int32_t> chain_to_ids(const std::shared_ptr<const WordChain>& c) {
  std::vector<std::int32_t> ids;
  for (const WordChain* p = c.get(); p != nullptr; p = p->prev.get()) ids.push_back(p->word);
  std::reverse(ids.begin(), ids.end());
  return ids;
}

struct HypKey {
  std::int32_t word = 0;
  std::int32_t pos = 0;
  std::vector<std::int32_t> hist;  // LM context: last order-1 completed words

  bool operator<(const HypKey& o) const {
    if (word != o.word) return word < o.word;
    if (pos != o.pos) return pos < o.pos;
    return hist < o.hist;
  }
};

struct HypVal {
  double score = -std::numeric_limits<double>::infinity();
  std::shared_ptr<const WordChain> chain;
};

template <class Key>
void viterbi_merge(std::map<Key, HypVal>& m, const Key& k, double score,
                   std::shared_ptr<const WordChain> chain) {
  auto [it, inserted] = m.try_emplace(k, HypVal{score, chain});
  if (!inserted && score > it->second.score) it->second = HypVal{score, std::move(chain)};
}

/// Keeps the top-`beam` states under a strict total order (score desc, then
/// key asc), so a larger beam always keeps a superset of a smaller one.
inline void prune(std::map<HypKey, HypVal>& states, std::size_t beam) {
  if (beam == kInfiniteBeam || states.size() <= beam) return;
  std::vector<std::pair<double, const HypKey*>> order;
  order.reserve(states.size());
  for (const auto& [k, v] : states) order.emplace_back(v.score, &k);
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  });
  std::map<HypKey, HypVal> kept;
  for (std::size_t i = 0; i < beam; ++i) {
    auto it = states.find(*order[i].second);
    kept.emplace(it->first, std::move(it->second));
  }
  states.swap(kept);
}

}  // namespace decode_detail

/// Token-passing beam search over (word, chenone-position, LM-state)
/// hypotheses.  Each frame consumes one chenone step with an optional
/// self-loop; word completion applies lm_scale * ln p(word|history) plus the
/// insertion penalty; the winning complete sequence also pays the
/// sentence-end LM term.
inline DecodeResult decode(const Posteriors& posteriors, const Lexicon& lexicon,
                           const LanguageModel& lm, const DecodeConfig& cfg) {
  using namespace decode_detail;
  cfg.validate();
  SHAASR_CHECK(posteriors.num_classes() == lexicon.num_chenones(), ErrKind::kData,
               "inventory error: posteriors K=%zu vs lexicon K=%zu",
               posteriors.num_classes(), lexicon.num_chenones());
  std::size_t total = posteriors.num_frames();
  SHAASR_CHECK(total >= 1, ErrKind::kData, "data error: empty posterior sequence");
  std::size_t ctx = lm.order() >= 1 ? lm.order() - 1 : 0;

  auto lm_word = [&](const std::vector<std::int32_t>& hist, std::int32_t w) {
    std::vector<std::string> h;
    h.reserve(hist.size() + 1);
    h.push_back(kBos);
    for (std::int32_t id : hist) h.push_back(lexicon.word(static_cast<std::size_t>(id)));
    return lm.log_prob(h, lexicon.word(static_cast<std::size_t>(w)));
  };
  auto lm_end = [&](const std::vector<std::int32_t>& hist) {
    std::vector<std::string> h;
    h.reserve(hist.size() + 1);
    h.push_back(kBos);
    for (std::int32_t id : hist) h.push_back(lexicon.word(static_cast<std::size_t>(id)));
    return lm.log_prob(h, kEos);
  };
  // NOTE: the LM context passed above always starts with <s>; together with
  // the last ctx completed words this is exactly the state an n-gram of this
  // order can distinguish.

  std::map<HypKey, HypVal> states;
  for (std::size_t w = 0; w < lexicon.size(); ++w)
    viterbi_merge(states, HypKey{static_cast<std::int32_t>(w), 0, {}}, 0.0, nullptr);

  DecodeResult best;
  for (std::size_t t = 0; t < total; ++t) {
    const double* frame = posteriors.frame(t);
    std::map<HypKey, HypVal> next;
    std::map<std::vector<std::int32_t>, HypVal> completed;
    for (const auto& [key, val] : states) {
      const auto& seq = lexicon.seq(static_cast<std::size_t>(key.word));
      int chenone = seq[static_cast<std::size_t>(key.pos)];
      double p = std::max(frame[chenone], 1e-300);
      double s = val.score + cfg.acoustic_scale * std::log(p);
      // self-loop: the chenone may span multiple frames
      viterbi_merge(next, key, s, val.chain);
      if (static_cast<std::size_t>(key.pos) + 1 < seq.size()) {
        viterbi_merge(next, HypKey{key.word, key.pos + 1, key.hist}, s, val.chain);
      } else {
        double s_word = s + cfg.lm_scale * lm_word(key.hist, key.word) +
                        cfg.word_insertion_penalty;
        std::vector<std::int32_t> hist = key.hist;
        hist.push_back(key.word);
        if (hist.size() > ctx) hist.erase(hist.begin(), hist.end() - static_cast<long>(ctx));
        auto chain = std::make_shared<const WordChain>(WordChain{key.word, val.chain});
        viterbi_merge(completed, hist, s_word, chain);
        if (t + 1 < total) {
          for (std::size_t w = 0; w < lexicon.size(); ++w)
            viterbi_merge(next, HypKey{static_cast<std::int32_t>(w), 0, hist}, s_word, chain);
        }
      }
    }
    if (t + 1 == total) {
      for (const auto& [hist, val] : completed) {
        double s_final = val.score + cfg.lm_scale * lm_end(hist);
        if (s_final > best.score) {
          best.score = s_final;
          best.words.clear();
          for (std::int32_t id : chain_to_ids(val.chain))
            best.words.push_back(lexicon.word(static_cast<std::size_t>(id)));
        }
      }
    }
    states.swap(next);
    prune(states, cfg.beam);
  }
  return best;
}

// --- word error rate -------------------------------------------------------------

struct WerResult {
  double wer_percent = 0.0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;

  std::size_t errors() const { return substitutions + deletions + insertions; }
};

/// Levenshtein alignment with unit costs.  Ties between equal-distance
/// alignments prefer substitutions over deletion+insertion pairs, which keeps
/// the counts mirror-symmetric under ref/hyp swap.
inline WerResult wer(const std::vector<std::string>& reference,
                     const std::vector<std::string>& hypothesis) {
  SHAASR_CHECK(!reference.empty(), ErrKind::kData, "data error: empty WER reference");
  std::size_t n = reference.size(), m = hypothesis.size();
  struct Cell {
    std::uint32_t dist, s, d, ins;
  };
  auto better = [](const Cell& a, const Cell& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return (a.d + a.ins) < (b.d + b.ins);
  };
  std::vector<Cell> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j)
    prev[j] = {static_cast<std::uint32_t>(j), 0, 0, static_cast<std::uint32_t>(j)};
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = {static_cast<std::uint32_t>(i), 0, static_cast<std::uint32_t>(i), 0};
    for (std::size_t j = 1; j <= m; ++j) {
      bool match = reference[i - 1] == hypothesis[j - 1];
      Cell diag = prev[j - 1];
      if (!match) {
        diag.dist += 1;
        diag.s += 1;
      }
      Cell up = prev[j];
      up.dist += 1;
      up.d += 1;
      Cell left = cur[j - 1];
      left.dist += 1;
      left.ins += 1;
      Cell bestc = diag;
      if (better(up, bestc)) bestc = up;
      if (better(left, bestc)) bestc = left;
      cur[j] = bestc;
    }
    std::swap(prev, cur);
  }
  const Cell& r = prev[m];
  WerResult out;
  out.substitutions = r.s;
  out.deletions = r.d;
  out.insertions = r.ins;
  out.wer_percent = 100.0 * static_cast<double>(r.dist) / static_cast<double>(n);
  return out;
}

// --- test-set evaluation -----------------------------------------------------------

struct WerReportRow {
  std::string system;
  std::string testset;
  double wer_percent = 0.0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_tokens = 0;
  std::size_t utterances = 0;
};

using PosteriorFn = std::function<Posteriors(const Utterance&)>;

/// Decodes every utterance and aggregates WER per corpus language tag.
inline std::vector<WerReportRow> evaluate_testset(const std::string& system,
                                                  const PosteriorFn& posteriors_fn,
                                                  const std::vector<Utterance>& corpus,
                                                  const Lexicon& lexicon,
                                                  const LanguageModel& lm,
                                                  const DecodeConfig& cfg) {
  SHAASR_CHECK(!corpus.empty(), ErrKind::kData, "data error: empty test corpus");
  std::map<std::string, WerReportRow> rows;
  for (const Utterance& u : corpus) {
    SHAASR_CHECK(!u.words.empty(), ErrKind::kData,
                 "data error: utterance %s lacks a reference transcript", u.id.c_str());
    Posteriors post = posteriors_fn(u);
    DecodeResult hyp = decode(post, lexicon, lm, cfg);
    WerResult w = wer(u.words, hyp.words);
    WerReportRow& row = rows[u.lang];
    row.system = system;
    row.testset = u.lang;
    row.substitutions += w.substitutions;
    row.deletions += w.deletions;
    row.insertions += w.insertions;
    row.ref_tokens += u.words.size();
    row.utterances += 1;
  }
  std::vector<WerReportRow> out;
  for (auto& [lang, row] : rows) {
    row.wer_percent = 100.0 *
                      static_cast<double>(row.substitutions + row.deletions + row.insertions) /
                      static_cast<double>(row.ref_tokens);
    out.push_back(row);
  }
  return out;
}

/// CSV rows matching `system,testset,wer,sub,del,ins,utts`.
inline std::string wer_report_csv(const std::vector<WerReportRow>& rows, bool header) {
  std::string out;
  if (header) out += "system,testset,wer,sub,del,ins,utts\n";
  for (const auto& r : rows) {
    out += r.system + "," + r.testset + "," + fmt_double(r.wer_percent, 2) + "," +
           std::to_string(r.substitutions) + "," + std::to_string(r.deletions) + "," +
           std::to_string(r.insertions) + "," + std::to_string(r.utterances) + "\n";
  }
  return out;
}

}  // namespace shaasr

#endif  // SHAASR_DECODER_HPP_
