// shaasr/corpus.hpp

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

#ifndef SHAASR_CORPUS_HPP_
#define SHAASR_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "shaasr/io.hpp"
#include "shaasr/model.hpp"
#include "shaasr/rng.hpp"
#include "shaasr/tensor.hpp"
#include "shaasr/translit.hpp"

namespace shaasr {

/// One synthetic utterance: per-frame features, per-frame chenone labels over
/// the shared inventory, word transcript and language tags.
struct Utterance {
  std::string id;
  std::string lang;  // "en", "hi" or "mix"
  std::vector<std::string> words;
  Tensor frames;                 // [T x feature_dim]
  std::vector<int> labels;       // [T], in [0, K)
  std::vector<Lang> frame_tags;  // true language of each frame

  std::size_t num_frames() const { return labels.size(); }

  void validate(std::size_t num_chenones) const {
    SHAASR_CHECK(frames.rank() == 2 && frames.dim(0) == labels.size() &&
                     labels.size() == frame_tags.size(),
                 ErrKind::kData, "data error: utterance %s has inconsistent lengths",
                 id.c_str());
    for (int l : labels)
      SHAASR_CHECK(l >= 0 && static_cast<std::size_t>(l) < num_chenones, ErrKind::kData,
                   "data error: utterance %s label %d outside [0,%zu)", id.c_str(), l,
                   num_chenones);
  }
};

using WordLexicon = std::map<std::string, std::vector<int>>;

/// Knobs from which a full SynthSpec (vocabularies, lexicons, emission tables,
/// word-sequence generators) is derived deterministically.
struct SynthParams {
  std::size_t feature_dim = 16;
  std::size_t num_chenones = 64;
  std::size_t en_vocab_size = 40;
  std::size_t hi_vocab_size = 40;
  std::size_t chenones_per_word_min = 2;
  std::size_t chenones_per_word_max = 4;
  std::size_t frames_per_chenone_min = 1;
  std::size_t frames_per_chenone_max = 2;
  std::size_t words_per_utt_min = 3;
  std::size_t words_per_utt_max = 8;
  double chenone_mean_scale = 2.0;  // spread of chenone means (non-accent dims)
  double noise_scale = 0.5;         // diagonal emission stddev
  double lang_offset = 2.0;         // distance between language centers on the accent axis
  double accent_jitter = 0.2;       // per-utterance accent stddev around the center
};

/// Fully materialized generator state.  Emission model: frame for chenone c in
/// an utterance with accent a is means[c] + a*e_axis + noise, where the accent
/// axis is the last feature dimension (chenone means are zero there) and a is
/// drawn once per utterance per language around +lang_offset/2 (en) or
/// -lang_offset/2 (hi).
struct SynthSpec {
  SynthParams params;
  std::uint64_t seed = 0;
  std::vector<std::string> vocab_en;
  std::vector<std::string> vocab_hi;  // Devanagari tokens
  WordLexicon lexicon_en;
  WordLexicon lexicon_hi;  // keyed by source-script words
  TranslitTable translit_table;
  Tensor chenone_means;  // [K x feature_dim]
  // bigram word generators: start[v], trans[v][v'] (plain probabilities)
  std::vector<double> start_en, start_hi;
  std::vector<std::vector<double>> trans_en, trans_hi;
};

namespace synth_detail {

// hi words are short syllable strings; transliteration is syllable-wise.
inline const std::vector<std::pair<const char*, const char*>>& devanagari_syllables() {
  static const std::vector<std::pair<const char*, const char*>> table = {
      {"का", "ka"},  {"खा", "kha"}, {"गा", "ga"},
      {"घा", "gha"}, {"चा", "cha"}, {"जा", "ja"},
      {"टा", "tta"}, {"डा", "dda"}, {"ता", "ta"},
      {"था", "tha"}, {"दा", "da"},  {"ना", "na"},
      {"पा", "pa"},  {"बा", "ba"},  {"भा", "bha"},
      {"मा", "ma"},  {"या", "ya"},  {"रा", "ra"},
      {"ला", "la"},  {"वा", "va"},  {"शा", "sha"},
      {"सा", "sa"},  {"हा", "ha"},  {"गी", "gi"},
      {"दी", "di"},  {"नी", "ni"},  {"मी", "mi"},
      {"री", "ri"},  {"सी", "si"},  {"ती", "ti"},
  };
  return table;
}

// en words: CV(C) syllables over e/o/u vowels, disjoint by construction from
// the a/i-vowel Latin forms produced by the syllable table above.
inline const std::vector<const char*>& latin_syllables() {
  static const std::vector<const char*> table = {
      "be", "de", "fe", "ge", "ke", "le", "me", "ne", "pe", "re",
      "se", "te", "ve", "we", "ze", "bo", "do", "go", "ko", "lo",
      "mo", "no", "po", "ro", "so", "to", "bu", "du", "gu", "ku",
  };
  return table;
}

inline std::size_t sample_index(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline std::size_t sample_range(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Draws from a plain probability vector via inverse CDF.
inline std::size_t sample_discrete(std::mt19937_64& rng, const std::vector<double>& probs) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> p(n);
  double z = 0.0;
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (double& v : p) {
    v = u(rng);
    z += v;
  }
  for (double& v : p) v /= z;
  return p;
}

}  // namespace synth_detail

inline SynthSpec build_synth_spec(const SynthParams& params, std::uint64_t seed) {
  SHAASR_CHECK(params.en_vocab_size > 0 && params.hi_vocab_size > 0, ErrKind::kConfig,
               "spec error: empty vocabulary");
  SHAASR_CHECK(params.feature_dim >= 2, ErrKind::kConfig,
               "spec error: need >= 2 feature dims (one is the accent axis)");
  SHAASR_CHECK(params.chenones_per_word_min >= 1 &&
                   params.chenones_per_word_min <= params.chenones_per_word_max &&
                   params.frames_per_chenone_min >= 1 &&
                   params.frames_per_chenone_min <= params.frames_per_chenone_max &&
                   params.words_per_utt_min >= 1 &&
                   params.words_per_utt_min <= params.words_per_utt_max,
               ErrKind::kConfig, "spec error: bad synth ranges");
  SHAASR_CHECK(params.noise_scale > 0.0, ErrKind::kConfig,
               "spec error: emission covariance must be positive");

  SynthSpec spec;
  spec.params = params;
  spec.seed = seed;
  using namespace synth_detail;

  // vocabularies (unique words; Latin side of hi kept collision-free too)
  {
    auto rng = make_rng(derive_seed(seed, "synth.vocab.en"));
    std::map<std::string, bool> used;
    while (spec.vocab_en.size() < params.en_vocab_size) {
      std::size_t syls = sample_range(rng, 2, 3);
      std::string w;
      for (std::size_t s = 0; s < syls; ++s)
        w += latin_syllables()[sample_index(rng, latin_syllables().size())];
      if (!used[w]) {
        used[w] = true;
        spec.vocab_en.push_back(w);
      }
    }
  }
  {
    auto rng = make_rng(derive_seed(seed, "synth.vocab.hi"));
    std::map<std::string, bool> used_src, used_latin;
    while (spec.vocab_hi.size() < params.hi_vocab_size) {
      std::size_t syls = sample_range(rng, 2, 3);
      std::string src, latin;
      for (std::size_t s = 0; s < syls; ++s) {
        const auto& pair = devanagari_syllables()[sample_index(rng, devanagari_syllables().size())];
        src += pair.first;
        latin += pair.second;
      }
      if (!used_src[src] && !used_latin[latin]) {
        used_src[src] = true;
        used_latin[latin] = true;
        spec.vocab_hi.push_back(src);
        spec.translit_table.words[src] = latin;
      }
    }
  }

  // lexicons: chenone sequences unique across the union so no two words are
  // acoustically identical
  {
    auto rng = make_rng(derive_seed(seed, "synth.lexicon"));
    std::map<std::vector<int>, bool> used;
    auto draw_seq = [&]() {
      for (;;) {
        std::size_t len = sample_range(rng, params.chenones_per_word_min,
                                       params.chenones_per_word_max);
        std::vector<int> seq(len);
        for (auto& c : seq)
          c = static_cast<int>(sample_index(rng, params.num_chenones));
        if (!used[seq]) {
          used[seq] = true;
          return seq;
        }
      }
    };
    for (const auto& w : spec.vocab_en) spec.lexicon_en[w] = draw_seq();
    for (const auto& w : spec.vocab_hi) spec.lexicon_hi[w] = draw_seq();
  }

  // emission means: random in all but the accent axis (last dim)
  {
    auto rng = make_rng(derive_seed(seed, "synth.emissions"));
    std::normal_distribution<double> g(0.0, params.chenone_mean_scale);
    spec.chenone_means = Tensor({params.num_chenones, params.feature_dim});
    for (std::size_t c = 0; c < params.num_chenones; ++c)
      for (std::size_t d = 0; d + 1 < params.feature_dim; ++d)
        spec.chenone_means.at2(c, d) = g(rng);
  }

  // word-sequence generators
  {
    auto rng = make_rng(derive_seed(seed, "synth.wordgen.en"));
    spec.start_en = random_distribution(rng, spec.vocab_en.size());
    for (std::size_t i = 0; i < spec.vocab_en.size(); ++i)
      spec.trans_en.push_back(random_distribution(rng, spec.vocab_en.size()));
  }
  {
    auto rng = make_rng(derive_seed(seed, "synth.wordgen.hi"));
    spec.start_hi = random_distribution(rng, spec.vocab_hi.size());
    for (std::size_t i = 0; i < spec.vocab_hi.size(); ++i)
      spec.trans_hi.push_back(random_distribution(rng, spec.vocab_hi.size()));
  }
  return spec;
}

namespace synth_detail {

/// Appends one word's frames/labels for a given accent value.
inline void emit_word(const SynthSpec& spec, const std::string& word, Lang lang,
                      double accent, std::mt19937_64& rng,
                      std::vector<double>* frame_data, std::vector<int>* labels,
                      std::vector<Lang>* tags) {
  const WordLexicon& lex = lang == Lang::en ? spec.lexicon_en : spec.lexicon_hi;
  auto it = lex.find(word);
  SHAASR_CHECK(it != lex.end(), ErrKind::kData, "data error: word '%s' missing from lexicon",
               word.c_str());
  std::size_t fd = spec.params.feature_dim;
  std::normal_distribution<double> noise(0.0, spec.params.noise_scale);
  for (int chenone : it->second) {
    std::size_t reps = sample_range(rng, spec.params.frames_per_chenone_min,
                                    spec.params.frames_per_chenone_max);
    for (std::size_t r = 0; r < reps; ++r) {
      for (std::size_t d = 0; d < fd; ++d) {
        double mean = spec.chenone_means.at2(static_cast<std::size_t>(chenone), d);
        if (d + 1 == fd) mean += accent;
        frame_data->push_back(mean + noise(rng));
      }
      labels->push_back(chenone);
      tags->push_back(lang);
    }
  }
}

inline std::vector<std::string> walk_words(const SynthSpec& spec, Lang lang,
                                           std::size_t count, std::mt19937_64& rng) {
  const auto& vocab = lang == Lang::en ? spec.vocab_en : spec.vocab_hi;
  const auto& start = lang == Lang::en ? spec.start_en : spec.start_hi;
  const auto& trans = lang == Lang::en ? spec.trans_en : spec.trans_hi;
  std::vector<std::string> words;
  std::size_t cur = 0;
  for (std::size_t i = 0; i < count; ++i) {
    cur = i == 0 ? sample_discrete(rng, start) : sample_discrete(rng, trans[cur]);
    words.push_back(vocab[cur]);
  }
  return words;
}

inline double draw_accent(const SynthSpec& spec, Lang lang, std::mt19937_64& rng) {
  double center = (lang == Lang::en ? 0.5 : -0.5) * spec.params.lang_offset;
  return center + std::normal_distribution<double>(0.0, spec.params.accent_jitter)(rng);
}

}  // namespace synth_detail

/// Monolingual corpus: deterministic for a given (spec, seed).
inline std::vector<Utterance> synthesize_language(const SynthSpec& spec, Lang lang,
                                                  std::size_t num_utts,
                                                  std::uint64_t seed) {
  SHAASR_CHECK(num_utts > 0, ErrKind::kConfig, "spec error: num_utts must be > 0");
  const auto& vocab = lang == Lang::en ? spec.vocab_en : spec.vocab_hi;
  SHAASR_CHECK(!vocab.empty(), ErrKind::kConfig, "spec error: empty vocabulary for %s",
               lang_name(lang));
  using namespace synth_detail;
  std::vector<Utterance> corpus;
  corpus.reserve(num_utts);
  for (std::size_t i = 0; i < num_utts; ++i) {
    auto rng = make_rng(derive_seed(seed, "synth.utt", i));
    Utterance u;
    char id[64];
    std::snprintf(id, sizeof(id), "%s_%06zu", lang_name(lang), i);
    u.id = id;
    u.lang = lang_name(lang);
    std::size_t count = sample_range(rng, spec.params.words_per_utt_min,
                                     spec.params.words_per_utt_max);
    u.words = walk_words(spec, lang, count, rng);
    double accent = draw_accent(spec, lang, rng);
    std::vector<double> frame_data;
    for (const auto& w : u.words)
      emit_word(spec, w, lang, accent, rng, &frame_data, &u.labels, &u.frame_tags);
    u.frames = Tensor({u.labels.size(), spec.params.feature_dim}, std::move(frame_data));
    corpus.push_back(std::move(u));
  }
  return corpus;
}

/// Code-mixed corpus: language segments drawn i.i.d. with P(hi) = ratio_hi,
/// so the expected fraction of hi-tagged frames is ratio_hi.
inline std::vector<Utterance> synthesize_codemix(const SynthSpec& spec, double ratio_hi,
                                                 std::size_t num_utts, std::uint64_t seed) {
  SHAASR_CHECK(ratio_hi > 0.0 && ratio_hi < 1.0, ErrKind::kConfig,
               "spec error: ratio_hi must lie in (0,1), got %g", ratio_hi);
  SHAASR_CHECK(num_utts > 0, ErrKind::kConfig, "spec error: num_utts must be > 0");
  using namespace synth_detail;
  std::vector<Utterance> corpus;
  corpus.reserve(num_utts);
  for (std::size_t i = 0; i < num_utts; ++i) {
    auto rng = make_rng(derive_seed(seed, "synth.mix.utt", i));
    Utterance u;
    char id[64];
    std::snprintf(id, sizeof(id), "mix_%06zu", i);
    u.id = id;
    u.lang = "mix";
    std::size_t target = sample_range(rng, spec.params.words_per_utt_min,
                                      spec.params.words_per_utt_max);
    double accent_en = draw_accent(spec, Lang::en, rng);
    double accent_hi = draw_accent(spec, Lang::hi, rng);
    std::bernoulli_distribution pick_hi(ratio_hi);
    std::vector<double> frame_data;
    while (u.words.size() < target) {
      Lang seg_lang = pick_hi(rng) ? Lang::hi : Lang::en;
      std::size_t seg_len = std::min(sample_range(rng, 1, 3), target - u.words.size());
      auto seg_words = walk_words(spec, seg_lang, seg_len, rng);
      double accent = seg_lang == Lang::en ? accent_en : accent_hi;
      for (const auto& w : seg_words) {
        emit_word(spec, w, seg_lang, accent, rng, &frame_data, &u.labels, &u.frame_tags);
        u.words.push_back(w);
      }
    }
    u.frames = Tensor({u.labels.size(), spec.params.feature_dim}, std::move(frame_data));
    corpus.push_back(std::move(u));
  }
  return corpus;
}

/// Word sequences only (LM training text), from the same bigram generators.
inline std::vector<std::vector<std::string>> synthesize_text(const SynthSpec& spec, Lang lang,
                                                             std::size_t num_sentences,
                                                             std::uint64_t seed) {
  SHAASR_CHECK(num_sentences > 0, ErrKind::kConfig, "spec error: num_sentences must be > 0");
  using namespace synth_detail;
  std::vector<std::vector<std::string>> out;
  out.reserve(num_sentences);
  for (std::size_t i = 0; i < num_sentences; ++i) {
    auto rng = make_rng(derive_seed(seed, "synth.text", i));
    std::size_t count = sample_range(rng, spec.params.words_per_utt_min,
                                     spec.params.words_per_utt_max);
    out.push_back(walk_words(spec, lang, count, rng));
  }
  return out;
}

/// Code-mixed word sequences (the realistic shape of a hi text corpus: hi
/// words interleaved with Latin entities and loanwords).
inline std::vector<std::vector<std::string>> synthesize_codemix_text(const SynthSpec& spec,
                                                                     double ratio_hi,
                                                                     std::size_t num_sentences,
                                                                     std::uint64_t seed) {
  SHAASR_CHECK(ratio_hi > 0.0 && ratio_hi < 1.0, ErrKind::kConfig,
               "spec error: ratio_hi must lie in (0,1), got %g", ratio_hi);
  SHAASR_CHECK(num_sentences > 0, ErrKind::kConfig, "spec error: num_sentences must be > 0");
  using namespace synth_detail;
  std::vector<std::vector<std::string>> out;
  out.reserve(num_sentences);
  for (std::size_t i = 0; i < num_sentences; ++i) {
    auto rng = make_rng(derive_seed(seed, "synth.mix.text", i));
    std::size_t target = sample_range(rng, spec.params.words_per_utt_min,
                                      spec.params.words_per_utt_max);
    std::bernoulli_distribution pick_hi(ratio_hi);
    std::vector<std::string> sentence;
    while (sentence.size() < target) {
      Lang seg_lang = pick_hi(rng) ? Lang::hi : Lang::en;
      std::size_t seg_len = std::min(sample_range(rng, 1, 3), target - sentence.size());
      auto seg = walk_words(spec, seg_lang, seg_len, rng);
      sentence.insert(sentence.end(), seg.begin(), seg.end());
    }
    out.push_back(std::move(sentence));
  }
  return out;
}

/// Rewrites lexicon keys to their Latin transliterations; chenone sequences
/// are untouched so the shared inventory is preserved.
inline WordLexicon transliterate_lexicon(const WordLexicon& hi_lexicon,
                                         TranslitProvider& provider) {
  std::vector<std::string> words;
  words.reserve(hi_lexicon.size());
  for (const auto& [w, seq] : hi_lexicon) words.push_back(w);
  BatchResult batch = provider.transliterate(words);
  if (!batch.unknown_tokens.empty()) {
    std::string missing;
    for (const auto& t : batch.unknown_tokens) {
      if (!missing.empty()) missing += ", ";
      missing += t;
    }
    SHAASR_THROW(ErrKind::kData, "coverage error: provider does not cover: %s",
                 missing.c_str());
  }
  WordLexicon out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const std::string& latin = batch.sentences[i];
    auto [it, inserted] = out.emplace(latin, hi_lexicon.at(words[i]));
    SHAASR_CHECK(inserted, ErrKind::kData,
                 "coverage error: transliteration collision on '%s'", latin.c_str());
  }
  return out;
}

// --- file formats --------------------------------------------------------------

/// JSONL, one utterance per line; frames inline as base64 of little-endian
/// 32-bit floats.
inline void save_corpus(const std::vector<Utterance>& corpus,
                        const std::filesystem::path& path) {
  std::string out;
  for (const Utterance& u : corpus) {
    nlohmann::json j;
    j["id"] = u.id;
    j["lang"] = u.lang;
    j["words"] = u.words;
    j["labels"] = u.labels;
    std::string tags;
    for (Lang t : u.frame_tags) tags.push_back(t == Lang::en ? 'e' : 'h');
    j["tags"] = tags;
    j["feature_dim"] = u.frames.rank() == 2 ? u.frames.dim(1) : 0;
    std::vector<float> f32(u.frames.size());
    for (std::size_t i = 0; i < f32.size(); ++i)
      f32[i] = static_cast<float>(u.frames[i]);
    j["frames_b64"] = b64::encode(reinterpret_cast<const unsigned char*>(f32.data()),
                                  f32.size() * sizeof(float));
    out += j.dump() + "\n";
  }
  write_file(path, out);
}

inline std::vector<Utterance> load_corpus(const std::filesystem::path& path) {
  std::vector<Utterance> corpus;
  auto lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[ln]);
    } catch (const std::exception& e) {
      SHAASR_THROW(ErrKind::kData, "parse error: %s line %zu: %s", path.string().c_str(),
                   ln + 1, e.what());
    }
    Utterance u;
    u.id = j.at("id").get<std::string>();
    u.lang = j.at("lang").get<std::string>();
    u.words = j.at("words").get<std::vector<std::string>>();
    u.labels = j.at("labels").get<std::vector<int>>();
    std::string tags = j.at("tags").get<std::string>();
    for (char c : tags) u.frame_tags.push_back(c == 'e' ? Lang::en : Lang::hi);
    std::size_t fd = j.at("feature_dim").get<std::size_t>();
    auto bytes = b64::decode(j.at("frames_b64").get<std::string>());
    SHAASR_CHECK(bytes.size() == u.labels.size() * fd * sizeof(float), ErrKind::kData,
                 "parse error: %s line %zu: frame payload size mismatch",
                 path.string().c_str(), ln + 1);
    std::vector<double> data(u.labels.size() * fd);
    const float* f32 = reinterpret_cast<const float*>(bytes.data());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<double>(f32[i]);
    u.frames = Tensor({u.labels.size(), fd}, std::move(data));
    SHAASR_CHECK(u.frame_tags.size() == u.labels.size(), ErrKind::kData,
                 "parse error: %s line %zu: tags/labels length mismatch",
                 path.string().c_str(), ln + 1);
    corpus.push_back(std::move(u));
  }
  return corpus;
}

/// Lexicon file: `word TAB chenone,chenone,...`.
inline void save_lexicon(const WordLexicon& lex, const std::filesystem::path& path) {
  std::string out;
  for (const auto& [word, seq] : lex) {
    out += word + "\t";
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(seq[i]);
    }
    out += "\n";
  }
  write_file(path, out);
}

inline WordLexicon load_lexicon(const std::filesystem::path& path) {
  WordLexicon lex;
  auto lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty() || lines[ln][0] == '#') continue;
    auto cols = split_on(lines[ln], '\t');
    SHAASR_CHECK(cols.size() == 2, ErrKind::kData,
                 "parse error: %s line %zu: want 'word TAB chenones'",
                 path.string().c_str(), ln + 1);
    std::vector<int> seq;
    for (const auto& tok : split_on(cols[1], ',')) {
      SHAASR_CHECK(!tok.empty(), ErrKind::kData, "parse error: %s line %zu: empty chenone",
                   path.string().c_str(), ln + 1);
      seq.push_back(std::stoi(tok));
    }
    SHAASR_CHECK(!seq.empty(), ErrKind::kData, "parse error: %s line %zu: empty sequence",
                 path.string().c_str(), ln + 1);
    lex[cols[0]] = std::move(seq);
  }
  return lex;
}

}  // namespace shaasr

#endif  // SHAASR_CORPUS_HPP_
