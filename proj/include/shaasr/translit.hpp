// shaasr/translit.hpp

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

#ifndef SHAASR_TRANSLIT_HPP_
#define SHAASR_TRANSLIT_HPP_

#include <sys/file.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "shaasr/error.hpp"
#include "shaasr/io.hpp"
#include "shaasr/rng.hpp"

namespace shaasr {

// --- tables and rules --------------------------------------------------------

/// Word-level source -> Latin lookup table.
struct TranslitTable {
  std::map<std::string, std::string> words;

  std::optional<std::string> lookup(const std::string& w) const {
    auto it = words.find(w);
    if (it == words.end()) return std::nullopt;
    return it->second;
  }
};

/// Contextual override: when `source` appears with the given neighbor, use an
/// alternate Latin form.  Rules are tried in file order; `fallback` always
/// matches.
struct ContextRule {
  enum class Pred { prev, next, fallback };
  std::string source;
  std::string latin;
  Pred pred = Pred::fallback;
  std::string neighbor;  // for prev/next
};

inline TranslitTable load_translit_table(const std::filesystem::path& path) {
  TranslitTable table;
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i][0] == '#') continue;
    auto cols = split_on(lines[i], '\t');
    SHAASR_CHECK(cols.size() == 2 && !cols[0].empty() && !cols[1].empty(), ErrKind::kConfig,
                 "parse error: %s line %zu: want 'source TAB latin'",
                 path.string().c_str(), i + 1);
    table.words[cols[0]] = cols[1];
  }
  return table;
}

inline void save_translit_table(const TranslitTable& table, const std::filesystem::path& path) {
  std::string out;
  for (const auto& [src, latin] : table.words) out += src + "\t" + latin + "\n";
  write_file(path, out);
}

inline std::vector<ContextRule> load_context_rules(const std::filesystem::path& path) {
  std::vector<ContextRule> rules;
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i][0] == '#') continue;
    auto cols = split_on(lines[i], '\t');
    SHAASR_CHECK(cols.size() == 3, ErrKind::kConfig,
                 "parse error: %s line %zu: want 'source TAB latin TAB predicate'",
                 path.string().c_str(), i + 1);
    ContextRule r;
    r.source = cols[0];
    r.latin = cols[1];
    const std::string& pred = cols[2];
    if (pred == "default") {
      r.pred = ContextRule::Pred::fallback;
    } else if (pred.rfind("prev=", 0) == 0) {
      r.pred = ContextRule::Pred::prev;
      r.neighbor = pred.substr(5);
    } else if (pred.rfind("next=", 0) == 0) {
      r.pred = ContextRule::Pred::next;
      r.neighbor = pred.substr(5);
    } else {
      SHAASR_THROW(ErrKind::kConfig, "parse error: %s line %zu: unknown predicate '%s'",
                   path.string().c_str(), i + 1, pred.c_str());
    }
    SHAASR_CHECK(!r.source.empty() && !r.latin.empty(), ErrKind::kConfig,
                 "parse error: %s line %zu: empty rule fields", path.string().c_str(), i + 1);
    rules.push_back(std::move(r));
  }
  return rules;
}

// --- word-based and contextual transliteration -------------------------------

struct TranslitResult {
  std::string text;
  std::vector<std::string> unknown_tokens;  // passed through unchanged
};

inline std::string join_tokens(const std::vector<std::string>& toks) {
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) out += ' ';
    out += toks[i];
  }
  return out;
}

/// Token-by-token replacement; out-of-table tokens pass through and are
/// reported.  Position-independent by construction.
inline TranslitResult transliterate_word_based(const std::string& sentence,
                                               const TranslitTable& table) {
  TranslitResult res;
  auto toks = split_ws(sentence);
  std::vector<std::string> out;
  out.reserve(toks.size());
  for (const auto& t : toks) {
    if (auto latin = table.lookup(t)) {
      out.push_back(*latin);
    } else {
      out.push_back(t);
      res.unknown_tokens.push_back(t);
    }
  }
  res.text = join_tokens(out);
  return res;
}

/// Whole-sentence transliteration: context rules may choose different Latin
/// forms for the same source word depending on the neighboring source tokens.
inline TranslitResult transliterate_contextual(const std::string& sentence,
                                               const TranslitTable& table,
                                               const std::vector<ContextRule>& rules) {
  TranslitResult res;
  auto toks = split_ws(sentence);
  std::vector<std::string> out;
  out.reserve(toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const std::string& t = toks[i];
    const ContextRule* hit = nullptr;
    for (const ContextRule& r : rules) {
      if (r.source != t) continue;
      bool match = false;
      switch (r.pred) {
        case ContextRule::Pred::prev: match = i > 0 && toks[i - 1] == r.neighbor; break;
        case ContextRule::Pred::next: match = i + 1 < toks.size() && toks[i + 1] == r.neighbor; break;
        case ContextRule::Pred::fallback: match = true; break;
      }
      if (match) {
        hit = &r;
        break;
      }
    }
    if (hit) {
      out.push_back(hit->latin);
    } else if (auto latin = table.lookup(t)) {
      out.push_back(*latin);
    } else {
      out.push_back(t);
      res.unknown_tokens.push_back(t);
    }
  }
  res.text = join_tokens(out);
  return res;
}

// --- provider interface -------------------------------------------------------

struct BatchResult {
  std::vector<std::string> sentences;
  std::vector<std::string> unknown_tokens;
};

class TranslitProvider {
 public:
  virtual ~TranslitProvider() = default;
  virtual const char* kind() const = 0;
  virtual BatchResult transliterate(const std::vector<std::string>& sentences) = 0;
};

class WordTableProvider : public TranslitProvider {
 public:
  explicit WordTableProvider(TranslitTable table) : table_(std::move(table)) {}
  const char* kind() const override { return "word_table"; }
  BatchResult transliterate(const std::vector<std::string>& sentences) override {
    BatchResult out;
    for (const auto& s : sentences) {
      auto r = transliterate_word_based(s, table_);
      out.sentences.push_back(std::move(r.text));
      out.unknown_tokens.insert(out.unknown_tokens.end(), r.unknown_tokens.begin(),
                                r.unknown_tokens.end());
    }
    return out;
  }
  const TranslitTable& table() const { return table_; }

 private:
  TranslitTable table_;
};

class ContextualRulesProvider : public TranslitProvider {
 public:
  ContextualRulesProvider(TranslitTable table, std::vector<ContextRule> rules)
      : table_(std::move(table)), rules_(std::move(rules)) {}
  const char* kind() const override { return "contextual_rules"; }
  BatchResult transliterate(const std::vector<std::string>& sentences) override {
    BatchResult out;
    for (const auto& s : sentences) {
      auto r = transliterate_contextual(s, table_, rules_);
      out.sentences.push_back(std::move(r.text));
      out.unknown_tokens.insert(out.unknown_tokens.end(), r.unknown_tokens.begin(),
                                r.unknown_tokens.end());
    }
    return out;
  }

 private:
  TranslitTable table_;
  std::vector<ContextRule> rules_;
};

// --- remote provider -----------------------------------------------------------

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Transport seam so tests can script responses and record call patterns.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const std::string& path, const std::string& json_body) = 0;
};

struct EndpointConfig {
  std::string host = "127.0.0.1";
  int port = 80;
  std::string path = "/transliterate";
  double timeout_sec = 5.0;
  int max_attempts = 3;
  int backoff_base_ms = 100;  // doubles per retry
  int max_in_flight = 4;
  std::filesystem::path cache_path;  // empty = no cache

  void validate() const {
    SHAASR_CHECK(!host.empty() && port > 0 && !path.empty(), ErrKind::kConfig,
                 "config error: remote endpoint needs host/port/path");
    SHAASR_CHECK(max_attempts >= 1 && max_in_flight >= 1, ErrKind::kConfig,
                 "config error: max_attempts and max_in_flight must be >= 1");
  }
};

/// Append-only disk cache keyed by the exact input sentence.  Records are
/// `fnv64hex TAB b64(sentence) TAB b64(result)`; the file is guarded by an
/// exclusive advisory lock while appending.
class TranslitCache {
 public:
  explicit TranslitCache(std::filesystem::path path) : path_(std::move(path)) { load(); }

  std::optional<std::string> lookup(const std::string& sentence) const {
    auto it = map_.find(sentence);
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }

  void append(const std::vector<std::pair<std::string, std::string>>& entries) {
    if (entries.empty()) return;
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    FILE* f = std::fopen(path_.string().c_str(), "ab");
    SHAASR_CHECK(f != nullptr, ErrKind::kData, "data error: cannot open cache %s",
                 path_.string().c_str());
    int fd = fileno(f);
    if (flock(fd, LOCK_EX) != 0) {
      std::fclose(f);
      SHAASR_THROW(ErrKind::kData, "data error: cannot lock cache %s", path_.string().c_str());
    }
    for (const auto& [sentence, result] : entries) {
      char hash[17];
      std::snprintf(hash, sizeof(hash), "%016llx",
                    static_cast<unsigned long long>(fnv1a64(sentence)));
      std::string line = std::string(hash) + "\t" +
                         b64::encode(reinterpret_cast<const unsigned char*>(sentence.data()),
                                     sentence.size()) +
                         "\t" +
                         b64::encode(reinterpret_cast<const unsigned char*>(result.data()),
                                     result.size()) +
                         "\n";
      std::fwrite(line.data(), 1, line.size(), f);
      map_[sentence] = result;
    }
    std::fflush(f);
    flock(fd, LOCK_UN);
    std::fclose(f);
  }

 private:
  void load() {
    if (path_.empty() || !std::filesystem::exists(path_)) return;
    for (const auto& line : read_lines(path_)) {
      if (line.empty()) continue;
      auto cols = split_on(line, '\t');
      SHAASR_CHECK(cols.size() == 3, ErrKind::kData, "parse error: bad cache record in %s",
                   path_.string().c_str());
      auto sentence = b64::decode(cols[1]);
      auto result = b64::decode(cols[2]);
      map_[std::string(sentence.begin(), sentence.end())] =
          std::string(result.begin(), result.end());
    }
  }

  std::filesystem::path path_;
  std::map<std::string, std::string> map_;
};

/// Per-sentence outcome of a remote batch.
struct RemoteOutcome {
  bool ok = false;
  std::string text;
  std::string error;
};

/// Issues one POST per sentence (body: JSON list with that sentence; response:
/// JSON list of strings), with bounded in-flight requests, retries with
/// exponential backoff, and the disk cache consulted first.
inline std::vector<RemoteOutcome> remote_transliterate(
    const std::vector<std::string>& sentences, const EndpointConfig& cfg,
    Transport& transport, TranslitCache* cache) {
  cfg.validate();
  std::vector<RemoteOutcome> outcomes(sentences.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (cache) {
      if (auto hit = cache->lookup(sentences[i])) {
        outcomes[i] = {true, *hit, ""};
        continue;
      }
    }
    pending.push_back(i);
  }
  if (!pending.empty()) {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        std::size_t slot = next.fetch_add(1);
        if (slot >= pending.size()) return;
        std::size_t idx = pending[slot];
        nlohmann::json req = nlohmann::json::array({sentences[idx]});
        std::string last_err = "no attempt made";
        for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
          if (attempt > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(cfg.backoff_base_ms << (attempt - 1)));
          }
          HttpResponse resp;
          try {
            resp = transport.post(cfg.path, req.dump());
          } catch (const std::exception& e) {
            last_err = e.what();
            continue;
          }
          if (resp.status != 200) {
            last_err = "http status " + std::to_string(resp.status);
            continue;
          }
          try {
            auto parsed = nlohmann::json::parse(resp.body);
            if (!parsed.is_array() || parsed.size() != 1 || !parsed[0].is_string()) {
              last_err = "malformed response body";
              continue;
            }
            outcomes[idx] = {true, parsed[0].get<std::string>(), ""};
            break;
          } catch (const std::exception& e) {
            last_err = std::string("bad json: ") + e.what();
          }
        }
        if (!outcomes[idx].ok) outcomes[idx].error = last_err;
      }
    };
    std::size_t nworkers = std::min<std::size_t>(cfg.max_in_flight, pending.size());
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < nworkers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (cache) {
    std::vector<std::pair<std::string, std::string>> fresh;
    for (std::size_t idx : pending) {
      if (outcomes[idx].ok) fresh.emplace_back(sentences[idx], outcomes[idx].text);
    }
    cache->append(fresh);
  }
  return outcomes;
}

class RemoteProvider : public TranslitProvider {
 public:
  RemoteProvider(EndpointConfig cfg, std::shared_ptr<Transport> transport)
      : cfg_(std::move(cfg)), transport_(std::move(transport)) {
    cfg_.validate();
    if (!cfg_.cache_path.empty()) cache_ = std::make_unique<TranslitCache>(cfg_.cache_path);
  }

  const char* kind() const override { return "remote"; }

  BatchResult transliterate(const std::vector<std::string>& sentences) override {
    auto outcomes = remote_transliterate(sentences, cfg_, *transport_, cache_.get());
    BatchResult out;
    std::string failures;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      if (!outcomes[i].ok) {
        if (!failures.empty()) failures += "; ";
        failures += "sentence " + std::to_string(i) + ": " + outcomes[i].error;
      }
      out.sentences.push_back(outcomes[i].text);
    }
    SHAASR_CHECK(failures.empty(), ErrKind::kService, "service error: %s", failures.c_str());
    return out;
  }

 private:
  EndpointConfig cfg_;
  std::shared_ptr<Transport> transport_;
  std::unique_ptr<TranslitCache> cache_;
};

}  // namespace shaasr

#endif  // SHAASR_TRANSLIT_HPP_
