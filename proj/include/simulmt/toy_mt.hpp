// Copyright 2026 The simulmt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// A constructed (not trained) encoder-decoder translator.
//
// ToyModel is a rule-based transducer that exposes the interface of a neural
// full-sentence model: an incremental encoder producing one state per source
// token, a decoder state per target prefix, and one soft-attention row per
// decoding step. The rules cover the alignment shapes a policy has to cope
// with:
//
//   w        -> t          one-to-one
//   w        -> t t'       one-to-two (fertility 2)
//   u v      -> m          two-to-one (multiword key)
//   a b      -> T(b) T(a)  local reordering (swap rule)
//
// Translation of a full sentence equals the gold target of every generated
// corpus example, so streaming output can be compared against an exact
// reference.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "simulmt/core.hpp"
#include "simulmt/policy_model.hpp"

namespace simulmt {

inline const std::string kEndOfSentence = "</s>";
// Emitted when a target is requested before its source has arrived.
inline const std::string kFiller = "<wait>";

// ============================================================================
// Model interface consumed by the decoder
// ============================================================================

struct Candidate {
  std::string token;
  double log_prob = 0.0;
};

struct SourceView {
  std::span<const std::string> tokens;
  std::span<const StateVec> states;
  bool complete = false;  // no further source tokens will arrive in this segment
};

class TranslationModel {
 public:
  virtual ~TranslationModel() = default;
  virtual std::size_t embed_dim() const = 0;
  // Encoder state of `token` at 1-based `position`; depends on nothing else.
  virtual StateVec encode_token(const std::string& token, std::size_t position) const = 0;
  virtual StateVec decoder_state(std::span<const std::string> target_prefix) const = 0;
  // Next-token candidates, best first, log-probabilities <= 0.
  virtual std::vector<Candidate> next_candidates(const SourceView& source,
                                                 std::span<const std::string> target_prefix,
                                                 std::size_t max_candidates) const = 0;
};

// ============================================================================
// Toy model
// ============================================================================

struct PlanItem {
  std::string token;
  std::vector<std::size_t> sources;  // 0-based aligned source positions
};

struct DecodeStep {
  std::string token;
  std::vector<double> energies;   // e_{i,j} = log alpha_{i,j}
  std::vector<double> attention;  // alpha_{i,j} over available source
  StateVec context;               // c_i = sum_j alpha_{i,j} h_j
  StateVec decoder_state;         // s_i
};

struct ParallelExample {
  std::vector<std::string> src;
  std::vector<std::string> tgt;
  std::vector<std::vector<std::size_t>> alignment;  // per target, 0-based source positions

  friend bool operator==(const ParallelExample&, const ParallelExample&) = default;
};

class ToyModel : public TranslationModel {
 public:
  std::map<std::string, std::vector<std::string>> dictionary;
  std::map<std::pair<std::string, std::string>, std::string> multiword;
  std::set<std::pair<std::string, std::string>> swap_rules;
  std::size_t dim = 16;
  std::uint64_t seed = 0;
  double attn_sharpness = 0.8;
  // Extra low-probability candidates per step, only relevant to beam search.
  std::size_t beam_alternatives = 0;

  void validate() const {
    if (dim < 4) throw ValidationError("embed_dim must be >= 4");
    if (!(attn_sharpness > 0.5 && attn_sharpness <= 1.0))
      throw ValidationError("attn_sharpness must be in (0.5, 1]");
    for (const auto& [key, tgt] : multiword)
      if (!dictionary.count(key.first) || !dictionary.count(key.second))
        throw ValidationError("multiword key uses a word without a dictionary entry");
    for (const auto& [a, b] : swap_rules)
      if (!dictionary.count(a) || !dictionary.count(b))
        throw ValidationError("swap rule uses a word without a dictionary entry");
  }

  std::size_t embed_dim() const override { return dim; }

  bool knows_source(const std::string& token) const { return dictionary.count(token) > 0; }

  // True if `token` followed by the right word would trigger a two-word rule.
  bool starts_rule(const std::string& token) const {
    auto key_it = multiword.lower_bound({token, std::string()});
    if (key_it != multiword.end() && key_it->first.first == token) return true;
    auto swap_it = swap_rules.lower_bound({token, std::string()});
    return swap_it != swap_rules.end() && swap_it->first == token;
  }

  // Left-to-right transduction of an available source prefix. Stops early
  // (setting *pending) when the last available token may begin a two-word
  // rule and more source can still arrive.
  std::vector<PlanItem> plan(std::span<const std::string> src, bool complete, bool* pending = nullptr) const {
    std::vector<PlanItem> out;
    if (pending) *pending = false;
    std::size_t k = 0;
    while (k < src.size()) {
      require_source(src[k]);
      if (k + 1 < src.size()) {
        auto key = std::make_pair(src[k], src[k + 1]);
        if (auto it = multiword.find(key); it != multiword.end()) {
          out.push_back({it->second, {k, k + 1}});
          k += 2;
          continue;
        }
        if (swap_rules.count(key)) {
          require_source(src[k + 1]);
          for (const auto& t : dictionary.at(src[k + 1])) out.push_back({t, {k + 1}});
          for (const auto& t : dictionary.at(src[k])) out.push_back({t, {k}});
          k += 2;
          continue;
        }
      } else if (!complete && starts_rule(src[k])) {
        if (pending) *pending = true;
        break;
      }
      for (const auto& t : dictionary.at(src[k])) out.push_back({t, {k}});
      ++k;
    }
    return out;
  }

  ParallelExample translate_example(const std::vector<std::string>& src) const {
    ParallelExample ex;
    ex.src = src;
    for (auto& item : plan(src, true)) {
      ex.tgt.push_back(std::move(item.token));
      ex.alignment.push_back(std::move(item.sources));
    }
    return ex;
  }

  const StateVec& embedding(const std::string& token) const {
    auto it = embeddings_.find(token);
    if (it == embeddings_.end()) throw DataError("unknown token '" + token + "'");
    return it->second;
  }

  // Constant, linear and sinusoidal position features. The constant and
  // linear terms let a bilinear head express functions of j - i exactly.
  StateVec position(std::size_t pos) const {
    StateVec p(dim, 0.0);
    const double x = static_cast<double>(pos);
    p[0] = 1.0;
    p[1] = x / 8.0;
    for (std::size_t k = 2; k + 1 < dim; k += 2) {
      const double freq = std::numbers::pi / (2.0 * static_cast<double>(1u << ((k - 2) / 2 % 8)));
      p[k] = 2.0 * std::sin(freq * x);
      p[k + 1] = 2.0 * std::cos(freq * x);
    }
    return p;
  }

  StateVec encode_token(const std::string& token, std::size_t position_1based) const override {
    require_source(token);
    StateVec h = position(position_1based);
    const StateVec& e = embedding(token);
    for (std::size_t k = 0; k < dim; ++k) h[k] += e[k];
    return h;
  }

  std::vector<StateVec> encode(std::span<const std::string> src_prefix) const {
    std::vector<StateVec> states;
    states.reserve(src_prefix.size());
    for (std::size_t j = 0; j < src_prefix.size(); ++j) states.push_back(encode_token(src_prefix[j], j + 1));
    return states;
  }

  StateVec decoder_state(std::span<const std::string> prefix) const override {
    StateVec s = position(prefix.size() + 1);
    if (prefix.empty()) return s;
    const double inv = 1.0 / static_cast<double>(prefix.size());
    for (const auto& t : prefix) {
      const StateVec& e = embedding(t);
      for (std::size_t k = 0; k < dim; ++k) s[k] += e[k] * inv;
    }
    return s;
  }

  // One decoder step over the available source. Past the end of the plan the
  // step yields </s> when the source is complete and the filler otherwise.
  DecodeStep decode_step(const SourceView& src, std::span<const std::string> prefix) const {
    if (src.tokens.empty()) throw ValidationError("decode_step needs at least one source state");
    const std::size_t n = src.tokens.size();
    const std::vector<PlanItem> items = plan(src.tokens, src.complete);
    const std::size_t i = prefix.size();

    DecodeStep step;
    std::size_t focus = n - 1;
    if (i < items.size()) {
      step.token = items[i].token;
      focus = *std::max_element(items[i].sources.begin(), items[i].sources.end());
    } else {
      step.token = src.complete ? kEndOfSentence : kFiller;
    }

    step.attention = attention_row(n, focus);
    step.energies.resize(n);
    for (std::size_t j = 0; j < n; ++j) step.energies[j] = std::log(std::max(step.attention[j], 1e-300));

    step.context.assign(dim, 0.0);
    const bool have_states = src.states.size() == n;
    for (std::size_t j = 0; j < n; ++j) {
      const StateVec h = have_states ? src.states[j] : encode_token(src.tokens[j], j + 1);
      for (std::size_t k = 0; k < dim; ++k) step.context[k] += step.attention[j] * h[k];
    }
    step.decoder_state = decoder_state(prefix);
    return step;
  }

  std::vector<Candidate> next_candidates(const SourceView& src, std::span<const std::string> prefix,
                                         std::size_t max_candidates) const override {
    DecodeStep step = decode_step(src, prefix);
    std::vector<Candidate> out;
    if (beam_alternatives == 0) {
      out.push_back({std::move(step.token), 0.0});
      return out;
    }
    out.push_back({std::move(step.token), std::log(0.9)});
    const double alt = std::log(0.1 / static_cast<double>(beam_alternatives));
    for (std::size_t k = 0; k < beam_alternatives && out.size() < max_candidates; ++k)
      out.push_back({"<alt" + std::to_string(k + 1) + ">", alt - 1e-3 * static_cast<double>(k)});
    return out;
  }

  // Sharpness on the focus position, the rest spread evenly.
  std::vector<double> attention_row(std::size_t n, std::size_t focus) const {
    std::vector<double> row(n, 0.0);
    if (n == 1) {
      row[0] = 1.0;
      return row;
    }
    const double rest = (1.0 - attn_sharpness) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) row[j] = j == focus ? attn_sharpness : rest;
    return row;
  }

  // Registers a token's embedding; called for every source and target word.
  void add_embedding(const std::string& token) {
    if (embeddings_.count(token)) return;
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : token) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    std::mt19937_64 rng(seed ^ h);
    std::normal_distribution<double> normal(0.0, 0.1);
    StateVec e(dim);
    for (auto& v : e) v = normal(rng);
    embeddings_.emplace(token, std::move(e));
  }

  // Rebuilds embeddings after the rule tables or seed changed.
  void finalize() {
    validate();
    embeddings_.clear();
    for (const auto& [src, tgt] : dictionary) {
      add_embedding(src);
      for (const auto& t : tgt) add_embedding(t);
    }
    for (const auto& [key, tgt] : multiword) add_embedding(tgt);
    add_embedding(kEndOfSentence);
    add_embedding(kFiller);
    for (std::size_t k = 0; k < beam_alternatives; ++k) add_embedding("<alt" + std::to_string(k + 1) + ">");
  }

 private:
  void require_source(const std::string& token) const {
    if (!dictionary.count(token)) throw DataError("unknown source token '" + token + "'");
  }

  std::map<std::string, StateVec> embeddings_;
};

inline std::vector<StateVec> encode(const ToyModel& model, std::span<const std::string> src_prefix) {
  return model.encode(src_prefix);
}

struct Translation {
  std::vector<std::string> tokens;
  AttentionMatrix attention;
};

// Non-streaming reference: encode everything, decode to </s>.
inline Translation full_sentence_translate(const ToyModel& model, std::span<const std::string> src) {
  if (src.empty() || !is_sentence_final(src.back()))
    throw ValidationError("full-sentence translation needs a source ending in . ? or !");
  const std::vector<StateVec> states = model.encode(src);
  SourceView view{src, states, true};
  std::vector<std::string> out;
  std::vector<std::vector<double>> rows;
  const std::size_t cap = 2 * src.size() + 5;
  while (out.size() < cap) {
    DecodeStep step = model.decode_step(view, out);
    if (step.token == kEndOfSentence) break;
    rows.push_back(std::move(step.attention));
    out.push_back(std::move(step.token));
  }
  Translation t;
  t.tokens = std::move(out);
  t.attention = AttentionMatrix::from_rows(rows);
  return t;
}

// ============================================================================
// Corpus generation
// ============================================================================

struct FertilityProbs {
  double one_to_one = 1.0;
  double one_to_two = 0.0;
  double two_to_one = 0.0;
};

struct CorpusConfig {
  std::size_t vocab_size = 40;
  std::size_t sentence_count = 200;
  std::size_t min_len = 4;
  std::size_t max_len = 12;
  double swap_prob = 0.0;
  FertilityProbs fertility;
  std::uint64_t seed = 1;
  std::size_t embed_dim = 16;
  double attn_sharpness = 0.8;
  std::size_t beam_alternatives = 0;

  void validate() const {
    if (vocab_size == 0) throw ValidationError("vocab_size must be > 0");
    if (min_len == 0 || min_len > max_len) throw ValidationError("need 0 < min_len <= max_len");
    if (!(swap_prob >= 0.0 && swap_prob <= 1.0)) throw ValidationError("swap_prob must be in [0, 1]");
    const auto& f = fertility;
    if (f.one_to_one < 0 || f.one_to_two < 0 || f.two_to_one < 0 ||
        f.one_to_one + f.one_to_two + f.two_to_one <= 0.0)
      throw ValidationError("fertility probabilities must be non-negative with a positive sum");
  }
};

struct Corpus {
  ToyModel model;
  std::vector<ParallelExample> examples;
  // Word classes used by the generator.
  std::vector<std::string> plain_words, double_words, key_words, swap_words;
};

namespace detail {

inline std::string source_word(std::size_t n) { return "s" + std::to_string(n); }
inline std::string target_word(std::size_t n) { return "t" + std::to_string(n); }

}  // namespace detail

// Builds the model's rule tables from the config. Vocabulary is partitioned
// into plain 1:1 words, fertility-2 words, multiword-key words and swap
// starters; only classes with non-zero probability are populated.
inline Corpus build_model(const CorpusConfig& cfg) {
  cfg.validate();
  Corpus c;
  ToyModel& m = c.model;
  m.dim = cfg.embed_dim;
  m.seed = cfg.seed;
  m.attn_sharpness = cfg.attn_sharpness;
  m.beam_alternatives = cfg.beam_alternatives;

  const std::size_t v = cfg.vocab_size;
  const std::size_t n_double = cfg.fertility.one_to_two > 0 ? std::max<std::size_t>(1, v / 5) : 0;
  const std::size_t n_key = cfg.fertility.two_to_one > 0 ? 2 * std::max<std::size_t>(1, v / 10) : 0;
  const std::size_t n_swap = cfg.swap_prob > 0 ? std::max<std::size_t>(1, v / 10) : 0;
  if (n_double + n_key + n_swap >= v)
    throw ValidationError("vocab_size " + std::to_string(v) + " too small for the requested rule classes");

  std::size_t next = 0;
  auto take = [&](std::size_t count, std::vector<std::string>& into) {
    for (std::size_t k = 0; k < count; ++k) into.push_back(detail::source_word(next++));
  };
  take(n_double, c.double_words);
  take(n_key, c.key_words);
  take(n_swap, c.swap_words);
  take(v - next, c.plain_words);

  auto add_word = [&](const std::string& w, std::size_t fertility) {
    std::string t = "t" + w.substr(1);
    m.dictionary[w] = fertility == 2 ? std::vector<std::string>{t, t + "x"} : std::vector<std::string>{t};
  };
  for (const auto& w : c.plain_words) add_word(w, 1);
  for (const auto& w : c.double_words) add_word(w, 2);
  for (const auto& w : c.key_words) add_word(w, 1);
  for (const auto& w : c.swap_words) add_word(w, 1);
  for (const std::string p : {",", ".", "?", "!"}) m.dictionary[p] = {p};

  for (std::size_t k = 0; k + 1 < c.key_words.size(); k += 2)
    m.multiword[{c.key_words[k], c.key_words[k + 1]}] = "m" + c.key_words[k].substr(1) + "_" + c.key_words[k + 1].substr(1);
  for (std::size_t k = 0; k < c.swap_words.size(); ++k)
    m.swap_rules.insert({c.swap_words[k], c.plain_words[k % c.plain_words.size()]});

  m.finalize();
  return c;
}

// Deterministic synthetic corpus. Each sentence is a sequence of rule units
// followed by one of . ? !, and its target is the model's own translation.
inline Corpus gen_corpus(const CorpusConfig& cfg) {
  Corpus c = build_model(cfg);
  const ToyModel& m = c.model;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> length(cfg.min_len, cfg.max_len);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::discrete_distribution<int> fertility(
      {cfg.fertility.one_to_one, cfg.fertility.one_to_two, cfg.fertility.two_to_one});
  auto pick = [&](const std::vector<std::string>& words) -> const std::string& {
    return words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng)];
  };
  static const std::vector<std::string> finals = {".", "?", "!"};

  for (std::size_t s = 0; s < cfg.sentence_count; ++s) {
    const std::size_t target_len = length(rng);
    std::vector<std::string> src;
    while (src.size() < target_len) {
      const bool room_for_two = src.size() + 2 <= target_len;
      if (room_for_two && !c.swap_words.empty() && unit(rng) < cfg.swap_prob) {
        const auto& a = pick(c.swap_words);
        auto it = m.swap_rules.lower_bound({a, std::string()});
        src.push_back(it->first);
        src.push_back(it->second);
        continue;
      }
      int kind = fertility(rng);
      if (kind == 1 && !c.double_words.empty()) {
        src.push_back(pick(c.double_words));
      } else if (kind == 2 && room_for_two && !c.key_words.empty()) {
        std::size_t k = std::uniform_int_distribution<std::size_t>(0, c.key_words.size() / 2 - 1)(rng);
        src.push_back(c.key_words[2 * k]);
        src.push_back(c.key_words[2 * k + 1]);
      } else {
        src.push_back(pick(c.plain_words));
      }
    }
    src.push_back(pick(finals));
    c.examples.push_back(m.translate_example(src));
  }
  return c;
}

}  // namespace simulmt
