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

// Latency and quality metrics over finished session traces.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "simulmt/core.hpp"

namespace simulmt {

enum class LagUnit { kTokens, kSeconds };

struct LatencyReport {
  double al = 0.0;
  double upl_first_sec = 0.0;
  double upl_last_sec = 0.0;
};

// Average Lag over one segment:
//
//   AL = 1/tau * sum_{i=1..tau} [ d(g_i) - (i-1) * D / |y| ],
//   tau = first i with g_i = |x|
//
// Tokens: d(g) = g, D = |x|. Seconds: d(g) = end time of source token g and
// D = end time of the last source token, both relative to segment start.
inline double average_lag(std::span<const std::size_t> g, std::size_t source_len, std::size_t target_len,
                          LagUnit unit = LagUnit::kTokens, std::span<const double> source_end_times = {}) {
  if (g.empty()) throw ValidationError("average lag of an empty trace");
  if (source_len == 0 || target_len == 0) throw ValidationError("average lag needs non-empty source and target");
  if (unit == LagUnit::kSeconds && source_end_times.size() < source_len)
    throw DimensionError("seconds-mode average lag needs one end time per source token");

  auto delay = [&](std::size_t gi) -> double {
    if (unit == LagUnit::kTokens) return static_cast<double>(gi);
    return gi == 0 ? 0.0 : source_end_times[std::min(gi, source_len) - 1];
  };
  const double total = unit == LagUnit::kTokens ? static_cast<double>(source_len) : source_end_times[source_len - 1];
  const double rate = total / static_cast<double>(target_len);

  std::size_t tau = g.size();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g[i] >= source_len) {
      tau = i + 1;
      break;
    }
  double sum = 0.0;
  for (std::size_t i = 0; i < tau; ++i) sum += delay(g[i]) - static_cast<double>(i) * rate;
  return sum / static_cast<double>(tau);
}

inline double average_lag(std::span<const WriteRecord> writes, std::size_t source_len, std::size_t target_len,
                          LagUnit unit = LagUnit::kTokens, std::span<const double> source_end_times = {}) {
  std::vector<std::size_t> g;
  g.reserve(writes.size());
  for (const auto& w : writes) g.push_back(w.g);
  return average_lag(std::span<const std::size_t>(g), source_len, target_len, unit, source_end_times);
}

struct UserPerceivedLatency {
  double first_sec = 0.0;
  double last_sec = 0.0;
};

// Delay of the first output after the first input frame, and of the last
// output after the last input frame.
inline UserPerceivedLatency upl(std::span<const WriteRecord> writes, double first_input_time,
                                double last_input_time) {
  if (writes.empty()) throw ValidationError("user-perceived latency needs at least one write");
  return {writes.front().write_time_sec - first_input_time, writes.back().write_time_sec - last_input_time};
}

// ============================================================================
// BLEU
// ============================================================================

struct NgramStats {
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
  std::size_t matches[4] = {0, 0, 0, 0};
  std::size_t totals[4] = {0, 0, 0, 0};

  NgramStats& operator+=(const NgramStats& o) {
    hyp_len += o.hyp_len;
    ref_len += o.ref_len;
    for (int n = 0; n < 4; ++n) {
      matches[n] += o.matches[n];
      totals[n] += o.totals[n];
    }
    return *this;
  }
};

inline NgramStats ngram_stats(std::span<const std::string> hyp, std::span<const std::string> ref) {
  NgramStats s;
  s.hyp_len = hyp.size();
  s.ref_len = ref.size();
  for (std::size_t n = 1; n <= 4; ++n) {
    std::map<std::vector<std::string>, std::size_t> ref_counts;
    for (std::size_t k = 0; k + n <= ref.size(); ++k) ++ref_counts[{ref.begin() + k, ref.begin() + k + n}];
    std::map<std::vector<std::string>, std::size_t> hyp_counts;
    for (std::size_t k = 0; k + n <= hyp.size(); ++k) ++hyp_counts[{hyp.begin() + k, hyp.begin() + k + n}];
    for (const auto& [gram, c] : hyp_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) s.matches[n - 1] += std::min(c, it->second);
    }
    s.totals[n - 1] = hyp.size() >= n ? hyp.size() - n + 1 : 0;
  }
  return s;
}

// smoothing_from: n-gram order (1-based) from which add-one smoothing
// applies; 5 disables it.
inline double bleu_from_stats(const NgramStats& s, int smoothing_from = 5) {
  if (s.hyp_len == 0) return 0.0;
  double log_sum = 0.0;
  for (int n = 0; n < 4; ++n) {
    double m = static_cast<double>(s.matches[n]);
    double t = static_cast<double>(s.totals[n]);
    if (n + 1 >= smoothing_from) {
      m += 1.0;
      t += 1.0;
    }
    if (m == 0.0 || t == 0.0) return 0.0;
    log_sum += std::log(m / t);
  }
  const double c = static_cast<double>(s.hyp_len), r = static_cast<double>(s.ref_len);
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return 100.0 * bp * std::exp(log_sum / 4.0);
}

// Corpus-level 4-gram BLEU with brevity penalty, no smoothing.
inline double corpus_bleu(std::span<const std::vector<std::string>> hyps,
                          std::span<const std::vector<std::string>> refs) {
  if (hyps.size() != refs.size())
    throw DimensionError("BLEU needs as many hypotheses as references (" + std::to_string(hyps.size()) + " vs " +
                         std::to_string(refs.size()) + ")");
  if (refs.empty()) throw ValidationError("BLEU needs at least one reference");
  NgramStats total;
  for (std::size_t k = 0; k < hyps.size(); ++k) total += ngram_stats(hyps[k], refs[k]);
  return bleu_from_stats(total);
}

inline double corpus_bleu(std::span<const std::string> hyps, std::span<const std::string> refs) {
  std::vector<std::vector<std::string>> h, r;
  for (const auto& s : hyps) h.push_back(split_words(s));
  for (const auto& s : refs) r.push_back(split_words(s));
  return corpus_bleu(std::span<const std::vector<std::string>>(h), std::span<const std::vector<std::string>>(r));
}

// Sentence-level diagnostic with add-one smoothing on 2- to 4-grams.
inline double sentence_bleu(std::span<const std::string> hyp, std::span<const std::string> ref) {
  return bleu_from_stats(ngram_stats(hyp, ref), 2);
}

}  // namespace simulmt
