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

// Streaming ASR front-end simulator.
//
// Replays a word-timed transcript as the event stream of a beam-search
// recognizer:
//   PARTIAL  every partial_interval_sec, all words that have ended so far
//            (only when that set grew);
//   FINAL    the converged prefix. Word k converges at the first tick after
//            word k + stability_lag_words has ended, and is force-finalized
//            exactly final_timeout_sec after its own end if that is sooner;
//   END_OF_STREAM once every word is FINAL.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "simulmt/core.hpp"

namespace simulmt {

struct TimedWord {
  std::string token;
  double start_sec = 0.0;
  double end_sec = 0.0;
  // Opaque pass-through fields (speaker, language, ...).
  std::map<std::string, std::string> annotations;

  friend bool operator==(const TimedWord&, const TimedWord&) = default;
};

struct TimedTranscript {
  std::vector<TimedWord> words;

  std::vector<std::string> tokens() const {
    std::vector<std::string> out;
    for (const auto& w : words) out.push_back(w.token);
    return out;
  }
  std::vector<double> end_times() const {
    std::vector<double> out;
    for (const auto& w : words) out.push_back(w.end_sec);
    return out;
  }
  double first_start() const { return words.empty() ? 0.0 : words.front().start_sec; }
  double last_end() const { return words.empty() ? 0.0 : words.back().end_sec; }
};

struct AsrSimConfig {
  double partial_interval_sec = 0.3;
  double final_timeout_sec = 1.5;
  std::size_t stability_lag_words = 2;

  void validate() const {
    if (!(partial_interval_sec > 0.0)) throw ValidationError("partial_interval_sec must be > 0");
    if (!(final_timeout_sec > 0.0)) throw ValidationError("final_timeout_sec must be > 0");
  }
};

inline void validate_transcript(const TimedTranscript& t) {
  for (std::size_t k = 0; k < t.words.size(); ++k) {
    const auto& w = t.words[k];
    if (w.start_sec < 0.0 || w.end_sec < w.start_sec)
      throw ValidationError("word " + std::to_string(k + 1) + " has invalid times");
    if (k > 0 && w.start_sec < t.words[k - 1].start_sec)
      throw ValidationError("word " + std::to_string(k + 1) + " starts before its predecessor");
  }
}

// Words spoken back to back with a fixed duration; punctuation is attached
// with zero duration at the end of the preceding word.
inline TimedTranscript uniform_transcript(std::span<const std::string> tokens, double word_duration_sec,
                                          double start_sec = 0.0) {
  TimedTranscript t;
  double clock = start_sec;
  for (const auto& tok : tokens) {
    if (is_punct(tok) && !t.words.empty()) {
      t.words.push_back({tok, clock, clock, {}});
      continue;
    }
    t.words.push_back({tok, clock, clock + word_duration_sec, {}});
    clock += word_duration_sec;
  }
  return t;
}

namespace detail {

inline double first_tick_at_or_after(double t, double interval) {
  double m = std::ceil(t / interval - 1e-9);
  return std::max(1.0, m) * interval;
}

}  // namespace detail

inline std::vector<StreamEvent> simulate_stream(const TimedTranscript& t, const AsrSimConfig& cfg) {
  cfg.validate();
  validate_transcript(t);
  const std::size_t n = t.words.size();
  if (n == 0) return {StreamEvent{0.0, EventKind::kEndOfStream, {}}};

  const std::vector<std::string> tokens = t.tokens();
  const double interval = cfg.partial_interval_sec;

  // Time at which each word would trigger a FINAL covering it.
  std::vector<double> trigger(n);
  for (std::size_t k = 0; k < n; ++k) {
    double forced = t.words[k].end_sec + cfg.final_timeout_sec;
    double natural = forced;
    if (k + cfg.stability_lag_words < n) {
      double stable = std::max(t.words[k].end_sec, t.words[k + cfg.stability_lag_words].end_sec);
      natural = detail::first_tick_at_or_after(stable, interval);
    }
    trigger[k] = std::min(natural, forced);
  }
  // A FINAL covers a prefix, so word k is final once any later word is.
  std::vector<double> final_at(n);
  final_at[n - 1] = trigger[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) final_at[k] = std::min(trigger[k], final_at[k + 1]);

  std::vector<double> times;
  const double horizon = *std::max_element(final_at.begin(), final_at.end());
  for (std::size_t m = 1;; ++m) {
    double tick = static_cast<double>(m) * interval;
    if (tick > horizon + 1e-12) break;
    times.push_back(tick);
  }
  times.insert(times.end(), final_at.begin(), final_at.end());
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  auto prefix = [&](std::size_t count) {
    return std::vector<std::string>(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(count));
  };

  std::vector<StreamEvent> events;
  std::size_t finals = 0, partials = 0;
  for (double now : times) {
    std::size_t final_count = finals;
    while (final_count < n && final_at[final_count] <= now) ++final_count;
    if (final_count > finals) {
      finals = final_count;
      events.push_back({now, EventKind::kFinal, prefix(finals)});
    }
    const double ratio = now / interval;
    const bool is_tick = std::abs(ratio - std::round(ratio)) < 1e-9;
    if (!is_tick) continue;
    std::size_t heard = 0;
    while (heard < n && t.words[heard].end_sec <= now + 1e-12) ++heard;
    if (heard > partials && heard > finals) {
      partials = heard;
      events.push_back({now, EventKind::kPartial, prefix(heard)});
    }
    partials = std::max(partials, heard);
  }
  events.push_back({std::max(t.last_end(), final_at.back()), EventKind::kEndOfStream, tokens});
  return events;
}

// ============================================================================
// Transcript files: JSONL, one {"w": token, "s": start, "e": end} per line
// ============================================================================

inline TimedTranscript parse_timed_transcript(std::istream& in, const std::string& name = "<input>") {
  TimedTranscript t;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) -> void {
    throw DataError(name + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("w") || !j["w"].is_string()) fail("missing string field \"w\"");
    TimedWord w;
    w.token = j["w"].get<std::string>();
    if (is_punct(w.token) && !t.words.empty()) {
      w.start_sec = w.end_sec = t.words.back().end_sec;
    } else {
      if (!j.contains("s") || !j["s"].is_number() || !j.contains("e") || !j["e"].is_number())
        fail("missing numeric fields \"s\" and \"e\"");
      w.start_sec = j["s"].get<double>();
      w.end_sec = j["e"].get<double>();
      if (w.start_sec < 0.0 || w.end_sec < 0.0) fail("negative time");
      if (w.end_sec < w.start_sec) fail("end time before start time");
      if (!t.words.empty() && w.start_sec < t.words.back().start_sec) fail("start time goes backwards");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() == "w" || it.key() == "s" || it.key() == "e") continue;
      w.annotations[it.key()] = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
    }
    t.words.push_back(std::move(w));
  }
  return t;
}

inline TimedTranscript load_timed_transcript(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open transcript " + path);
  return parse_timed_transcript(in, path);
}

inline void save_timed_transcript(const TimedTranscript& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write transcript " + path);
  for (const auto& w : t.words) {
    nlohmann::json j = {{"w", w.token}, {"s", w.start_sec}, {"e", w.end_sec}};
    for (const auto& [k, v] : w.annotations) j[k] = v;
    out << j.dump() << '\n';
  }
}

// ============================================================================
// Replay
// ============================================================================

enum class ReplayMode { kLogical, kRealTime };

// Delivers events in order. Real-time mode sleeps until each event's
// timestamp (scaled by time_scale); the event list itself is identical.
inline void replay(std::span<const StreamEvent> events, ReplayMode mode,
                   const std::function<void(const StreamEvent&)>& sink, double time_scale = 1.0) {
  const auto start = std::chrono::steady_clock::now();
  for (const auto& ev : events) {
    if (mode == ReplayMode::kRealTime) {
      auto due = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                             std::chrono::duration<double>(ev.time_sec * time_scale));
      std::this_thread::sleep_until(due);
    }
    sink(ev);
  }
}

}  // namespace simulmt
