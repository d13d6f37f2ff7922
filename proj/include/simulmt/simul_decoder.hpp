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

// Simultaneous decoding engine.
//
// A Session consumes ASR stream events and interleaves READ (encode one more
// source token) and WRITE (emit one target token) under a ReadWritePolicy.
//
//   * FINAL / END_OF_STREAM events advance committed state; PARTIAL events
//     are decoded on a scratch copy and only produce display emissions.
//   * The newest token of a mid-segment event is held back until the next
//     event.
//   * Reading a sentence-final source token ends the segment: remaining
//     targets are force-written, then encoder and decoder state are reset.
//     Emitting a sentence-final target resets state as well.
//   * beam_feed() runs a streaming beam search: tokens are emitted once all
//     beams agree on them, or when some beam holds force_finalize_token_limit
//     unemitted tokens, in which case the best beam among the longest ones is
//     kept and emitted.

#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "simulmt/core.hpp"
#include "simulmt/policy_model.hpp"
#include "simulmt/toy_mt.hpp"

namespace simulmt {

struct DecoderConfig {
  double delta = 0.5;
  std::size_t beam_size = 1;
  std::size_t force_finalize_token_limit = 5;
  std::size_t max_consecutive_writes = 0;  // 0 selects 2 * source length + 5
  bool hold_last_token = true;

  void validate() const {
    check_delta(delta);
    if (beam_size == 0) throw ValidationError("beam_size must be >= 1");
    if (force_finalize_token_limit == 0) throw ValidationError("force_finalize_token_limit must be >= 1");
  }
};

struct Emission {
  std::string token;
  double time_sec = 0.0;
  std::size_t segment = 0;
  std::size_t target_index = 0;  // 1-based within the segment
  std::size_t g = 0;
  bool display_only = false;

  friend bool operator==(const Emission&, const Emission&) = default;
};

struct Hypothesis {
  std::vector<std::string> tokens;
  double score = 0.0;
  bool finalized = false;  // produced </s>
};

// Reads k tokens, then alternates: WRITE whenever j - i >= k.
class WaitKPolicy : public ReadWritePolicy {
 public:
  explicit WaitKPolicy(std::size_t k) : k_(k) {
    if (k == 0) throw ValidationError("wait-k needs k >= 1");
  }
  Action decide(const PolicyInput& in) const override {
    return in.source_read >= in.targets_written + k_ ? Action::kWrite : Action::kRead;
  }
  std::size_t k() const { return k_; }

 private:
  std::size_t k_;
};

inline WaitKPolicy wait_k_policy(std::size_t k) { return WaitKPolicy(k); }

class Session {
 public:
  Session(const TranslationModel& model, const ReadWritePolicy& policy, DecoderConfig cfg = {})
      : model_(&model), policy_(&policy), cfg_(cfg) {
    cfg_.validate();
    reset_segment();
  }

  // Substitute gold targets for model output (greedy mode only), so read
  // schedules become comparable across policies.
  void set_forced_target(std::vector<std::string> gold) { forced_ = std::move(gold); }

  std::vector<Emission> feed(const StreamEvent& ev) { return dispatch(ev, Mode::kGreedy); }
  std::vector<Emission> beam_feed(const StreamEvent& ev) { return dispatch(ev, Mode::kBeam); }

  // Ends the current segment: consumes held-back tokens, forces writes to
  // </s>, resets state.
  std::vector<Emission> finalize_segment(double time_sec) {
    if (closed_) throw std::logic_error("session is closed");
    if (mode_ == Mode::kUnset) mode_ = cfg_.beam_size > 1 ? Mode::kBeam : Mode::kGreedy;
    out_.clear();
    time_sec = std::max(time_sec, last_time_);
    last_time_ = time_sec;
    while (consumed_ < delivered_.size()) read_token(delivered_[consumed_++], time_sec);
    finish_segment(time_sec);
    return std::exchange(out_, {});
  }

  const SessionTrace& trace() const { return trace_; }
  bool closed() const { return closed_; }
  std::size_t delivered() const { return delivered_.size(); }
  std::size_t consumed() const { return consumed_; }
  std::size_t segment() const { return segment_; }
  std::size_t segment_source_length() const { return src_tokens_.size(); }
  const std::vector<std::string>& segment_targets() const { return targets_; }
  const std::vector<Hypothesis>& beams() const { return beams_; }
  const DecoderConfig& config() const { return cfg_; }
  std::size_t forced_finalizations() const { return forced_finalizations_; }

 private:
  enum class Mode { kUnset, kGreedy, kBeam };

  std::vector<Emission> dispatch(const StreamEvent& ev, Mode mode) {
    if (closed_) throw std::logic_error("feeding a closed session");
    if (ev.time_sec < last_time_)
      throw DataError("stream event at " + std::to_string(ev.time_sec) + "s is earlier than the previous one at " +
                      std::to_string(last_time_) + "s");
    if (mode_ == Mode::kUnset) mode_ = mode;
    if (mode_ != mode) throw std::logic_error("a session cannot mix greedy and beam decoding");
    last_time_ = ev.time_sec;

    if (ev.kind == EventKind::kPartial) return display(ev);

    if (!extends(ev.tokens, delivered_))
      throw DataError("committed hypothesis at " + std::to_string(ev.time_sec) +
                      "s does not extend the previous FINAL");
    out_.clear();
    advance(ev);
    return std::exchange(out_, {});
  }

  // Translation of a PARTIAL on a throwaway copy.
  std::vector<Emission> display(const StreamEvent& ev) {
    if (!extends(ev.tokens, std::span(delivered_).first(consumed_))) return {};
    Session scratch = *this;
    scratch.out_.clear();
    scratch.delivered_.assign(ev.tokens.begin(), ev.tokens.end());
    scratch.advance(ev);
    for (auto& e : scratch.out_) e.display_only = true;
    return std::move(scratch.out_);
  }

  void advance(const StreamEvent& ev) {
    delivered_.assign(ev.tokens.begin(), ev.tokens.end());
    const bool end_of_stream = ev.kind == EventKind::kEndOfStream;
    std::size_t available = delivered_.size();
    if (!end_of_stream && cfg_.hold_last_token && available > consumed_ && !is_sentence_final(delivered_.back()))
      --available;
    while (consumed_ < available) read_token(delivered_[consumed_++], ev.time_sec);
    if (end_of_stream) {
      finish_segment(ev.time_sec);
      closed_ = true;
    }
  }

  static bool extends(std::span<const std::string> longer, std::span<const std::string> prefix) {
    return longer.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), longer.begin());
  }

  std::size_t write_cap() const {
    return cfg_.max_consecutive_writes ? cfg_.max_consecutive_writes : 2 * src_tokens_.size() + 5;
  }

  SourceView source_view(bool complete) const { return {src_tokens_, src_states_, complete}; }

  const std::vector<std::string>& current_prefix() const {
    return mode_ == Mode::kBeam ? beams_.front().tokens : targets_;
  }

  void read_token(const std::string& token, double t) {
    src_tokens_.push_back(token);
    src_states_.push_back(model_->encode_token(token, src_tokens_.size()));
    src_read_times_.push_back(t);
    trace_.reads.push_back({segment_, src_tokens_.size(), token, t});

    const std::size_t segment_before = segment_;
    const std::size_t cap = write_cap();
    for (std::size_t n = 0; n < cap && segment_ == segment_before; ++n) {
      const std::vector<std::string>& prefix = current_prefix();
      const StateVec s = model_->decoder_state(prefix);
      PolicyInput in{s, src_states_.back(), prefix.size(), src_tokens_.size()};
      if (policy_->decide(in) == Action::kRead) break;
      if (!write_step(t, false)) break;
    }
    if (segment_ == segment_before && is_sentence_final(token)) finish_segment(t);
  }

  void finish_segment(double t) {
    if (src_tokens_.empty()) return;
    const std::size_t segment_before = segment_;
    const std::size_t cap = 2 * src_tokens_.size() + 5;
    for (std::size_t n = 0; n < cap && segment_ == segment_before; ++n)
      if (!write_step(t, true)) break;
    if (segment_ != segment_before) return;
    if (mode_ == Mode::kBeam) {
      // Best finished hypothesis, else best overall.
      auto best = std::find_if(beams_.begin(), beams_.end(), [](const Hypothesis& h) { return h.finalized; });
      if (best == beams_.end()) best = beams_.begin();
      Hypothesis keep = *best;
      beams_ = {keep};
      if (emit_range(keep.tokens, t)) return;
    }
    flush();
  }

  // One WRITE. Returns false when nothing could be written or the segment
  // ended.
  bool write_step(double t, bool complete) {
    return mode_ == Mode::kBeam ? beam_step(t, complete) : greedy_step(t, complete);
  }

  bool greedy_step(double t, bool complete) {
    std::string token;
    if (forced_) {
      const std::size_t i = targets_.size();
      token = i < forced_->size() ? (*forced_)[i] : kEndOfSentence;
      if ((token == kEndOfSentence || is_sentence_final(token)) && !complete) return false;
    } else {
      auto cands = model_->next_candidates(source_view(complete), targets_, 1);
      if (cands.empty()) return false;
      token = std::move(cands.front().token);
    }
    if (token == kEndOfSentence) return false;
    return !emit(token, t);
  }

  bool beam_step(double t, bool complete) {
    std::vector<Hypothesis> next;
    bool progressed = false;
    for (const Hypothesis& h : beams_) {
      if (h.finalized) {
        next.push_back(h);
        continue;
      }
      auto cands = model_->next_candidates(source_view(complete), h.tokens, cfg_.beam_size);
      bool extended = false;
      for (auto& c : cands) {
        Hypothesis n = h;
        n.score += c.log_prob;
        if (c.token == kEndOfSentence) {
          if (!complete) continue;
          n.finalized = true;
        } else {
          n.tokens.push_back(c.token);
        }
        next.push_back(std::move(n));
        extended = true;
      }
      if (!extended) next.push_back(h);
      progressed = progressed || extended;
    }
    if (!progressed) return false;
    std::stable_sort(next.begin(), next.end(),
                     [](const Hypothesis& a, const Hypothesis& b) { return a.score > b.score; });
    if (next.size() > cfg_.beam_size) next.resize(cfg_.beam_size);
    beams_ = std::move(next);

    // Natural finalization: the prefix every beam agrees on.
    std::size_t common = beams_.front().tokens.size();
    for (const auto& h : beams_) {
      std::size_t k = 0;
      while (k < common && k < h.tokens.size() && h.tokens[k] == beams_.front().tokens[k]) ++k;
      common = k;
    }
    if (common > targets_.size()) {
      std::vector<std::string> agreed(beams_.front().tokens.begin(),
                                      beams_.front().tokens.begin() + static_cast<std::ptrdiff_t>(common));
      if (emit_range(agreed, t)) return false;
    }

    // Forced finalization: keep the best of the longest beams.
    std::size_t longest = 0;
    for (const auto& h : beams_) longest = std::max(longest, h.tokens.size());
    if (longest >= targets_.size() + cfg_.force_finalize_token_limit) {
      auto pick = std::find_if(beams_.begin(), beams_.end(),
                               [&](const Hypothesis& h) { return h.tokens.size() == longest; });
      Hypothesis keep = *pick;
      beams_ = {keep};
      ++forced_finalizations_;
      if (emit_range(keep.tokens, t)) return false;
    }
    return !beams_.front().finalized || beams_.size() > 1;
  }

  // Emits tokens[targets_.size()..]; true if a sentence end reset the state.
  bool emit_range(const std::vector<std::string>& tokens, double t) {
    for (std::size_t k = targets_.size(); k < tokens.size(); ++k)
      if (emit(tokens[k], t)) return true;
    return false;
  }

  // Records one output token; true if it ended the segment.
  bool emit(const std::string& token, double t) {
    targets_.push_back(token);
    WriteRecord w;
    w.segment = segment_;
    w.target_index = targets_.size();
    w.token = token;
    w.g = src_tokens_.size();
    w.write_time_sec = t;
    w.source_time_sec = src_read_times_.empty() ? t : src_read_times_.back();
    trace_.writes.push_back(w);
    out_.push_back({token, t, segment_, w.target_index, w.g, false});
    if (is_sentence_final(token)) {
      flush();
      return true;
    }
    return false;
  }

  void flush() {
    trace_.flush_points.push_back(trace_.writes.size());
    ++segment_;
    reset_segment();
  }

  void reset_segment() {
    src_tokens_.clear();
    src_states_.clear();
    src_read_times_.clear();
    targets_.clear();
    beams_.assign(1, Hypothesis{});
    forced_.reset();
  }

  const TranslationModel* model_;
  const ReadWritePolicy* policy_;
  DecoderConfig cfg_;
  Mode mode_ = Mode::kUnset;

  std::vector<std::string> delivered_;  // latest committed hypothesis
  std::size_t consumed_ = 0;
  double last_time_ = 0.0;
  bool closed_ = false;

  std::size_t segment_ = 0;
  std::vector<std::string> src_tokens_;
  std::vector<StateVec> src_states_;
  std::vector<double> src_read_times_;
  std::vector<std::string> targets_;  // emitted in this segment
  std::vector<Hypothesis> beams_;
  std::optional<std::vector<std::string>> forced_;
  std::size_t forced_finalizations_ = 0;

  SessionTrace trace_;
  std::vector<Emission> out_;
};

// ============================================================================
// Ordered hand-off of emissions between a decoding thread and a consumer
// ============================================================================

class EmissionQueue {
 public:
  void push(Emission e) {
    {
      std::lock_guard lock(mu_);
      items_.push_back(std::move(e));
    }
    cv_.notify_one();
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  // Blocks until an item is available; nullopt once closed and drained.
  std::optional<Emission> pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    Emission e = std::move(items_.front());
    items_.pop_front();
    return e;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Emission> items_;
  bool closed_ = false;
};

// Feeds a whole event list through a session (greedy or beam per config),
// returning every emission in order; optionally mirrors them into a queue.
inline std::vector<Emission> run_events(Session& session, std::span<const StreamEvent> events,
                                        EmissionQueue* queue = nullptr) {
  const bool beam = session.config().beam_size > 1;
  std::vector<Emission> all;
  for (const auto& ev : events) {
    auto out = beam ? session.beam_feed(ev) : session.feed(ev);
    for (auto& e : out) {
      if (queue) queue->push(e);
      all.push_back(std::move(e));
    }
  }
  if (!session.closed()) {
    double t = events.empty() ? 0.0 : events.back().time_sec;
    for (auto& e : session.finalize_segment(t)) {
      if (queue) queue->push(e);
      all.push_back(std::move(e));
    }
  }
  if (queue) queue->close();
  return all;
}

// Token-level stream: one FINAL per source token at `interval` spacing,
// then END_OF_STREAM. Used to drive sessions without the ASR simulator.
inline std::vector<StreamEvent> token_stream(std::span<const std::string> src, double interval = 1.0) {
  std::vector<StreamEvent> events;
  std::vector<std::string> acc;
  for (std::size_t k = 0; k < src.size(); ++k) {
    acc.push_back(src[k]);
    events.push_back({static_cast<double>(k + 1) * interval, EventKind::kFinal, acc});
  }
  events.push_back({static_cast<double>(src.size()) * interval, EventKind::kEndOfStream, acc});
  return events;
}

}  // namespace simulmt
