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

// End-to-end experiments: corpus -> labels -> policy -> cascaded streaming
// translation -> metrics, and delta/beam sweeps over the result.

#pragma once

#include <cstdint>
#include <algorithm>
#include <cstdio>
#include <future>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "simulmt/asr_sim.hpp"
#include "simulmt/io.hpp"
#include "simulmt/metrics.hpp"
#include "simulmt/policy_labels.hpp"
#include "simulmt/policy_model.hpp"
#include "simulmt/simul_decoder.hpp"
#include "simulmt/toy_mt.hpp"

namespace simulmt {

struct ExperimentConfig {
  std::uint64_t seed = 1;
  CorpusConfig corpus;
  LabelGenConfig labels;
  TrainConfig train;
  DecoderConfig decoder;
  AsrSimConfig asr;
  double word_duration_sec = 0.3;
  std::string policy = "learned";  // "learned" or "wait-k"
  std::size_t wait_k = 4;
  std::vector<double> sweep_deltas = {0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 1.00};
  std::vector<std::size_t> sweep_beams = {1, 3};
  std::size_t jobs = 1;
  // Not part of the config file: chosen per run on the command line.
  ReplayMode replay_mode = ReplayMode::kLogical;
  double time_scale = 1.0;

  void validate() const {
    corpus.validate();
    labels.validate();
    train.validate();
    decoder.validate();
    asr.validate();
    if (!(word_duration_sec > 0.0)) throw ValidationError("word_duration_sec must be > 0");
    if (policy != "learned" && policy != "wait-k") throw ValidationError("policy must be 'learned' or 'wait-k'");
    if (wait_k == 0) throw ValidationError("wait_k must be >= 1");
    for (double d : sweep_deltas) check_delta(d);
    for (std::size_t b : sweep_beams)
      if (b == 0) throw ValidationError("beam sizes must be >= 1");
    if (jobs == 0) throw ValidationError("jobs must be >= 1");
    if (!(time_scale > 0.0)) throw ValidationError("time_scale must be > 0");
  }
};

// Independent per-stage seed derived from the root seed.
inline std::uint64_t stage_seed(std::uint64_t root, std::string_view stage) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : stage) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (h | 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Config file (JSON). Missing keys keep their defaults.

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    if (j.contains("corpus")) {
      const json& k = j["corpus"];
      c.corpus.vocab_size = k.value("vocab_size", c.corpus.vocab_size);
      c.corpus.sentence_count = k.value("sentence_count", c.corpus.sentence_count);
      c.corpus.min_len = k.value("min_len", c.corpus.min_len);
      c.corpus.max_len = k.value("max_len", c.corpus.max_len);
      c.corpus.swap_prob = k.value("swap_prob", c.corpus.swap_prob);
      c.corpus.embed_dim = k.value("embed_dim", c.corpus.embed_dim);
      c.corpus.attn_sharpness = k.value("attn_sharpness", c.corpus.attn_sharpness);
      c.corpus.beam_alternatives = k.value("beam_alternatives", c.corpus.beam_alternatives);
      if (k.contains("fertility")) {
        const json& f = k["fertility"];
        c.corpus.fertility.one_to_one = f.value("one_to_one", c.corpus.fertility.one_to_one);
        c.corpus.fertility.one_to_two = f.value("one_to_two", c.corpus.fertility.one_to_two);
        c.corpus.fertility.two_to_one = f.value("two_to_one", c.corpus.fertility.two_to_one);
      }
    }
    if (j.contains("labels")) c.labels.gamma = j["labels"].value("gamma", c.labels.gamma);
    if (j.contains("train")) {
      const json& t = j["train"];
      c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
      c.train.epochs = t.value("epochs", c.train.epochs);
      c.train.l2 = t.value("l2", c.train.l2);
    }
    if (j.contains("decoder")) {
      const json& d = j["decoder"];
      c.decoder.delta = d.value("delta", c.decoder.delta);
      c.decoder.beam_size = d.value("beam_size", c.decoder.beam_size);
      c.decoder.force_finalize_token_limit = d.value("force_finalize_token_limit", c.decoder.force_finalize_token_limit);
      c.decoder.max_consecutive_writes = d.value("max_consecutive_writes", c.decoder.max_consecutive_writes);
      c.decoder.hold_last_token = d.value("hold_last_token", c.decoder.hold_last_token);
    }
    if (j.contains("asr")) {
      const json& a = j["asr"];
      c.asr.partial_interval_sec = a.value("partial_interval_sec", c.asr.partial_interval_sec);
      c.asr.final_timeout_sec = a.value("final_timeout_sec", c.asr.final_timeout_sec);
      c.asr.stability_lag_words = a.value("stability_lag_words", c.asr.stability_lag_words);
      c.word_duration_sec = a.value("word_duration_sec", c.word_duration_sec);
    }
    c.policy = j.value("policy", c.policy);
    c.wait_k = j.value("wait_k", c.wait_k);
    if (j.contains("sweep")) {
      c.sweep_deltas = j["sweep"].value("deltas", c.sweep_deltas);
      c.sweep_beams = j["sweep"].value("beams", c.sweep_beams);
    }
    c.jobs = j.value("jobs", c.jobs);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad experiment config: ") + e.what());
  }
  return c;
}

inline json to_json(const ExperimentConfig& c) {
  return json{
      {"seed", c.seed},
      {"corpus",
       {{"vocab_size", c.corpus.vocab_size},
        {"sentence_count", c.corpus.sentence_count},
        {"min_len", c.corpus.min_len},
        {"max_len", c.corpus.max_len},
        {"swap_prob", c.corpus.swap_prob},
        {"embed_dim", c.corpus.embed_dim},
        {"attn_sharpness", c.corpus.attn_sharpness},
        {"beam_alternatives", c.corpus.beam_alternatives},
        {"fertility",
         {{"one_to_one", c.corpus.fertility.one_to_one},
          {"one_to_two", c.corpus.fertility.one_to_two},
          {"two_to_one", c.corpus.fertility.two_to_one}}}}},
      {"labels", {{"gamma", c.labels.gamma}}},
      {"train", {{"learning_rate", c.train.learning_rate}, {"epochs", c.train.epochs}, {"l2", c.train.l2}}},
      {"decoder",
       {{"delta", c.decoder.delta},
        {"beam_size", c.decoder.beam_size},
        {"force_finalize_token_limit", c.decoder.force_finalize_token_limit},
        {"max_consecutive_writes", c.decoder.max_consecutive_writes},
        {"hold_last_token", c.decoder.hold_last_token}}},
      {"asr",
       {{"partial_interval_sec", c.asr.partial_interval_sec},
        {"final_timeout_sec", c.asr.final_timeout_sec},
        {"stability_lag_words", c.asr.stability_lag_words},
        {"word_duration_sec", c.word_duration_sec}}},
      {"policy", c.policy},
      {"wait_k", c.wait_k},
      {"sweep", {{"deltas", c.sweep_deltas}, {"beams", c.sweep_beams}}},
      {"jobs", c.jobs}};
}

// The corpus stage draws from its own seed.
inline CorpusConfig seeded_corpus_config(const ExperimentConfig& c) {
  CorpusConfig k = c.corpus;
  k.seed = stage_seed(c.seed, "corpus");
  return k;
}

// ---------------------------------------------------------------------------
// Labels and training data

inline LabelRecord make_label_record(const ToyModel& model, const std::vector<std::string>& src,
                                     const LabelGenConfig& cfg) {
  Translation t = full_sentence_translate(model, src);
  LabelRecord r;
  r.src = src;
  r.tgt = std::move(t.tokens);
  r.labels = generate_label_matrix(t.attention, cfg);
  r.attention = std::move(t.attention);
  return r;
}

inline std::vector<LabelRecord> make_label_records(const ToyModel& model, const std::vector<ParallelExample>& corpus,
                                                   const LabelGenConfig& cfg) {
  std::vector<LabelRecord> out;
  out.reserve(corpus.size());
  for (const auto& ex : corpus) out.push_back(make_label_record(model, ex.src, cfg));
  return out;
}

// (s_i from the gold target prefix, h_j from the source) for every
// reachable label cell.
inline std::vector<PolicyExample> training_examples(const TranslationModel& model,
                                                    const std::vector<LabelRecord>& records) {
  std::vector<PolicyExample> out;
  for (const auto& r : records) {
    std::vector<StateVec> h;
    for (std::size_t j = 0; j < r.src.size(); ++j) h.push_back(model.encode_token(r.src[j], j + 1));
    std::vector<StateVec> s;
    for (std::size_t i = 0; i < r.tgt.size(); ++i)
      s.push_back(model.decoder_state(std::span<const std::string>(r.tgt).first(i)));
    for (const auto& cell : extract_training_cells(r.labels))
      out.push_back({s[cell.target_index], h[cell.source_index], cell.label});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cascade evaluation

struct SentenceResult {
  std::vector<std::string> hypothesis;
  std::vector<WriteRecord> writes;
  double al_tokens = 0.0;
  double al_seconds = 0.0;
  double upl_first = 0.0;
  double upl_last = 0.0;
};

struct EvalSummary {
  double delta = 0.0;
  std::size_t beam = 1;
  double bleu = 0.0;
  double al_tokens = 0.0;
  double al_seconds = 0.0;
  double upl_first = 0.0;
  double upl_last = 0.0;
  std::size_t n_sentences = 0;
  std::vector<SentenceResult> sentences;
};

// One sentence through ASR simulation and the streaming decoder.
inline SentenceResult run_cascade(const ToyModel& model, const ReadWritePolicy& policy, const DecoderConfig& dcfg,
                                  const ExperimentConfig& cfg, const std::vector<std::string>& src) {
  const TimedTranscript transcript = uniform_transcript(src, cfg.word_duration_sec);
  const std::vector<StreamEvent> events = simulate_stream(transcript, cfg.asr);
  Session session(model, policy, dcfg);
  if (cfg.replay_mode == ReplayMode::kLogical) {
    run_events(session, events);
  } else {
    const bool beam = dcfg.beam_size > 1;
    replay(events, cfg.replay_mode,
           [&](const StreamEvent& ev) { beam ? session.beam_feed(ev) : session.feed(ev); }, cfg.time_scale);
    if (!session.closed()) session.finalize_segment(events.back().time_sec);
  }

  SentenceResult r;
  r.writes = session.trace().writes;
  r.hypothesis = session.trace().tokens();
  if (r.writes.empty()) return r;
  // Segment-relative source end times.
  std::vector<double> ends;
  for (const auto& w : transcript.words) ends.push_back(w.end_sec - transcript.first_start());
  r.al_tokens = average_lag(std::span<const WriteRecord>(r.writes), src.size(), r.writes.size(), LagUnit::kTokens);
  r.al_seconds = average_lag(std::span<const WriteRecord>(r.writes), src.size(), r.writes.size(), LagUnit::kSeconds, ends);
  UserPerceivedLatency u = upl(r.writes, transcript.first_start(), transcript.last_end());
  r.upl_first = u.first_sec;
  r.upl_last = u.last_sec;
  return r;
}

template <typename Fn>
auto parallel_map(std::size_t n, std::size_t jobs, Fn&& fn) {
  using R = decltype(fn(std::size_t{0}));
  std::vector<R> out(n);
  if (jobs <= 1 || n < 2) {
    for (std::size_t k = 0; k < n; ++k) out[k] = fn(k);
    return out;
  }
  std::vector<std::future<void>> workers;
  for (std::size_t w = 0; w < jobs; ++w)
    workers.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t k = w; k < n; k += jobs) out[k] = fn(k);
    }));
  for (auto& f : workers) f.get();
  return out;
}

inline EvalSummary evaluate(const ToyModel& model, const ReadWritePolicy& policy, const DecoderConfig& dcfg,
                            const ExperimentConfig& cfg, const std::vector<ParallelExample>& corpus) {
  EvalSummary s;
  s.delta = dcfg.delta;
  s.beam = dcfg.beam_size;
  s.sentences = parallel_map(corpus.size(), cfg.jobs,
                             [&](std::size_t k) { return run_cascade(model, policy, dcfg, cfg, corpus[k].src); });
  s.n_sentences = corpus.size();
  std::vector<std::vector<std::string>> hyps, refs;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    const auto& r = s.sentences[k];
    hyps.push_back(r.hypothesis);
    refs.push_back(corpus[k].tgt);
    s.al_tokens += r.al_tokens;
    s.al_seconds += r.al_seconds;
    s.upl_first += r.upl_first;
    s.upl_last += r.upl_last;
  }
  if (!corpus.empty()) {
    const double n = static_cast<double>(corpus.size());
    s.al_tokens /= n;
    s.al_seconds /= n;
    s.upl_first /= n;
    s.upl_last /= n;
    s.bleu = corpus_bleu(std::span<const std::vector<std::string>>(hyps), std::span<const std::vector<std::string>>(refs));
  }
  return s;
}

// Gold targets forced, token-level stream: the read schedule then depends on
// the policy alone. Returns g per sentence.
inline std::vector<std::vector<std::size_t>> teacher_forced_delays(const TranslationModel& model,
                                                                   const ReadWritePolicy& policy,
                                                                   DecoderConfig dcfg,
                                                                   const std::vector<ParallelExample>& corpus) {
  dcfg.beam_size = 1;
  std::vector<std::vector<std::size_t>> out;
  for (const auto& ex : corpus) {
    Session session(model, policy, dcfg);
    session.set_forced_target(ex.tgt);
    run_events(session, token_stream(ex.src));
    out.push_back(session.trace().delays());
  }
  return out;
}

inline double mean_token_al(const std::vector<std::vector<std::size_t>>& delays,
                            const std::vector<ParallelExample>& corpus) {
  double total = 0.0;
  for (std::size_t k = 0; k < corpus.size(); ++k)
    total += average_lag(std::span<const std::size_t>(delays[k]), corpus[k].src.size(), delays[k].size());
  return corpus.empty() ? 0.0 : total / static_cast<double>(corpus.size());
}

// ---------------------------------------------------------------------------
// Prepared experiment: corpus, labels and a trained policy head

struct PreparedExperiment {
  ExperimentConfig config;
  Corpus corpus;
  std::vector<LabelRecord> labels;
  TrainResult training;
};

// A corpus or trained policy passed in replaces the generated one.
inline PreparedExperiment prepare(const ExperimentConfig& cfg, std::optional<Corpus> corpus = std::nullopt,
                                  std::optional<PolicyParams> policy = std::nullopt) {
  cfg.validate();
  PreparedExperiment p;
  p.config = cfg;
  p.corpus = corpus ? std::move(*corpus) : gen_corpus(seeded_corpus_config(cfg));
  p.labels = make_label_records(p.corpus.model, p.corpus.examples, cfg.labels);
  if (policy) {
    if (policy->dim != p.corpus.model.embed_dim())
      throw DataError("policy dimension " + std::to_string(policy->dim) + " does not match model dimension " +
                      std::to_string(p.corpus.model.embed_dim()));
    p.training.params = std::move(*policy);
  } else if (cfg.policy == "learned") {
    const auto examples = training_examples(p.corpus.model, p.labels);
    TrainConfig t = cfg.train;
    t.seed = stage_seed(cfg.seed, "train");
    p.training = train_policy(examples, t);
  }
  return p;
}

inline std::unique_ptr<ReadWritePolicy> make_policy(const PreparedExperiment& p, double delta) {
  if (p.config.policy == "wait-k") return std::make_unique<WaitKPolicy>(p.config.wait_k);
  return std::make_unique<LearnedPolicy>(p.training.params, delta);
}

inline EvalSummary run_pipeline(const PreparedExperiment& p, double delta, std::size_t beam) {
  DecoderConfig d = p.config.decoder;
  d.delta = delta;
  d.beam_size = beam;
  auto policy = make_policy(p, delta);
  return evaluate(p.corpus.model, *policy, d, p.config, p.corpus.examples);
}

inline json summary_json(const EvalSummary& s) {
  return json{{"al", s.al_tokens},     {"al_seconds", s.al_seconds}, {"upl_first", s.upl_first},
              {"upl_last", s.upl_last}, {"bleu", s.bleu},             {"n_sentences", s.n_sentences},
              {"delta", s.delta},       {"beam", s.beam}};
}

inline std::string traces_jsonl(const EvalSummary& s) {
  std::string out;
  for (std::size_t k = 0; k < s.sentences.size(); ++k)
    for (const auto& w : s.sentences[k].writes) {
      json j = to_json(w);
      j["sentence"] = k;
      out += j.dump() + "\n";
    }
  return out;
}

inline std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct SweepResult {
  std::string csv;
  std::vector<EvalSummary> rows;
  // Teacher-forced token AL per delta, in sweep order.
  std::vector<double> teacher_forced_al;
  bool monotone = true;
  std::string monotone_message;
};

// One row per (delta, beam), ordered by delta then beam.
inline SweepResult run_sweep(const PreparedExperiment& p, bool check_monotone = false) {
  const auto& cfg = p.config;
  if (cfg.sweep_deltas.empty() || cfg.sweep_beams.empty()) throw ValidationError("sweep needs at least one delta and one beam size");
  std::vector<double> deltas = cfg.sweep_deltas;
  std::sort(deltas.begin(), deltas.end());
  std::vector<std::size_t> beams = cfg.sweep_beams;
  std::sort(beams.begin(), beams.end());

  SweepResult r;
  std::ostringstream csv;
  csv << "delta,beam,bleu,al_tokens,al_seconds,upl_first,upl_last\n";
  for (double delta : deltas)
    for (std::size_t beam : beams) {
      EvalSummary s = run_pipeline(p, delta, beam);
      csv << format_fixed(delta) << ',' << beam << ',' << format_fixed(s.bleu) << ',' << format_fixed(s.al_tokens)
          << ',' << format_fixed(s.al_seconds) << ',' << format_fixed(s.upl_first) << ','
          << format_fixed(s.upl_last) << '\n';
      s.sentences.clear();
      r.rows.push_back(std::move(s));
    }
  r.csv = csv.str();

  if (check_monotone) {
    std::vector<std::vector<std::size_t>> previous;
    for (double delta : deltas) {
      auto policy = make_policy(p, delta);
      auto g = teacher_forced_delays(p.corpus.model, *policy, cfg.decoder, p.corpus.examples);
      r.teacher_forced_al.push_back(mean_token_al(g, p.corpus.examples));
      if (!previous.empty()) {
        for (std::size_t k = 0; k < g.size() && r.monotone; ++k)
          for (std::size_t i = 0; i < g[k].size() && i < previous[k].size(); ++i)
            if (g[k][i] < previous[k][i]) {
              r.monotone = false;
              r.monotone_message = "sentence " + std::to_string(k) + " target " + std::to_string(i + 1) +
                                   " reads less at delta " + format_fixed(delta);
              break;
            }
        const std::size_t n = r.teacher_forced_al.size();
        if (r.monotone && r.teacher_forced_al[n - 1] < r.teacher_forced_al[n - 2]) {
          r.monotone = false;
          r.monotone_message = "teacher-forced AL decreases at delta " + format_fixed(delta);
        }
      }
      previous = std::move(g);
    }
  }
  return r;
}

}  // namespace simulmt
