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


// Fixtures shared by the unit and acceptance suites.

#pragma once

#include <random>
#include <string>
#include <vector>

#include "simulmt/asr_sim.hpp"
#include "simulmt/policy_model.hpp"
#include "simulmt/toy_mt.hpp"

namespace simulmt::testing {

// 2-D cells labelled WRITE iff s.h > 0.5, with no point closer than
// `margin` to the boundary.
inline std::vector<PolicyExample> separable_cells(std::uint64_t seed, std::size_t n = 200, double margin = 0.1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::vector<PolicyExample> out;
  std::size_t writes = 0;
  while (out.size() < n) {
    StateVec s = {u(rng), u(rng)}, h = {u(rng), u(rng)};
    const double dot = s[0] * h[0] + s[1] * h[1];
    if (std::abs(dot - 0.5) < margin) continue;
    const bool write = dot > 0.5;
    // Keep the classes roughly balanced.
    if (write && writes >= n / 2) continue;
    if (!write && out.size() - writes >= n - n / 2) continue;
    writes += write;
    out.push_back({s, h, write ? Action::kWrite : Action::kRead});
  }
  return out;
}

inline std::vector<PolicyExample> random_cells(std::uint64_t seed, std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<PolicyExample> out;
  for (std::size_t k = 0; k < n; ++k) {
    StateVec s(dim), h(dim);
    for (auto& v : s) v = g(rng);
    for (auto& v : h) v = g(rng);
    out.push_back({s, h, k % 2 ? Action::kWrite : Action::kRead});
  }
  return out;
}

inline PolicyParams random_params(std::uint64_t seed, std::size_t dim) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.5);
  PolicyParams p = PolicyParams::zeros(dim);
  for (auto& w : p.weights) w = g(rng);
  p.bias = g(rng);
  return p;
}

// Toy model with 1:1 rules s1..sn -> t1..tn plus sentence marks.
inline ToyModel one_to_one_model(std::size_t n = 30, std::uint64_t seed = 5) {
  ToyModel m;
  m.seed = seed;
  for (std::size_t k = 1; k <= n; ++k) m.dictionary["s" + std::to_string(k)] = {"t" + std::to_string(k)};
  for (const char* p : {".", "?", "!", ","}) m.dictionary[p] = {p};
  m.finalize();
  return m;
}

inline std::vector<std::string> one_to_one_sentence(std::mt19937_64& rng, std::size_t len, std::size_t vocab = 30) {
  std::uniform_int_distribution<std::size_t> w(1, vocab);
  std::vector<std::string> s;
  for (std::size_t k = 0; k < len; ++k) s.push_back("s" + std::to_string(w(rng)));
  s.push_back(".");
  return s;
}

// Transcript with long silences: words of 0.3 s, gaps of 2-4 s after some.
inline TimedTranscript pause_heavy_transcript(std::uint64_t seed, std::size_t words = 40) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dur(0.15, 0.5), gap(2.0, 4.0);
  std::bernoulli_distribution pause(0.35);
  TimedTranscript t;
  double clock = 0.2;
  for (std::size_t k = 0; k < words; ++k) {
    const double d = dur(rng);
    t.words.push_back({"w" + std::to_string(k), clock, clock + d, {}});
    clock += d;
    if (pause(rng)) clock += gap(rng);
  }
  return t;
}

class AlwaysWrite : public ReadWritePolicy {
 public:
  Action decide(const PolicyInput&) const override { return Action::kWrite; }
};

// Three competing first tokens A > B > C, each continued by its own chain.
// With stall_a, hypotheses starting with A cannot be extended.
class AmbiguousModel : public TranslationModel {
 public:
  explicit AmbiguousModel(bool stall_a) : stall_a_(stall_a) {}
  std::size_t embed_dim() const override { return 2; }
  StateVec encode_token(const std::string&, std::size_t pos) const override {
    return {1.0, static_cast<double>(pos)};
  }
  StateVec decoder_state(std::span<const std::string> prefix) const override {
    return {1.0, static_cast<double>(prefix.size())};
  }
  std::vector<Candidate> next_candidates(const SourceView&, std::span<const std::string> prefix,
                                         std::size_t) const override {
    if (prefix.empty()) return {{"A", -0.1}, {"B", -0.2}, {"C", -0.3}};
    const std::string& head = prefix.front();
    if (head == "A" && stall_a_) return {};
    std::string lower(1, static_cast<char>(head[0] - 'A' + 'a'));
    return {{lower + std::to_string(prefix.size()), -0.01}};
  }

 private:
  bool stall_a_;
};

}  // namespace simulmt::testing
