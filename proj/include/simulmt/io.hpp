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

// JSON / JSONL serialization of corpora, models, labels, policies and traces.

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simulmt/core.hpp"
#include "simulmt/policy_labels.hpp"
#include "simulmt/policy_model.hpp"
#include "simulmt/toy_mt.hpp"

namespace simulmt {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Policy parameters: {"d", "W" (row-major), "bias", "scale"}

inline json to_json(const PolicyParams& p) {
  return json{{"d", p.dim}, {"W", p.weights}, {"bias", p.bias}, {"scale", p.scale}};
}

inline PolicyParams policy_from_json(const json& j) {
  PolicyParams p;
  try {
    p.dim = j.at("d").get<std::size_t>();
    p.weights = j.at("W").get<std::vector<double>>();
    p.bias = j.at("bias").get<double>();
    p.scale = j.value("scale", 1.0);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad policy JSON: ") + e.what());
  }
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Corpus lines: {"src": [...], "tgt": [...], "align": [[...], ...]}

inline json to_json(const ParallelExample& ex) {
  return json{{"src", ex.src}, {"tgt", ex.tgt}, {"align", ex.alignment}};
}

inline ParallelExample example_from_json(const json& j) {
  ParallelExample ex;
  ex.src = j.at("src").get<std::vector<std::string>>();
  ex.tgt = j.at("tgt").get<std::vector<std::string>>();
  if (j.contains("align")) ex.alignment = j.at("align").get<std::vector<std::vector<std::size_t>>>();
  return ex;
}

// ---------------------------------------------------------------------------
// Toy model configuration

inline json to_json(const ToyModel& m) {
  json dict = json::object();
  for (const auto& [src, tgt] : m.dictionary) dict[src] = tgt;
  json multi = json::array();
  for (const auto& [key, tgt] : m.multiword) multi.push_back({key.first, key.second, tgt});
  json swaps = json::array();
  for (const auto& [a, b] : m.swap_rules) swaps.push_back({a, b});
  return json{{"embed_dim", m.dim},
              {"seed", m.seed},
              {"attn_sharpness", m.attn_sharpness},
              {"beam_alternatives", m.beam_alternatives},
              {"dictionary", dict},
              {"multiword", multi},
              {"swap_rules", swaps}};
}

inline ToyModel model_from_json(const json& j) {
  ToyModel m;
  try {
    m.dim = j.at("embed_dim").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.attn_sharpness = j.at("attn_sharpness").get<double>();
    m.beam_alternatives = j.value("beam_alternatives", std::size_t{0});
    for (auto it = j.at("dictionary").begin(); it != j.at("dictionary").end(); ++it)
      m.dictionary[it.key()] = it.value().get<std::vector<std::string>>();
    for (const auto& r : j.at("multiword"))
      m.multiword[{r.at(0).get<std::string>(), r.at(1).get<std::string>()}] = r.at(2).get<std::string>();
    for (const auto& r : j.at("swap_rules")) m.swap_rules.insert({r.at(0).get<std::string>(), r.at(1).get<std::string>()});
  } catch (const json::exception& e) {
    throw DataError(std::string("bad model JSON: ") + e.what());
  }
  m.finalize();
  return m;
}

// ---------------------------------------------------------------------------
// Label records: {"src", "tgt", "attention": [[...]], "labels": [[...]]}

struct LabelRecord {
  std::vector<std::string> src;
  std::vector<std::string> tgt;
  AttentionMatrix attention;
  PolicyLabelMatrix labels;
};

inline json to_json(const LabelRecord& r) {
  return json{{"src", r.src}, {"tgt", r.tgt}, {"attention", r.attention.to_rows()}, {"labels", r.labels.to_rows()}};
}

inline LabelRecord label_record_from_json(const json& j) {
  LabelRecord r;
  r.src = j.at("src").get<std::vector<std::string>>();
  r.tgt = j.at("tgt").get<std::vector<std::string>>();
  r.attention = AttentionMatrix::from_rows(j.at("attention").get<std::vector<std::vector<double>>>());
  r.labels = PolicyLabelMatrix::from_rows(j.at("labels").get<std::vector<std::vector<std::uint8_t>>>());
  return r;
}

// ---------------------------------------------------------------------------
// Trace lines: {"i", "token", "g_i", "t_write", "t_source_consumed"}

inline json to_json(const WriteRecord& w) {
  return json{{"i", w.target_index},
              {"token", w.token},
              {"g_i", w.g},
              {"t_write", w.write_time_sec},
              {"t_source_consumed", w.source_time_sec}};
}

// ---------------------------------------------------------------------------
// JSONL helpers

template <typename Fn>
void read_jsonl(const std::string& path, Fn&& on_line) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      on_line(json::parse(line));
    } catch (const json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

inline std::vector<ParallelExample> load_corpus(const std::string& path) {
  std::vector<ParallelExample> out;
  read_jsonl(path, [&](const json& j) { out.push_back(example_from_json(j)); });
  return out;
}

inline std::string corpus_to_jsonl(const std::vector<ParallelExample>& examples) {
  std::string s;
  for (const auto& ex : examples) s += to_json(ex).dump() + "\n";
  return s;
}

}  // namespace simulmt
