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


// simulmt command-line driver.
//
//   simulmt gen-corpus   --out corpus.jsonl [--model-out model.json] [--force]
//   simulmt gen-labels   --out labels.jsonl [--corpus c.jsonl --model m.json]
//   simulmt train-policy --out policy.json [--labels l.jsonl --model m.json]
//   simulmt pipeline     --out-dir DIR [--delta D] [--beam B]
//   simulmt sweep        [--out sweep.csv] [--deltas ...] [--beams ...] [--check-monotone]
//   simulmt report       --summary a.json --summary b.json [--out report.json]
//
// Every subcommand accepts --config FILE (JSON) and --seed; flags override
// file values. Exit codes: 0 ok, 1 usage, 2 data error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "simulmt/simulmt.hpp"

namespace fs = std::filesystem;
using namespace simulmt;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flags shared by every subcommand. Unset optionals keep the config value.
struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> count;
  std::optional<std::size_t> vocab;
  std::optional<double> swap_prob;
  std::optional<double> gamma;
  std::optional<int> epochs;
  std::optional<double> learning_rate;
  std::optional<std::size_t> jobs;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "root seed");
    app->add_option("--count", count, "number of corpus sentences");
    app->add_option("--vocab", vocab, "source vocabulary size");
    app->add_option("--swap-prob", swap_prob, "probability of a reordering bigram per position");
    app->add_option("--gamma", gamma, "cumulative attention threshold for labels");
    app->add_option("--epochs", epochs, "policy training epochs");
    app->add_option("--lr", learning_rate, "policy learning rate");
    app->add_option("--jobs", jobs, "worker threads for sentence evaluation");
  }

  ExperimentConfig load() const {
    ExperimentConfig c;
    if (!config_path.empty()) {
      json j;
      try {
        j = read_json_file(config_path);
      } catch (const DataError& e) {
        throw UsageError(e.what());
      }
      c = config_from_json(j);
    }
    if (seed) c.seed = *seed;
    if (count) c.corpus.sentence_count = *count;
    if (vocab) c.corpus.vocab_size = *vocab;
    if (swap_prob) c.corpus.swap_prob = *swap_prob;
    if (gamma) c.labels.gamma = *gamma;
    if (epochs) c.train.epochs = *epochs;
    if (learning_rate) c.train.learning_rate = *learning_rate;
    if (jobs) c.jobs = *jobs;
    return c;
  }
};

void write_output(const std::string& path, const std::string& text, bool force) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (!force && fs::exists(path)) throw UsageError(path + " exists (use --force to overwrite)");
  write_text_file(path, text);
}

// Corpus and model either from files or regenerated from the config.
Corpus corpus_for(const ExperimentConfig& cfg, const std::string& corpus_path, const std::string& model_path) {
  if (corpus_path.empty() != model_path.empty()) throw UsageError("--corpus and --model must be given together");
  if (corpus_path.empty()) return gen_corpus(seeded_corpus_config(cfg));
  Corpus c;
  c.model = model_from_json(read_json_file(model_path));
  c.examples = load_corpus(corpus_path);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Alignment-based simultaneous translation experiments"};
  app.require_subcommand(1);
  bool force = false;

  // gen-corpus
  CommonFlags gc_flags;
  std::string gc_out, gc_model_out;
  auto* gc = app.add_subcommand("gen-corpus", "generate a synthetic parallel corpus (JSONL)");
  gc_flags.attach(gc);
  gc->add_option("--out", gc_out, "corpus JSONL path")->required();
  gc->add_option("--model-out", gc_model_out, "also write the toy model (JSON)");
  gc->add_flag("--force", force, "overwrite existing files");

  // gen-labels
  CommonFlags gl_flags;
  std::string gl_out, gl_corpus, gl_model;
  auto* gl = app.add_subcommand("gen-labels", "translate the corpus and derive policy label matrices (JSONL)");
  gl_flags.attach(gl);
  gl->add_option("--out", gl_out, "labels JSONL path ('-' for stdout)")->required();
  gl->add_option("--corpus", gl_corpus, "corpus JSONL (default: regenerate from config)");
  gl->add_option("--model", gl_model, "toy model JSON matching --corpus");
  gl->add_flag("--force", force, "overwrite existing files");

  // train-policy
  CommonFlags tp_flags;
  std::string tp_out, tp_labels, tp_model;
  auto* tp = app.add_subcommand("train-policy", "train the read/write policy head (JSON)");
  tp_flags.attach(tp);
  tp->add_option("--out", tp_out, "policy JSON path ('-' for stdout)")->required();
  tp->add_option("--labels", tp_labels, "labels JSONL (default: regenerate from config)");
  tp->add_option("--model", tp_model, "toy model JSON (required with --labels)");
  tp->add_flag("--force", force, "overwrite existing files");

  // pipeline
  CommonFlags pl_flags;
  std::string pl_out_dir, pl_corpus, pl_model, pl_policy_file, pl_policy;
  std::optional<double> pl_delta;
  std::optional<std::size_t> pl_beam, pl_wait_k;
  bool realtime = false;
  double time_scale = 1.0;
  auto* pl = app.add_subcommand("pipeline", "run the ASR + MT cascade over the corpus");
  pl_flags.attach(pl);
  pl->add_option("--out-dir", pl_out_dir, "directory for summary.json and traces.jsonl")->required();
  pl->add_option("--delta", pl_delta, "policy threshold in (0, 1]");
  pl->add_option("--beam", pl_beam, "beam size");
  pl->add_option("--policy", pl_policy, "learned or wait-k")->check(CLI::IsMember({"learned", "wait-k"}));
  pl->add_option("--wait-k", pl_wait_k, "k for the wait-k baseline");
  pl->add_option("--policy-file", pl_policy_file, "trained policy JSON (default: train from config)");
  pl->add_option("--corpus", pl_corpus, "corpus JSONL (default: regenerate from config)");
  pl->add_option("--model", pl_model, "toy model JSON matching --corpus");
  pl->add_flag("--realtime", realtime, "replay ASR events on the wall clock");
  pl->add_option("--time-scale", time_scale, "wall-clock seconds per stream second in --realtime mode");
  pl->add_flag("--force", force, "overwrite existing files");

  // sweep
  CommonFlags sw_flags;
  std::string sw_out;
  std::optional<std::vector<double>> sw_deltas;
  std::optional<std::vector<std::size_t>> sw_beams;
  bool check_monotone = false;
  auto* sw = app.add_subcommand("sweep", "delta x beam sweep, one CSV row per configuration");
  sw_flags.attach(sw);
  sw->add_option("--out", sw_out, "CSV path (default stdout)");
  sw->add_option("--deltas", sw_deltas, "delta values")->expected(0, -1);
  sw->add_option("--beams", sw_beams, "beam sizes")->expected(0, -1);
  sw->add_flag("--check-monotone", check_monotone, "fail if teacher-forced delays decrease as delta grows");
  sw->add_flag("--force", force, "overwrite existing files");

  // report
  std::vector<std::string> rp_inputs;
  std::string rp_out;
  auto* rp = app.add_subcommand("report", "average pipeline summaries (e.g. both translation directions)");
  rp->add_option("--summary", rp_inputs, "summary JSON files")->required();
  rp->add_option("--out", rp_out, "report JSON path (default stdout)");
  rp->add_flag("--force", force, "overwrite existing files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gc) {
      ExperimentConfig cfg = gc_flags.load();
      cfg.validate();
      Corpus c = gen_corpus(seeded_corpus_config(cfg));
      if (c.examples.empty()) std::cerr << "warning: sentence count is 0, writing an empty corpus\n";
      write_output(gc_out, corpus_to_jsonl(c.examples), force);
      if (!gc_model_out.empty()) write_output(gc_model_out, to_json(c.model).dump(1) + "\n", force);
    } else if (*gl) {
      ExperimentConfig cfg = gl_flags.load();
      cfg.validate();
      Corpus c = corpus_for(cfg, gl_corpus, gl_model);
      std::string text;
      for (const auto& ex : c.examples) text += to_json(make_label_record(c.model, ex.src, cfg.labels)).dump() + "\n";
      write_output(gl_out, text, force);
    } else if (*tp) {
      ExperimentConfig cfg = tp_flags.load();
      cfg.validate();
      std::vector<LabelRecord> records;
      ToyModel model;
      if (!tp_labels.empty()) {
        if (tp_model.empty()) throw UsageError("--labels needs --model");
        model = model_from_json(read_json_file(tp_model));
        read_jsonl(tp_labels, [&](const json& j) { records.push_back(label_record_from_json(j)); });
      } else {
        Corpus c = gen_corpus(seeded_corpus_config(cfg));
        model = c.model;
        records = make_label_records(model, c.examples, cfg.labels);
      }
      TrainConfig t = cfg.train;
      t.seed = stage_seed(cfg.seed, "train");
      const auto examples = training_examples(model, records);
      TrainResult r = train_policy(examples, t);
      if (r.single_class) std::cerr << "warning: all training labels are equal\n";
      std::cerr << "final loss " << r.final_loss << ", accuracy "
                << policy_accuracy(examples, r.params, cfg.decoder.delta) << " on " << examples.size()
                << " cells\n";
      write_output(tp_out, to_json(r.params).dump(1) + "\n", force);
    } else if (*pl) {
      ExperimentConfig cfg = pl_flags.load();
      if (pl_delta) cfg.decoder.delta = *pl_delta;
      if (pl_beam) cfg.decoder.beam_size = *pl_beam;
      if (!pl_policy.empty()) cfg.policy = pl_policy;
      if (pl_wait_k) cfg.wait_k = *pl_wait_k;
      if (realtime) cfg.replay_mode = ReplayMode::kRealTime;
      cfg.time_scale = time_scale;
      cfg.validate();
      std::optional<Corpus> corpus;
      if (!pl_corpus.empty() || !pl_model.empty()) corpus = corpus_for(cfg, pl_corpus, pl_model);
      std::optional<PolicyParams> params;
      if (!pl_policy_file.empty()) params = policy_from_json(read_json_file(pl_policy_file));
      PreparedExperiment p = prepare(cfg, std::move(corpus), std::move(params));
      if (p.corpus.examples.empty()) throw DataError("corpus is empty");
      EvalSummary s = run_pipeline(p, cfg.decoder.delta, cfg.decoder.beam_size);
      fs::create_directories(pl_out_dir);
      write_output((fs::path(pl_out_dir) / "summary.json").string(), summary_json(s).dump(1) + "\n", force);
      write_output((fs::path(pl_out_dir) / "traces.jsonl").string(), traces_jsonl(s), force);
    } else if (*sw) {
      ExperimentConfig cfg = sw_flags.load();
      if (sw_deltas) cfg.sweep_deltas = *sw_deltas;
      if (sw_beams) cfg.sweep_beams = *sw_beams;
      if (cfg.sweep_deltas.empty() || cfg.sweep_beams.empty())
        throw UsageError("sweep needs at least one delta and one beam size");
      PreparedExperiment p = prepare(cfg);
      SweepResult r = run_sweep(p, check_monotone);
      write_output(sw_out, r.csv, force);
      if (check_monotone && !r.monotone) {
        std::cerr << "monotonicity check failed: " << r.monotone_message << "\n";
        return kExitData;
      }
    } else if (*rp) {
      json acc = {{"al", 0.0}, {"al_seconds", 0.0}, {"upl_first", 0.0}, {"upl_last", 0.0}, {"bleu", 0.0}};
      std::size_t sentences = 0;
      for (const auto& path : rp_inputs) {
        json j = read_json_file(path);
        for (auto& [key, value] : acc.items()) {
          if (!j.contains(key) || !j[key].is_number()) throw DataError(path + ": missing numeric field " + key);
          value = value.get<double>() + j[key].get<double>();
        }
        sentences += j.value("n_sentences", std::size_t{0});
      }
      for (auto& [key, value] : acc.items()) value = value.get<double>() / static_cast<double>(rp_inputs.size());
      acc["n_sentences"] = sentences;
      acc["n_reports"] = rp_inputs.size();
      write_output(rp_out, acc.dump(1) + "\n", force);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
