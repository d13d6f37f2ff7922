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


#include <gtest/gtest.h>

#include "simulmt/experiment.hpp"

namespace simulmt {
namespace {

ExperimentConfig small_config(std::size_t sentences = 40) {
  ExperimentConfig c;
  c.corpus.sentence_count = sentences;
  return c;
}

TEST(StageSeedTest, DeterministicAndDistinct) {
  EXPECT_EQ(stage_seed(1, "corpus"), stage_seed(1, "corpus"));
  EXPECT_NE(stage_seed(1, "corpus"), stage_seed(1, "train"));
  EXPECT_NE(stage_seed(1, "corpus"), stage_seed(2, "corpus"));
}

TEST(ConfigTest, JsonRoundTrip) {
  ExperimentConfig c;
  c.seed = 9;
  c.corpus.swap_prob = 0.25;
  c.labels.gamma = 0.6;
  c.decoder.beam_size = 3;
  c.sweep_deltas = {0.5, 1.0};
  c.policy = "wait-k";
  ExperimentConfig back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.corpus.swap_prob, 0.25);
  EXPECT_EQ(back.sweep_deltas, (std::vector<double>{0.5, 1.0}));
}

TEST(ConfigTest, MissingKeysKeepDefaults) {
  ExperimentConfig c = config_from_json(json{{"seed", 4}});
  EXPECT_EQ(c.seed, 4u);
  EXPECT_EQ(c.labels.gamma, 0.5);
  EXPECT_EQ(c.sweep_deltas.size(), 11u);
}

TEST(ConfigTest, Invalid) {
  EXPECT_THROW(config_from_json(json{{"seed", "abc"}}), ValidationError);
  ExperimentConfig c;
  c.sweep_deltas = {0.0};
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.policy = "oracle";
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.sweep_beams = {0};
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(LabelRecordsTest, StaircaseAndTrainingCells) {
  ExperimentConfig c = small_config(20);
  c.corpus.swap_prob = 0.2;
  c.corpus.fertility = {0.6, 0.2, 0.2};
  Corpus corpus = gen_corpus(seeded_corpus_config(c));
  auto records = make_label_records(corpus.model, corpus.examples, c.labels);
  std::size_t cells = 0;
  for (const auto& r : records) {
    EXPECT_FALSE(validate_staircase(r.labels));
    EXPECT_EQ(r.labels.rows(), r.tgt.size());
    EXPECT_EQ(r.labels.cols(), r.src.size());
    cells += extract_training_cells(r.labels).size();
  }
  EXPECT_EQ(training_examples(corpus.model, records).size(), cells);
}

TEST(PipelineTest, DeltaOneMatchesFullSentence) {
  PreparedExperiment p = prepare(small_config());
  EvalSummary s = run_pipeline(p, 1.0, 1);
  EXPECT_EQ(s.bleu, 100.0);
  double mean_len = 0.0;
  for (const auto& ex : p.corpus.examples) mean_len += static_cast<double>(ex.src.size());
  mean_len /= static_cast<double>(p.corpus.examples.size());
  EXPECT_NEAR(s.al_tokens, mean_len, 1e-12);
  for (std::size_t k = 0; k < s.sentences.size(); ++k)
    EXPECT_EQ(s.sentences[k].hypothesis, full_sentence_translate(p.corpus.model, p.corpus.examples[k].src).tokens);
}

TEST(PipelineTest, TrainedPolicyAtHalfIsFastAndAccurate) {
  PreparedExperiment p = prepare(small_config());
  EvalSummary fast = run_pipeline(p, 0.5, 1), slow = run_pipeline(p, 1.0, 1);
  EXPECT_GE(fast.bleu, 98.0);
  EXPECT_LT(fast.al_tokens, slow.al_tokens);
  EXPECT_LT(fast.upl_first, slow.upl_first);
  EXPECT_GE(fast.upl_last, 0.0);
}

TEST(PipelineTest, WaitFourHasTokenLagFour) {
  ExperimentConfig c = small_config();
  c.policy = "wait-k";
  c.wait_k = 4;
  PreparedExperiment p = prepare(c);
  EvalSummary s = run_pipeline(p, 0.5, 1);
  EXPECT_NEAR(s.al_tokens, 4.0, 1e-12);
  EXPECT_EQ(s.bleu, 100.0);
}

TEST(PipelineTest, ParallelEvaluationMatchesSerial) {
  ExperimentConfig c = small_config();
  c.corpus.swap_prob = 0.2;
  PreparedExperiment p = prepare(c);
  EvalSummary a = run_pipeline(p, 0.7, 3);
  p.config.jobs = 4;
  EvalSummary b = run_pipeline(p, 0.7, 3);
  EXPECT_EQ(summary_json(a).dump(), summary_json(b).dump());
  EXPECT_EQ(traces_jsonl(a), traces_jsonl(b));
}

TEST(PipelineTest, ExternalPolicyDimensionChecked) {
  EXPECT_THROW(prepare(small_config(5), std::nullopt, PolicyParams::zeros(3)), DataError);
}

TEST(SweepTest, RowsOrderedByDeltaThenBeam) {
  ExperimentConfig c = small_config(20);
  c.sweep_deltas = {1.0, 0.5, 0.75};
  c.sweep_beams = {3, 1};
  SweepResult r = run_sweep(prepare(c));
  ASSERT_EQ(r.rows.size(), 6u);
  const double deltas[] = {0.5, 0.5, 0.75, 0.75, 1.0, 1.0};
  const std::size_t beams[] = {1, 3, 1, 3, 1, 3};
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_EQ(r.rows[k].delta, deltas[k]);
    EXPECT_EQ(r.rows[k].beam, beams[k]);
  }
  EXPECT_EQ(r.csv.substr(0, r.csv.find('\n')), "delta,beam,bleu,al_tokens,al_seconds,upl_first,upl_last");
  EXPECT_EQ(std::count(r.csv.begin(), r.csv.end(), '\n'), 7);
}

TEST(SweepTest, TeacherForcedLatencyMonotone) {
  ExperimentConfig c = small_config(30);
  c.corpus.swap_prob = 0.2;
  c.corpus.fertility = {0.6, 0.2, 0.2};
  c.sweep_beams = {1};
  SweepResult r = run_sweep(prepare(c), true);
  EXPECT_TRUE(r.monotone) << r.monotone_message;
  ASSERT_EQ(r.teacher_forced_al.size(), 11u);
  for (std::size_t k = 1; k < r.teacher_forced_al.size(); ++k)
    EXPECT_GE(r.teacher_forced_al[k], r.teacher_forced_al[k - 1]);
  EXPECT_EQ(r.rows.back().bleu, 100.0);
}

TEST(SweepTest, EmptySweepRejected) {
  ExperimentConfig c = small_config(5);
  PreparedExperiment p = prepare(c);
  p.config.sweep_deltas.clear();
  EXPECT_THROW(run_sweep(p), ValidationError);
}

}  // namespace
}  // namespace simulmt
