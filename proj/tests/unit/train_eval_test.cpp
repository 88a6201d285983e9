/* Copyright 2026 The MSnet Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "msnet/error.hpp"
#include "msnet/gap_data.hpp"
#include "msnet/train_eval.hpp"
#include "support/fixtures.hpp"
#include "support/planted.hpp"

namespace msnet::train {
namespace {

using numkit::Tensor;

TEST(LogLossTest, Examples) {
  const std::vector<int> l0{0};
  EXPECT_NEAR(log_loss(Tensor({1, 3}, {1.0, 0.0, 0.0}), l0), 0.0, 1e-12);
  EXPECT_NEAR(log_loss(Tensor({1, 3}, {0.7, 0.2, 0.1}), l0), 0.356675, 1e-6);
  const double third = 1.0 / 3.0;
  const std::vector<int> many{0, 1, 2, 2};
  EXPECT_NEAR(log_loss(Tensor({4, 3}, third), many), std::log(3.0), 1e-12);
  EXPECT_NEAR(log_loss(Tensor({1, 3}, {0.0, 1.0, 0.0}), l0), -std::log(1e-15), 1e-9);
}

TEST(LogLossTest, Errors) {
  const std::vector<int> two{0, 1};
  EXPECT_THROW(log_loss(Tensor({1, 3}, 1.0 / 3.0), two), ValidationError);
  const std::vector<int> one{0};
  EXPECT_THROW(log_loss(Tensor({1, 3}, {0.5, 0.2, 0.1}), one), ValidationError);
  const std::vector<int> bad{3};
  EXPECT_THROW(log_loss(Tensor({1, 3}, 1.0 / 3.0), bad), ValidationError);
  EXPECT_THROW(log_loss(Tensor({1, 2}, 0.5), one), DimensionError);
}

TEST(CvReportTest, MeanAndSampleStd) {
  CvReport r;
  r.k = 5;
  for (int f = 0; f < 5; ++f) r.folds.push_back({f, 0, 0, 0, 0, 0.1 * (f + 1)});
  r.summarize();
  EXPECT_NEAR(r.mean, 0.3, 1e-15);
  EXPECT_NEAR(r.std, 0.158114, 1e-6);
  EXPECT_NEAR(r.std, std::sqrt(0.025), 1e-15);
  const std::string json = r.to_json();
  EXPECT_NE(json.find("\"cv_mean\""), std::string::npos);
  EXPECT_NE(json.find("\"test_log_loss\": null"), std::string::npos);
  EXPECT_EQ(json, r.to_json());
}

TEST(EnsembleTest, AveragesAndRenormalizes) {
  const std::vector<Tensor> two{Tensor({1, 3}, {1.0, 0.0, 0.0}), Tensor({1, 3}, {0.0, 1.0, 0.0})};
  EXPECT_EQ(ensemble_average(two), Tensor({1, 3}, {0.5, 0.5, 0.0}));
  const std::vector<Tensor> short_mass{Tensor({1, 3}, {0.4, 0.4, 0.1})};
  const Tensor r = ensemble_average(short_mass);
  EXPECT_NEAR(r[0], 0.4 / 0.9, 1e-15);
  EXPECT_NEAR(r[2], 0.1 / 0.9, 1e-15);
  EXPECT_NEAR(r[0] + r[1] + r[2], 1.0, 1e-15);
  EXPECT_THROW(ensemble_average({}), ValidationError);
}

TEST(PredictionsTest, CsvRoundTrip) {
  const std::vector<std::string> ids{"test-1", "test-2"};
  const double t = 1.0 / 3.0;
  const Tensor probs({2, 3}, {t, t, t, 0.5, 0.25, 0.25});
  std::ostringstream out;
  write_predictions(out, ids, probs);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n', 15) + 1),
            "ID,A,B,NEITHER\ntest-1,0.33333333333333331,0.33333333333333331,0.33333333333333331\n");
  std::istringstream in(out.str());
  const Predictions back = read_predictions(in);
  EXPECT_EQ(back.ids, ids);
  EXPECT_EQ(back.probs, probs);
  const std::vector<std::string> bad{"a,b"};
  EXPECT_THROW(write_predictions(out, bad, Tensor({1, 3}, t)), ValidationError);
}

TEST(PredictionsTest, MalformedFiles) {
  for (const char* text : {"", "id,a,b,neither\n", "ID,A,B,NEITHER\nx,0.1,0.2\n",
                           "ID,A,B,NEITHER\nx,0.1,zz,0.3\n", "ID,A,B,NEITHER\nx,0.1,nan,0.3\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(read_predictions(in), FormatError) << text;
  }
}

TEST(TrainConfigTest, Validation) {
  TrainConfig tc;
  EXPECT_NO_THROW(tc.validate());
  tc.batch_size = 1;
  EXPECT_THROW(tc.validate(), ConfigError);
  tc = {};
  tc.patience = 0;
  EXPECT_THROW(tc.validate(), ConfigError);
  tc = {};
  tc.lr = -1;
  EXPECT_THROW(tc.validate(), ConfigError);
}

model::MsnetConfig small_cfg(std::size_t hidden) {
  model::MsnetConfig c;
  c.layers = 2;
  c.s_dim = 4;
  c.hidden = hidden;
  c.seed = 5;
  return c;
}

TEST(TrainFoldTest, ZeroLearningRateStopsAfterPatience) {
  numkit::Rng rng(1);
  const auto docs = testing::random_docs(rng, 40, 2, 8);
  std::vector<model::ExampleInput> xs;
  for (const auto& d : docs) xs.push_back(d.input(2));
  model::MsnetConfig cfg = small_cfg(8);
  cfg.bn_momentum = 1e-300;  // freezes the running statistics as well
  TrainConfig tc;
  tc.lr = 0.0;
  tc.patience = 1;
  const std::span<const model::ExampleInput> all(xs);
  const TrainResult r = train_fold(all.first(30), all.subspan(30), cfg, tc);
  EXPECT_EQ(r.history.size(), 2u);
  EXPECT_EQ(r.best_epoch, 1u);
  EXPECT_TRUE(r.stopped_early);
  EXPECT_EQ(r.history[0].val_loss, r.history[1].val_loss);
  model::Msnet fresh(cfg);
  auto best = r.best;
  auto init = fresh.params();
  const auto a = best.all(), b = init.all();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i]->value, b[i]->value) << i;
}

TEST(TrainFoldTest, DeterministicAndBestIsMinimum) {
  numkit::Rng rng(2);
  const auto docs = testing::random_docs(rng, 37, 2, 8);
  std::vector<model::ExampleInput> xs;
  for (const auto& d : docs) xs.push_back(d.input(2));
  TrainConfig tc;
  tc.max_epochs = 6;
  tc.lr = 1e-2;
  tc.seed = 9;
  const std::span<const model::ExampleInput> all(xs);
  const TrainResult a = train_fold(all.first(29), all.subspan(29), small_cfg(8), tc);
  const TrainResult b = train_fold(all.first(29), all.subspan(29), small_cfg(8), tc);
  auto pa = a.best;
  auto pb = b.best;
  const auto va = pa.all(), vb = pb.all();
  for (std::size_t i = 0; i < va.size(); ++i) EXPECT_EQ(va[i]->value, vb[i]->value);
  EXPECT_EQ(pa.bn.running_var, pb.bn.running_var);
  for (const auto& h : a.history) EXPECT_LE(a.best_val_loss, h.val_loss);
  EXPECT_LE(a.best_val_loss, a.history.back().val_loss);
  EXPECT_EQ(a.history[a.best_epoch - 1].val_loss, a.best_val_loss);
}

TEST(TrainFoldTest, BestParamsReproduceBestLoss) {
  numkit::Rng rng(3);
  const auto docs = testing::random_docs(rng, 40, 2, 8);
  std::vector<model::ExampleInput> xs;
  for (const auto& d : docs) xs.push_back(d.input(2));
  TrainConfig tc;
  tc.max_epochs = 5;
  tc.lr = 1e-2;
  const std::span<const model::ExampleInput> all(xs);
  const TrainResult r = train_fold(all.first(30), all.subspan(30), small_cfg(8), tc);
  model::Msnet net(small_cfg(8), r.best);
  std::vector<model::ExampleInput> val(all.begin() + 30, all.end());
  std::vector<int> labels;
  for (const auto& x : val) labels.push_back(x.label);
  EXPECT_EQ(log_loss(net.predict(val), labels), r.best_val_loss);
}

TEST(TrainFoldTest, DivergenceIsReported) {
  numkit::Rng rng(4);
  const auto docs = testing::random_docs(rng, 20, 2, 8);
  std::vector<model::ExampleInput> xs;
  for (const auto& d : docs) xs.push_back(d.input(2));
  TrainConfig tc;
  tc.lr = 1e300;
  const std::span<const model::ExampleInput> all(xs);
  EXPECT_THROW(train_fold(all.first(16), all.subspan(16), small_cfg(8), tc), DivergenceError);
}

TEST(TrainFoldTest, LearnsPlantedTask) {
  const auto task = testing::planted_task(4000, 128, 2, 21);
  std::vector<model::ExampleInput> train, val;
  for (std::size_t i = 0; i < task.inputs.size(); ++i) {
    (i % 5 == 0 ? val : train).push_back(task.inputs[i]);
  }
  model::MsnetConfig cfg;
  cfg.layers = 2;
  cfg.s_dim = 16;
  cfg.hidden = 128;
  const TrainResult r = train_fold(train, val, cfg, TrainConfig{});
  EXPECT_LE(r.history.size(), 30u);
  EXPECT_LT(r.best_val_loss, 0.05);
}

TEST(CrossValidateTest, TwoFoldsOnFourRecords) {
  numkit::Rng rng(5);
  const auto docs = testing::random_docs(rng, 4, 2, 8);
  std::vector<model::ExampleInput> xs;
  for (const auto& d : docs) xs.push_back(d.input(2));
  const std::vector<int> fold{0, 1, 1, 0};
  TrainConfig tc;
  tc.max_epochs = 2;
  const CvResult r = cross_validate(xs, fold, 2, small_cfg(8), tc);
  ASSERT_EQ(r.report.folds.size(), 2u);
  for (const auto& f : r.report.folds) {
    EXPECT_EQ(f.train_size, 2u);
    EXPECT_EQ(f.val_size, 2u);
    EXPECT_GE(f.epochs_run, 1u);
  }
  EXPECT_EQ(r.models.size(), 2u);
  EXPECT_THROW(cross_validate(xs, fold, 3, small_cfg(8), tc), ValidationError);
}

TEST(CrossValidateTest, ParallelFoldsMatchSequential) {
  numkit::Rng rng(6);
  auto records_docs = testing::random_docs(rng, 60, 2, 8);
  std::vector<model::ExampleInput> xs;
  for (const auto& d : records_docs) xs.push_back(d.input(2));
  std::vector<int> fold(xs.size());
  for (std::size_t i = 0; i < fold.size(); ++i) fold[i] = static_cast<int>(i % 3);
  TrainConfig tc;
  tc.max_epochs = 4;
  tc.lr = 5e-3;
  const std::span<const model::ExampleInput> all(xs);
  const CvResult a = cross_validate(all.first(45), std::span<const int>(fold).first(45), 3,
                                    small_cfg(8), tc, all.subspan(45), 1);
  const CvResult b = cross_validate(all.first(45), std::span<const int>(fold).first(45), 3,
                                    small_cfg(8), tc, all.subspan(45), 3);
  EXPECT_EQ(a.report.to_json(), b.report.to_json());
  ASSERT_TRUE(a.test_probs && b.test_probs);
  EXPECT_EQ(*a.test_probs, *b.test_probs);
  ASSERT_TRUE(a.report.test_loss.has_value());
  for (std::size_t r = 0; r < a.test_probs->rows(); ++r) {
    const auto row = a.test_probs->row(r);
    EXPECT_NEAR(row[0] + row[1] + row[2], 1.0, 1e-9);
  }
  // Each fold model differs: seeds are derived per fold.
  EXPECT_NE(a.models[0].w_score.value, a.models[1].w_score.value);
}

TEST(SynthTest, RecordsAreValidAndPlanted) {
  synth::SynthOptions opts;
  opts.records = 300;
  opts.seed = 8;
  const auto c = synth::make_planted(opts);
  const tok::Vocab vocab = tok::Vocab::from_tokens(c.vocab);
  std::array<int, 3> counts{};
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    const auto& r = c.records[i];
    ASSERT_NO_THROW(gap::validate(r, i + 2));
    const auto d = tok::tokenize_record(r, vocab);
    ASSERT_TRUE(d.exact());
    const int p = d.tokens[d.p_index].id;
    const int a = d.tokens[d.a_span.begin].id, b = d.tokens[d.b_span.begin].id;
    const gap::Label label = gap::derive_label(r);
    ++counts[gap::class_index(label)];
    EXPECT_EQ(p == a, label == gap::Label::kA);
    EXPECT_EQ(p == b, label == gap::Label::kB);
  }
  EXPECT_GT(counts[2], 30);
  EXPECT_GT(counts[0], 90);
  EXPECT_GT(counts[1], 90);
  EXPECT_EQ(synth::make_planted(opts).records, c.records);
}

TEST(PipelineTest, TokenCountMismatchIsRejected) {
  const auto task = testing::planted_task(3, 4, 1, 1);
  std::vector<embed::EmbeddingSet> sets = pipeline::toy_embed_all(task.docs, 1, 4, 0);
  sets[1].tokens -= 1;
  sets[1].values.resize(std::size_t{sets[1].tokens} * 4);
  const embed::EmbeddingStore store(std::move(sets));
  EXPECT_THROW(pipeline::gather_all(task.corpus.records, task.docs, store, 1), ValidationError);
}

TEST(PipelineTest, AlignmentFailureNamesRecord) {
  auto task = testing::planted_task(3, 4, 1, 1);
  auto records = task.corpus.records;
  std::string prefix;
  for (int i = 0; i < 60; ++i) prefix += "w1 ";
  records[2].text = prefix + records[2].text;
  records[2].a_offset = 0;
  records[2].a_text = "w1";
  records[2].pronoun_offset += prefix.size();
  records[2].b_offset += prefix.size();
  const tok::Vocab vocab = tok::Vocab::from_tokens(task.corpus.vocab);
  try {
    pipeline::tokenize_all(records, vocab, 40);
    FAIL() << "expected RecordError";
  } catch (const RecordError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_EQ(e.id(), records[2].id);
  }
}

}  // namespace
}  // namespace msnet::train
