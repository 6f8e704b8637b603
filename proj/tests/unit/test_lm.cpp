// Copyright 2026 The MTCN Authors.
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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>

#include "common/error.hpp"
#include "data/synth.hpp"
#include "lm/model.hpp"
#include "lm/ngram.hpp"
#include "lm/score.hpp"
#include "lm/train.hpp"
#include "numcore/ops.hpp"
#include "numcore/params.hpp"

using namespace mtcn;
using namespace mtcn::lm;
using numcore::Rng;

namespace {

LmConfig small_config(std::size_t w = 5, std::size_t cv = 4, std::size_t cn = 3) {
  LmConfig c;
  c.window = w;
  c.model_dim = 16;
  c.layers = 2;
  c.heads = 2;
  c.ffn_dim = 32;
  c.num_verbs = cv;
  c.num_nouns = cn;
  c.dropout_enc = 0.0f;
  c.dropout_layer = 0.0f;
  c.init_std = 0.3f;
  return c;
}

LabelSeq random_seq(const LmConfig& c, Rng& rng, bool allow_pad = true) {
  LabelSeq s(c.window);
  for (auto& a : s) a = {static_cast<int>(numcore::uniform_index(rng, c.num_verbs)),
                         static_cast<int>(numcore::uniform_index(rng, c.num_nouns))};
  if (allow_pad && numcore::uniform01(rng) < 0.3f) s[0] = {};
  return s;
}

void zero_all(LmModel& m) {
  for (auto& e : m.params().entries()) {
    auto d = e.tensor.mutable_data();
    std::fill(d.begin(), d.end(), 0.0f);
  }
}

std::vector<float> row(const numcore::Tensor& t, std::size_t r) {
  const auto d = t.data().subspan(r * t.cols(), t.cols());
  return {d.begin(), d.end()};
}

}  // namespace

TEST(LmForward, ShapesAtWindowFive) {
  const auto cfg = small_config(5, 7, 6);
  LmModel m(cfg, 1);
  Rng rng(2);
  LmBatch b;
  m.append(b, random_seq(cfg, rng, false), 2);
  const auto out = m.forward(b, false, rng);
  EXPECT_EQ(out.verb_logits.shape(), (numcore::Shape{5, 7}));
  EXPECT_EQ(out.noun_logits.shape(), (numcore::Shape{5, 6}));
}

TEST(LmForward, VocabReservesMaskAndPad) {
  LmModel m(small_config(5, 7, 6), 1);
  EXPECT_EQ(m.verb_vocab().mask(), 7);
  EXPECT_EQ(m.verb_vocab().pad(), 8);
  EXPECT_EQ(m.noun_vocab().mask(), 6);
  EXPECT_EQ(m.noun_vocab().pad(), 7);
  EXPECT_EQ(m.params().get("emb_v").dim(0), 9u);
  EXPECT_EQ(m.params().get("emb_v").dim(1), 8u);  // half of the model width
}

TEST(LmForward, ZeroWeightsGiveUniformEverywhere) {
  const auto cfg = small_config(5, 4, 3);
  LmModel m(cfg, 1);
  zero_all(m);
  Rng rng(3);
  LmBatch b;
  m.append(b, random_seq(cfg, rng), 1);
  const auto out = m.forward(b, false, rng);
  for (float v : out.verb_logits.data()) EXPECT_EQ(v, 0.0f);
  for (float v : out.noun_logits.data()) EXPECT_EQ(v, 0.0f);
}

TEST(LmForward, TrainingRequiresExactlyOneMask) {
  const auto cfg = small_config();
  LmModel m(cfg, 1);
  Rng rng(4);
  const auto s = random_seq(cfg, rng, false);
  LmBatch none, one, two;
  m.append(none, s);
  EXPECT_THROW(m.forward(none, true, rng), InvalidArgument);
  m.append(one, s, 3);
  EXPECT_NO_THROW(m.forward(one, true, rng));
  m.append(two, s, 1);
  two.verbs[3] = m.verb_vocab().mask();
  two.nouns[3] = m.noun_vocab().mask();
  EXPECT_THROW(m.forward(two, true, rng), InvalidArgument);
  // Scoring may run without any mask.
  EXPECT_NO_THROW(m.forward(none, false, rng));
}

TEST(LmForward, RejectsWrongLengthAndVocabulary) {
  const auto cfg = small_config();
  LmModel m(cfg, 1);
  LmBatch b;
  EXPECT_THROW(m.append(b, LabelSeq(3, {0, 0})), DimensionError);
  EXPECT_THROW(m.append(b, LabelSeq(5, {4, 0})), InvalidArgument);
  EXPECT_THROW(validate([] { auto c = small_config(); c.window = 4; return c; }()), InvalidArgument);
}

TEST(LmForward, PaddingDoesNotLeakIntoRealPositions) {
  // Rewriting the PAD embeddings must not move any output at a real position.
  const auto cfg = small_config();
  LmModel a(cfg, 5), b(cfg, 5);
  for (const char* name : {"emb_v", "emb_n"}) {
    auto& t = b.params().get(name);
    const std::size_t pad_row = t.dim(0) - 1;
    for (std::size_t c = 0; c < t.cols(); ++c) t.mutable_data()[pad_row * t.cols() + c] = 7.0f + c;
  }
  Rng rng(6);
  auto s = random_seq(cfg, rng, false);
  s[0] = {};
  s[4] = {};
  LmBatch ia, ib;
  a.append(ia, s, 2);
  b.append(ib, s, 2);
  const auto oa = a.forward(ia, false, rng);
  const auto ob = b.forward(ib, false, rng);
  for (std::size_t r = 1; r < 4; ++r) {
    EXPECT_EQ(row(oa.verb_logits, r), row(ob.verb_logits, r));
    EXPECT_EQ(row(oa.noun_logits, r), row(ob.noun_logits, r));
  }
}

TEST(LmForward, VocabularyPermutationEquivariance) {
  // Relabel verb classes with a permutation: permute embedding rows and head
  // columns, feed permuted labels, expect permuted logits.
  const auto cfg = small_config(5, 5, 3);
  LmModel a(cfg, 11), b(cfg, 11);
  const std::vector<int> perm{3, 0, 4, 1, 2};
  auto& ea = a.params().get("emb_v");
  auto& eb = b.params().get("emb_v");
  const std::size_t half = ea.cols();
  for (std::size_t c = 0; c < 5; ++c)
    std::copy_n(ea.data().data() + c * half, half, eb.mutable_data().data() + perm[c] * half);
  auto& wa = a.params().get("head_v.weight");
  auto& wb = b.params().get("head_v.weight");
  auto& ba = a.params().get("head_v.bias");
  auto& bb = b.params().get("head_v.bias");
  for (std::size_t r = 0; r < cfg.model_dim; ++r)
    for (std::size_t c = 0; c < 5; ++c) wb.mutable_data()[r * 5 + perm[c]] = wa.data()[r * 5 + c];
  for (std::size_t c = 0; c < 5; ++c) bb.mutable_data()[perm[c]] = ba.data()[c] + 0.1f * c;
  for (std::size_t c = 0; c < 5; ++c) ba.mutable_data()[c] = ba.data()[c] + 0.1f * c;

  Rng rng(12);
  auto s = random_seq(cfg, rng, false);
  auto sp = s;
  for (auto& x : sp) x.verb = perm[x.verb];
  LmBatch ia, ib;
  a.append(ia, s, 2);
  b.append(ib, sp, 2);
  const auto oa = a.forward(ia, false, rng);
  const auto ob = b.forward(ib, false, rng);
  for (std::size_t r = 0; r < cfg.window; ++r) {
    for (std::size_t c = 0; c < 5; ++c) {
      EXPECT_NEAR(oa.verb_logits.data()[r * 5 + c], ob.verb_logits.data()[r * 5 + perm[c]], 1e-5);
    }
    EXPECT_EQ(row(oa.noun_logits, r), row(ob.noun_logits, r));
  }
}

TEST(LmLoss, OnlyMaskedPositionFeedsTheGradient) {
  // d loss / d head bias must equal softmax(row at masked position) - onehot,
  // read from an independent all-positions forward.
  const auto cfg = small_config(5, 4, 3);
  LmModel m(cfg, 21);
  Rng rng(22);
  const auto s = random_seq(cfg, rng, false);
  LmBatch b;
  m.append(b, s, 3);
  const std::vector<std::size_t> readout{3};
  const auto out = m.forward(b, true, rng, readout);
  const std::vector<ActionLabel> target{s[3]};
  numcore::backward(masked_loss(m, out, target));
  const auto grad = m.params().get("head_v.bias").grad();

  numcore::NoGradGuard ng;
  const auto all = m.forward(b, false, rng);
  auto r = row(all.verb_logits, 3);
  const float mx = *std::max_element(r.begin(), r.end());
  double z = 0;
  for (float v : r) z += std::exp(v - mx);
  for (std::size_t c = 0; c < 4; ++c) {
    const double p = std::exp(r[c] - mx) / z - (static_cast<int>(c) == s[3].verb ? 1.0 : 0.0);
    EXPECT_NEAR(grad[c], p, 1e-5);
  }
}

TEST(LmLoss, FiniteDifferenceOnEmbeddings) {
  // Float central differences; the ops themselves are checked against double
  // references elsewhere, this guards the LM wiring (concat, gather, heads).
  const auto cfg = small_config(3, 3, 3);
  LmModel m(cfg, 31);
  Rng rng(32);
  std::vector<LabelSeq> seqs{random_seq(cfg, rng, false), random_seq(cfg, rng, false)};
  LmBatch b;
  std::vector<std::size_t> readout;
  std::vector<ActionLabel> targets;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    readout.push_back(i * cfg.window + i);
    targets.push_back(seqs[i][i]);
    m.append(b, seqs[i], static_cast<std::ptrdiff_t>(i));
  }
  auto eval = [&] { return static_cast<double>(masked_loss(m, m.forward(b, true, rng, readout), targets).item()); };
  numcore::backward(masked_loss(m, m.forward(b, true, rng, readout), targets));
  for (const char* name : {"emb_v", "emb_n", "pos", "head_n.weight"}) {
    auto& t = m.params().get(name);
    const std::vector<float> g(t.grad().begin(), t.grad().end());
    numcore::NoGradGuard ng;
    double scale = 0;
    for (float v : g) scale = std::max(scale, std::abs(static_cast<double>(v)));
    for (std::size_t i = 0; i < t.numel(); ++i) {
      const float orig = t.data()[i];
      const float h = 1e-2f;
      t.mutable_data()[i] = orig + h;
      const double up = eval();
      t.mutable_data()[i] = orig - h;
      const double down = eval();
      t.mutable_data()[i] = orig;
      const double num = (up - down) / (2.0 * h);
      EXPECT_NEAR(g[i], num, 2e-2 * std::max(scale, 1e-2)) << name << "[" << i << "]";
    }
  }
}

TEST(LmLoss, SingleClassVocabularyGivesZeroLoss) {
  auto cfg = small_config(3, 1, 1);
  LmModel m(cfg, 1);
  numcore::Optimizer opt(m.params(), {numcore::OptimizerKind::adam, 1e-3f});
  std::vector<LabelSeq> truth{LabelSeq(3, {0, 0}), LabelSeq(3, {0, 0})};
  auto working = truth;
  Rng rng(2);
  EXPECT_EQ(train_step_scheduled(m, opt, truth, working, rng).loss, 0.0f);
}

TEST(LmTrain, ScheduledStepTouchesOnlyTheMaskedPosition) {
  const auto cfg = small_config(5, 6, 5);
  LmModel m(cfg, 41);
  numcore::Optimizer opt(m.params(), {numcore::OptimizerKind::adam, 1e-3f});
  Rng rng(42);
  std::vector<LabelSeq> truth;
  for (int i = 0; i < 16; ++i) truth.push_back(random_seq(cfg, rng));
  auto working = truth;
  const auto step = train_step_scheduled(m, opt, truth, working, rng);
  ASSERT_EQ(step.masked.size(), truth.size());
  std::size_t changed = 0;
  for (std::size_t b = 0; b < truth.size(); ++b) {
    EXPECT_FALSE(truth[b][step.masked[b]].pad());
    for (std::size_t t = 0; t < cfg.window; ++t) {
      if (t != step.masked[b]) EXPECT_EQ(working[b][t], truth[b][t]);
    }
    changed += working[b] != truth[b];
  }
  // Argmax replacement of an untrained model is almost never the truth.
  EXPECT_GT(changed, 0u);

  auto short_truth = std::vector<LabelSeq>{LabelSeq(3, {0, 0})};
  auto short_work = short_truth;
  EXPECT_THROW(train_step_scheduled(m, opt, short_truth, short_work, rng), InvalidArgument);
}

TEST(LmTrain, ReplaceProbabilityZeroKeepsGroundTruth) {
  const auto cfg = small_config();
  LmModel m(cfg, 43);
  numcore::Optimizer opt(m.params(), {numcore::OptimizerKind::adam, 1e-3f});
  Rng rng(44);
  std::vector<LabelSeq> truth;
  for (int i = 0; i < 8; ++i) truth.push_back(random_seq(cfg, rng));
  auto working = truth;
  train_step_scheduled(m, opt, truth, working, rng, 0.0f);
  EXPECT_EQ(working, truth);
}

TEST(LmTrain, PlateauDecayAfterPatience) {
  const auto cfg = small_config();
  LmModel m(cfg, 45);
  Rng rng(46);
  std::vector<LabelSeq> seqs;
  for (int i = 0; i < 8; ++i) seqs.push_back(random_seq(cfg, rng, false));
  LmTrainConfig tc;
  tc.epochs = 4;
  tc.plateau_patience = 2;
  tc.optimizer.lr = 1e-12f;  // frozen model: validation accuracy never improves
  const auto log = train_lm(m, seqs, seqs, tc, 7);
  ASSERT_EQ(log.lr.size(), 4u);
  EXPECT_FLOAT_EQ(log.lr[0], 1e-12f);
  EXPECT_FLOAT_EQ(log.lr[2], 1e-12f);
  EXPECT_FLOAT_EQ(log.lr[3], 1e-13f);
}

TEST(LmPll, UniformModelValue) {
  for (auto [cv, cn] : {std::pair{4, 3}, std::pair{97, 300}, std::pair{1, 7}}) {
    auto cfg = small_config(5, cv, cn);
    LmModel m(cfg, 1);
    zero_all(m);
    Rng rng(8);
    const auto s = random_seq(cfg, rng, false);
    const double expect = 5.0 * (std::log(1.0 / cv) + std::log(1.0 / cn));
    EXPECT_DOUBLE_EQ(sequence_pll(m, s), expect);
    EXPECT_DOUBLE_EQ(sequence_pll_batch(m, std::vector<LabelSeq>{s})[0], expect);
  }
}

TEST(LmPll, EqualsSumOfSingleMaskScores) {
  const auto cfg = small_config(5, 6, 4);
  LmModel m(cfg, 51);
  Rng rng(52);
  std::vector<LabelSeq> seqs;
  for (int i = 0; i < 100; ++i) seqs.push_back(random_seq(cfg, rng));
  const auto batched = sequence_pll_batch(m, seqs, 64);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    double forward = 0, reverse = 0;
    for (std::size_t t = 0; t < cfg.window; ++t)
      if (!seqs[i][t].pad()) forward += masked_logp(m, seqs[i], t);
    for (std::size_t t = cfg.window; t-- > 0;)
      if (!seqs[i][t].pad()) reverse += masked_logp(m, seqs[i], t);
    EXPECT_NEAR(sequence_pll(m, seqs[i]), forward, 1e-6);
    EXPECT_NEAR(forward, reverse, 1e-6);
    EXPECT_NEAR(batched[i], forward, 1e-6);
  }
}

TEST(LmPll, SingleHeadUsesActionDistribution) {
  auto cfg = small_config(3, 3, 4);
  cfg.single_head = true;
  LmModel m(cfg, 1);
  EXPECT_EQ(m.verb_vocab().classes, 12u);
  zero_all(m);
  EXPECT_DOUBLE_EQ(sequence_pll(m, LabelSeq(3, {2, 3})), 3.0 * std::log(1.0 / 12));
}

TEST(LmCheckpoint, ReloadReproducesScores) {
  const auto cfg = small_config();
  LmModel a(cfg, 61), b(cfg, 62);
  const auto path = std::filesystem::temp_directory_path() / "mtcn_lm_ckpt.bin";
  numcore::save_checkpoint(a.params(), path);
  numcore::load_checkpoint(b.params(), path);
  std::filesystem::remove(path);
  Rng rng(63);
  const auto s = random_seq(cfg, rng);
  EXPECT_EQ(sequence_pll(a, s), sequence_pll(b, s));
  EXPECT_EQ(a.verb_vocab().mask(), b.verb_vocab().mask());
}

namespace {

enum Verb { turn_on, wash, turn_off, pick_up, dry, open_, close_, take };
enum Noun { tap, hands, towel, cupboard, plate, knife };

// Videos of random filler actions with the hand-washing routine embedded.
std::vector<LabelSeq> routine_corpus(Rng& rng) {
  const LabelSeq routine{{turn_on, tap}, {wash, hands}, {turn_off, tap}, {pick_up, towel}, {dry, hands}};
  std::vector<LabelSeq> videos;
  for (int v = 0; v < 60; ++v) {
    LabelSeq seq;
    for (int rep = 0; rep < 3; ++rep) {
      const std::size_t filler = 1 + numcore::uniform_index(rng, 3);
      for (std::size_t f = 0; f < filler; ++f)
        seq.push_back({static_cast<int>(open_ + numcore::uniform_index(rng, 3)),
                       static_cast<int>(cupboard + numcore::uniform_index(rng, 3))});
      seq.insert(seq.end(), routine.begin(), routine.end());
    }
    videos.push_back(std::move(seq));
  }
  return videos;
}

}  // namespace

TEST(LmTrain, LearnsTheHandWashingRoutine) {
  Rng rng(71);
  const auto videos = routine_corpus(rng);
  std::vector<LabelSeq> windows;
  for (const auto& v : videos)
    for (std::size_t s = 0; s + 5 <= v.size(); ++s) windows.emplace_back(v.begin() + s, v.begin() + s + 5);
  auto cfg = small_config(5, 8, 6);
  cfg.model_dim = 32;
  cfg.heads = 4;
  cfg.ffn_dim = 64;
  LmModel m(cfg, 72);
  LmTrainConfig tc;
  tc.epochs = 15;
  tc.batch_size = 32;
  const auto log = train_lm(m, windows, {}, tc, 73);
  EXPECT_LT(log.epoch_loss.back(), std::log(8.0) + std::log(6.0));

  const std::vector<LabelSeq> query{
      {{turn_on, tap}, {wash, hands}, {}, {pick_up, towel}, {dry, hands}}};
  LabelSeq q = query[0];
  q[2] = {0, 0};  // placeholder under the mask
  const auto pred = predict_masked(m, std::vector<LabelSeq>{q}, 2);
  EXPECT_EQ(pred[0], (ActionLabel{turn_off, tap}));
}

TEST(LmPll, TrainedModelPrefersRealOverShuffledSequences) {
  data::SynthSpec spec;
  spec.videos = 20;
  spec.noun_persistence = 0.9;
  const auto corpus = data::synth_generate(spec, 5);
  const auto train = window_corpus(corpus.store, corpus.splits.train, 5, data::WindowMode::centre);
  auto cfg = small_config(5, spec.num_verbs, spec.num_nouns);
  cfg.model_dim = 32;
  cfg.heads = 4;
  cfg.ffn_dim = 64;
  LmModel m(cfg, 81);
  LmTrainConfig tc;
  tc.epochs = 4;
  const auto log = train_lm(m, train, {}, tc, 82);
  EXPECT_LT(log.epoch_loss.back(), std::log(spec.num_verbs) + std::log(spec.num_nouns));

  // Shuffle oracle: permute positions within each window, keeping the label multiset.
  Rng rng(83);
  std::vector<LabelSeq> real, shuffled;
  for (std::size_t i = 0; i < train.size(); i += 7) {
    if (std::any_of(train[i].begin(), train[i].end(), [](const ActionLabel& a) { return a.pad(); })) continue;
    real.push_back(train[i]);
    auto s = train[i];
    std::shuffle(s.begin(), s.end(), rng);
    shuffled.push_back(s);
  }
  const auto pr = sequence_pll_batch(m, real), ps = sequence_pll_batch(m, shuffled);
  const double mr = std::accumulate(pr.begin(), pr.end(), 0.0) / pr.size();
  const double ms = std::accumulate(ps.begin(), ps.end(), 0.0) / ps.size();
  EXPECT_GT(mr, ms);
}

TEST(NGram, RepeatedWindowIsCertain) {
  const LabelSeq w{{1, 1}, {2, 2}, {3, 3}};
  const std::vector<LabelSeq> corpus(4, w);
  const auto m = ngram_build(corpus, 3, 1);
  EXPECT_EQ(*ngram_score(w, m), 0.0);
}

TEST(NGram, CountsThreeToOne) {
  std::vector<LabelSeq> corpus;
  for (int i = 0; i < 3; ++i) corpus.push_back({{0, 0}, {1, 1}, {0, 0}});
  corpus.push_back({{0, 0}, {2, 2}, {0, 0}});
  const auto m = ngram_build(corpus, 3, 1);
  EXPECT_DOUBLE_EQ(*ngram_score({{0, 0}, {1, 1}, {0, 0}}, m), std::log(0.75));
  EXPECT_DOUBLE_EQ(*ngram_score({{0, 0}, {2, 2}, {0, 0}}, m), std::log(0.25));
  EXPECT_EQ(*ngram_score({{0, 0}, {3, 3}, {0, 0}}, m), -std::numeric_limits<double>::infinity());
  EXPECT_FALSE(ngram_score({{1, 0}, {1, 1}, {0, 0}}, m).has_value());
  EXPECT_TRUE(m.table({{1, 0}, {0, 0}}).empty());
}

TEST(NGram, MatchesBruteForceCounting) {
  Rng rng(91);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t w = trial % 2 ? 3 : 5;
    const std::size_t target = trial == 4 ? w - 1 : (w - 1) / 2;
    std::vector<LabelSeq> corpus;
    std::size_t windows = 0;
    while (windows < 10000) {
      LabelSeq s(2 + numcore::uniform_index(rng, 30));
      for (auto& a : s) a = {static_cast<int>(numcore::uniform_index(rng, 3)), static_cast<int>(numcore::uniform_index(rng, 2))};
      if (s.size() >= w) windows += s.size() - w + 1;
      corpus.push_back(std::move(s));
    }
    const auto m = ngram_build(corpus, w, target);
    // Oracle: flat list of every window, counted by linear scans.
    std::vector<LabelSeq> all;
    for (const auto& s : corpus)
      for (std::size_t i = 0; i + w <= s.size(); ++i) all.emplace_back(s.begin() + i, s.begin() + i + w);
    ASSERT_EQ(all.size(), windows);
    for (std::size_t q = 0; q < 200; ++q) {
      const auto& probe = all[numcore::uniform_index(rng, all.size())];
      std::uint64_t same_ctx = 0, same_all = 0;
      for (const auto& x : all) {
        bool ctx = true;
        for (std::size_t t = 0; t < w; ++t)
          if (t != target && !(x[t] == probe[t])) ctx = false;
        if (!ctx) continue;
        ++same_ctx;
        same_all += x[target] == probe[target];
      }
      EXPECT_EQ(*ngram_score(probe, m), std::log(static_cast<double>(same_all) / static_cast<double>(same_ctx)));
    }
  }
}

TEST(NGram, TextRoundTripIsSortedAndExact) {
  std::vector<LabelSeq> corpus{{{2, 1}, {0, 0}, {1, 1}, {3, 0}}, {{1, 0}, {0, 0}, {1, 1}}};
  const auto m = ngram_build(corpus, 3, 1);
  const auto text = ngram_to_text(m);
  EXPECT_EQ(text, "ngram\t3\t1\n0:0 _ 3:0\t1:1\t1\n1:0 _ 1:1\t0:0\t1\n2:1 _ 1:1\t0:0\t1\n");
  EXPECT_EQ(ngram_to_text(ngram_from_text(text)), text);
  EXPECT_THROW(ngram_from_text("ngram\t3\t1\n0:0 _\t1:1\t1\n"), FormatError);
  EXPECT_THROW(ngram_from_text("ngram\t3\t1\n0:0 _ 1:x\t1:1\t1\n"), FormatError);
  EXPECT_THROW(ngram_from_text("bogus\n"), FormatError);
}
