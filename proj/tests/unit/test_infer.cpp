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
#include <numeric>
#include <random>
#include <set>

#include "av/predict.hpp"
#include "common/error.hpp"
#include "data/synth.hpp"
#include "infer/beam.hpp"
#include "infer/fuse.hpp"
#include "infer/pipeline.hpp"
#include "support/beam_oracle.hpp"

using namespace mtcn;
using namespace mtcn::infer;

namespace {

ScoreSequence rows(std::size_t cv, std::size_t cn, const std::vector<std::vector<float>>& v,
                   const std::vector<std::vector<float>>& n) {
  ScoreSequence s;
  s.window = v.size();
  s.num_verbs = cv;
  s.num_nouns = cn;
  s.target = (s.window - 1) / 2;
  s.padded.assign(s.window, 0);
  for (const auto& r : v) s.verb_logp.insert(s.verb_logp.end(), r.begin(), r.end());
  for (const auto& r : n) s.noun_logp.insert(s.noun_logp.end(), r.begin(), r.end());
  return s;
}

}  // namespace

TEST(Beam, WindowOneIsTopKPairs) {
  const auto s = rows(2, 3, {{std::log(0.7f), std::log(0.3f)}}, {{std::log(0.5f), std::log(0.2f), std::log(0.3f)}});
  const auto h = beam_search(s, 3);
  ASSERT_EQ(h.size(), 3u);
  EXPECT_EQ(h[0].actions[0], (ActionLabel{0, 0}));
  EXPECT_EQ(h[1].actions[0], (ActionLabel{0, 2}));
  EXPECT_EQ(h[2].actions[0], (ActionLabel{1, 0}));
  EXPECT_NEAR(h[0].p_av, std::log(0.35), 1e-6);
}

TEST(Beam, WorkedThreePositionExample) {
  // One verb, two candidate nouns a and b per position.
  const auto s = rows(1, 2, {{0.0f}, {0.0f}, {0.0f}}, {{-0.1f, -2.3f}, {-0.5f, -1.0f}, {-0.1f, -2.3f}});
  const auto h = beam_search(s, 2);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h[0].actions, (LabelSeq{{0, 0}, {0, 0}, {0, 0}}));
  EXPECT_NEAR(h[0].p_av, -0.7, 1e-6);
  EXPECT_EQ(h[1].actions, (LabelSeq{{0, 0}, {0, 1}, {0, 0}}));
  EXPECT_NEAR(h[1].p_av, -1.2, 1e-6);
}

TEST(Beam, KBeyondCombinationsReturnsAllSorted) {
  const auto s = rows(1, 2, {{0.0f}, {0.0f}}, {{-0.1f, -2.3f}, {-0.5f, -1.0f}});
  const auto h = beam_search(s, 10);
  ASSERT_EQ(h.size(), 4u);
  for (std::size_t i = 1; i < h.size(); ++i) EXPECT_GE(h[i - 1].p_av, h[i].p_av);
  EXPECT_THROW(beam_search(s, 0), InvalidArgument);
}

TEST(Beam, PaddedPositionsAreFixedAndFree) {
  auto s = rows(2, 2, {{-0.1f, -2.4f}, {-0.2f, -1.7f}, {-0.3f, -1.4f}}, {{-0.7f, -0.7f}, {-0.7f, -0.7f}, {-0.7f, -0.7f}});
  s.padded[0] = 1;
  const auto h = beam_search(s, 4);
  for (const auto& x : h) {
    EXPECT_TRUE(x.actions[0].pad());
    double expect = 0;
    for (std::size_t j = 1; j < 3; ++j) expect += action_logp(s, j, x.actions[j]);
    EXPECT_DOUBLE_EQ(x.p_av, expect);
  }
}

TEST(Beam, CandidateSetHoldsJointArgmax) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto s = mtcn::testing::random_scores(rng, 1, 5, 4, i % 2, false);
    const auto c = position_candidates(s, 0, 3);
    const auto all = mtcn::testing::brute_force_topk(s, 3);
    ASSERT_EQ(c.size(), all.size());
    for (std::size_t k = 0; k < c.size(); ++k) {
      EXPECT_EQ(c[k].action.verb, all[k].actions[0].first);
      EXPECT_EQ(c[k].action.noun, all[k].actions[0].second);
    }
  }
}

TEST(Beam, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> w(1, 4), c(1, 5), k(1, 8);
  for (int inst = 0; inst < 300; ++inst) {
    const auto s = mtcn::testing::random_scores(rng, w(rng), c(rng), c(rng), inst % 2 == 0, inst % 3 == 0);
    const std::size_t K = k(rng);
    const auto got = beam_search(s, K);
    const auto want = mtcn::testing::brute_force_topk(s, K);
    ASSERT_EQ(got.size(), want.size()) << "instance " << inst;
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_NEAR(got[i].p_av, want[i].score, 1e-9);
      for (std::size_t j = 0; j < s.window; ++j) {
        EXPECT_EQ(got[i].actions[j].verb, want[i].actions[j].first) << "instance " << inst << " rank " << i;
        EXPECT_EQ(got[i].actions[j].noun, want[i].actions[j].second);
      }
    }
  }
}

TEST(Beam, JointRowsForSingleHeadModels) {
  ScoreSequence s;
  s.window = 1;
  s.num_verbs = 2;
  s.num_nouns = 2;
  s.padded = {0};
  s.verb_logp = {std::log(0.5f), std::log(0.5f)};
  s.noun_logp = {std::log(0.5f), std::log(0.5f)};
  s.action_logp = {std::log(0.1f), std::log(0.4f), std::log(0.2f), std::log(0.3f)};
  const auto h = beam_search(s, 2);
  EXPECT_EQ(h[0].actions[0], (ActionLabel{0, 1}));
  EXPECT_EQ(h[1].actions[0], (ActionLabel{1, 1}));
  EXPECT_NEAR(h[0].p_av, std::log(0.4), 1e-6);
}

TEST(Fusion, ArithmeticAndLimits) {
  EXPECT_DOUBLE_EQ(fused_score(-2.0, -1.0, 0.2), -1.8);
  EXPECT_DOUBLE_EQ(fused_score(-2.0, -1.0, 0.0), -2.0);
  EXPECT_DOUBLE_EQ(fused_score(-2.0, -1.0, 1.0), -1.0);
  EXPECT_DOUBLE_EQ(fused_score(-2.0, std::nullopt, 0.3), -2.0);
  EXPECT_DOUBLE_EQ(fused_score(-2.0, -INFINITY, 0.0), -2.0);
  EXPECT_THROW(validate_lambda(-0.01), InvalidArgument);
  EXPECT_THROW(validate_lambda(1.5), InvalidArgument);
  EXPECT_THROW(validate_lambda(NAN), InvalidArgument);
}

TEST(Fusion, LambdaZeroKeepsBeamOrderAndOneFollowsLm) {
  std::mt19937_64 rng(5);
  const auto s = mtcn::testing::random_scores(rng, 3, 4, 3, false, false);
  const auto hyps = beam_search(s, 8);
  // LM that prefers verb 3 everywhere, scaled to reorder things.
  const FunctionScorer lm([](const LabelSeq& x) {
    double v = 0;
    for (const auto& a : x) v += a.verb == 3 ? 0.0 : -1.0 - 0.1 * a.noun;
    return std::optional<double>(v);
  });
  const auto zero = fuse_and_select(hyps, lm, 0.0, 1);
  for (std::size_t i = 0; i < hyps.size(); ++i) EXPECT_EQ(zero.ranked[i].actions, hyps[i].actions);
  EXPECT_EQ(zero.chosen, hyps[0].actions[1]);

  const auto one = fuse_and_select(hyps, lm, 1.0, 1);
  for (std::size_t i = 1; i < one.ranked.size(); ++i) {
    EXPECT_GE(*one.ranked[i - 1].p_lm, *one.ranked[i].p_lm);
    EXPECT_EQ(one.ranked[i].fused, *one.ranked[i].p_lm);
  }
  EXPECT_THROW(fuse_and_select(hyps, lm, 1.1, 1), InvalidArgument);
}

TEST(Fusion, ConstantLmShiftLeavesRankingUnchanged) {
  std::mt19937_64 rng(6);
  const auto s = mtcn::testing::random_scores(rng, 4, 5, 4, false, false);
  const auto hyps = beam_search(s, 10);
  auto lm_fn = [](const LabelSeq& x) {
    double v = 0;
    for (std::size_t j = 0; j < x.size(); ++j) v -= 0.3 * ((x[j].verb * 7 + x[j].noun * 3 + j) % 5);
    return v;
  };
  const FunctionScorer base([&](const LabelSeq& x) { return std::optional<double>(lm_fn(x)); });
  const FunctionScorer shifted([&](const LabelSeq& x) { return std::optional<double>(lm_fn(x) - 42.0); });
  for (double lambda : {0.1, 0.25, 0.5}) {
    const auto a = fuse_and_select(hyps, base, lambda, 2);
    const auto b = fuse_and_select(hyps, shifted, lambda, 2);
    for (std::size_t i = 0; i < a.ranked.size(); ++i) EXPECT_EQ(a.ranked[i].actions, b.ranked[i].actions);
  }
}

TEST(Fusion, NGramSentinelFallsBackToAv) {
  std::mt19937_64 rng(7);
  const auto s = mtcn::testing::random_scores(rng, 3, 4, 4, false, false);
  const auto hyps = beam_search(s, 10);
  const lm::NGramModel empty(3, 1);
  const NGramScorer scorer(empty);
  for (double lambda : default_lambda_grid()) {
    const auto sel = fuse_and_select(hyps, scorer, lambda, 1);
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      EXPECT_EQ(sel.ranked[i].actions, hyps[i].actions);
      EXPECT_FALSE(sel.ranked[i].p_lm.has_value());
    }
  }
}

TEST(Ranking, BestHypothesisAtLambdaZeroIsTheAvRanking) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    const auto s = mtcn::testing::random_scores(rng, 3, 6, 7, i % 2, false);
    auto hyps = beam_search(s, 10);
    fuse(hyps, 0.0);
    const auto r = rank_centre(s, hyps, Top5Protocol::best_hypothesis);
    const auto av = position_candidates(s, 1, 5);
    ASSERT_EQ(r.actions.size(), 5u);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(r.actions[k], av[k].action);
    // Verb list is the verb row's own ranking.
    const auto vrow = s.verb_row(1);
    for (std::size_t k = 1; k < r.verbs.size(); ++k) {
      EXPECT_TRUE(vrow[r.verbs[k - 1]] > vrow[r.verbs[k]] ||
                  (vrow[r.verbs[k - 1]] == vrow[r.verbs[k]] && r.verbs[k - 1] < r.verbs[k]));
    }
  }
}

TEST(Ranking, ChosenActionLeadsUnderBothProtocols) {
  std::mt19937_64 rng(9);
  const auto s = mtcn::testing::random_scores(rng, 3, 6, 7, false, false);
  auto hyps = beam_search(s, 10);
  for (auto& h : hyps) h.p_lm = h.actions[1].noun == 6 ? 0.0 : -50.0;
  fuse(hyps, 0.9);
  for (auto p : {Top5Protocol::best_hypothesis, Top5Protocol::cross_hypothesis}) {
    const auto r = rank_centre(s, hyps, p);
    EXPECT_EQ(r.actions[0], r.chosen);
    EXPECT_EQ(r.verbs[0], r.chosen.verb);
    EXPECT_EQ(r.nouns[0], r.chosen.noun);
    EXPECT_EQ(r.actions.size(), 5u);
    std::set<ActionLabel> uniq(r.actions.begin(), r.actions.end());
    EXPECT_EQ(uniq.size(), 5u);
  }
  const auto cross = rank_centre(s, hyps, Top5Protocol::cross_hypothesis);
  std::vector<ActionLabel> distinct;
  for (const auto& h : hyps)
    if (std::find(distinct.begin(), distinct.end(), h.actions[1]) == distinct.end()) distinct.push_back(h.actions[1]);
  for (std::size_t k = 0; k < std::min<std::size_t>(5, distinct.size()); ++k) EXPECT_EQ(cross.actions[k], distinct[k]);
  EXPECT_EQ(parse_top5_protocol("cross_hypothesis"), Top5Protocol::cross_hypothesis);
  EXPECT_THROW(parse_top5_protocol("both"), InvalidArgument);
}

namespace {

std::vector<DecodedWindow> random_decoded(std::mt19937_64& rng, std::size_t n) {
  std::vector<DecodedWindow> out;
  for (std::size_t i = 0; i < n; ++i) {
    DecodedWindow d;
    d.scores = mtcn::testing::random_scores(rng, 3, 4, 4, false, false);
    d.hyps = beam_search(d.scores, 10);
    // Truth: the second-ranked centre action half of the time, so an LM that knows it can help.
    d.truth = d.hyps[i % 2 ? 0 : std::min<std::size_t>(3, d.hyps.size() - 1)].actions[1];
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

TEST(GridSearch, SingletonGridAndErrors) {
  std::mt19937_64 rng(10);
  auto w = random_decoded(rng, 20);
  const std::vector<double> zero{0.0};
  EXPECT_EQ(grid_search_lambda(w, zero).best_lambda, 0.0);
  EXPECT_THROW(grid_search_lambda({}, zero), InvalidArgument);
  EXPECT_THROW(grid_search_lambda(w, std::vector<double>{}), InvalidArgument);
}

TEST(GridSearch, UniformLmSelectsZero) {
  std::mt19937_64 rng(11);
  auto w = random_decoded(rng, 40);
  // A uniform LM gives every full sequence the same score.
  attach_lm(w, FunctionScorer([](const LabelSeq& x) { return std::optional<double>(-3.7 * x.size()); }));
  const auto res = grid_search_lambda(w, default_lambda_grid());
  EXPECT_EQ(res.best_lambda, 0.0);
  ASSERT_EQ(res.accuracy.size(), 7u);
  for (const auto& [l, acc] : res.accuracy) EXPECT_EQ(acc, res.accuracy[0].second);
}

TEST(GridSearch, InformedLmSelectsPositiveLambda) {
  std::mt19937_64 rng(12);
  auto w = random_decoded(rng, 40);
  // Oracle scorer: strongly rewards the true centre action.
  for (auto& d : w) {
    for (auto& h : d.hyps) h.p_lm = h.actions[1] == d.truth ? 0.0 : -30.0;
  }
  const auto res = grid_search_lambda(w, default_lambda_grid());
  EXPECT_GT(res.best_lambda, 0.0);
  EXPECT_GT(res.accuracy.back().second, res.accuracy.front().second);
}

TEST(Pipeline, RowsDependOnlyOnTheirOwnWindow) {
  data::SynthSpec spec;
  spec.videos = 3;
  spec.min_actions = spec.max_actions = 12;
  spec.participants = 3;
  spec.held_out_participants = 1;
  spec.feature_dim = 6;
  spec.num_verbs = 4;
  spec.num_nouns = 3;
  spec.clips_per_action = 2;
  const auto corpus = data::synth_generate(spec, 2);
  av::AvConfig cfg;
  cfg.window = 3;
  cfg.visual_dim = cfg.audio_dim = 6;
  cfg.model_dim = 8;
  cfg.heads = 2;
  cfg.layers = 1;
  cfg.ffn_dim = 16;
  cfg.num_verbs = 4;
  cfg.num_nouns = 3;
  cfg.clips_per_action = 2;
  const av::AvModel model(cfg, 4);
  const auto& store = corpus.store;
  for (auto mode : {data::WindowMode::centre, data::WindowMode::online}) {
    const auto preds = predict_all(model, store, mode);
    std::vector<std::size_t> all(store.size());
    std::iota(all.begin(), all.end(), 0);
    const auto dec = decode(store, preds, all, 5, mode, 4, 4, 3);
    // Row for store row r matches its own centre evaluation wherever it appears.
    for (const auto& d : dec) {
      const auto win = data::make_window(store, d.scores.anchor_row, 5, mode);
      EXPECT_EQ(d.scores.target, data::target_slot(5, mode));
      for (std::size_t j = 0; j < 5; ++j) {
        if (win.padded(j)) {
          EXPECT_TRUE(d.scores.padded[j]);
          for (float v : d.scores.verb_row(j)) EXPECT_FLOAT_EQ(v, -std::log(4.0f));
          continue;
        }
        const std::size_t r = *win.slots[j];
        const std::vector<std::size_t> one{r};
        const auto direct = av::predict_centres(model, store, one, mode);
        const auto row = d.scores.verb_row(j);
        EXPECT_TRUE(std::equal(row.begin(), row.end(), direct[0].verb_logp.begin()));
        const auto nrow = d.scores.noun_row(j);
        EXPECT_TRUE(std::equal(nrow.begin(), nrow.end(), direct[0].noun_logp.begin()));
      }
    }
  }
}

TEST(Pipeline, WindowOneIsThePlainClassifier) {
  data::SynthSpec spec;
  spec.videos = 2;
  spec.min_actions = spec.max_actions = 10;
  spec.participants = 2;
  spec.held_out_participants = 1;
  spec.feature_dim = 6;
  spec.num_verbs = 4;
  spec.num_nouns = 3;
  spec.clips_per_action = 2;
  const auto corpus = data::synth_generate(spec, 2);
  av::AvConfig cfg;
  cfg.window = 1;
  cfg.visual_dim = cfg.audio_dim = 6;
  cfg.model_dim = 8;
  cfg.heads = 2;
  cfg.layers = 1;
  cfg.ffn_dim = 16;
  cfg.num_verbs = 4;
  cfg.num_nouns = 3;
  cfg.clips_per_action = 2;
  const av::AvModel model(cfg, 4);
  const auto preds = predict_all(model, corpus.store, data::WindowMode::centre);
  std::vector<std::size_t> all(corpus.store.size());
  std::iota(all.begin(), all.end(), 0);
  const auto dec = decode(corpus.store, preds, all, 1, data::WindowMode::centre, 10, 4, 3);
  for (std::size_t i = 0; i < dec.size(); ++i) {
    const auto& p = preds[i];
    const int v = std::max_element(p.verb_logp.begin(), p.verb_logp.end()) - p.verb_logp.begin();
    const int n = std::max_element(p.noun_logp.begin(), p.noun_logp.end()) - p.noun_logp.begin();
    EXPECT_EQ(dec[i].hyps[0].actions[0], (ActionLabel{v, n}));
  }
}
