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

#include "infer/fuse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"
#include "lm/score.hpp"

namespace mtcn::infer {

std::vector<std::optional<double>> MlmScorer::score(std::span<const LabelSeq> seqs) const {
  const auto pll = lm::sequence_pll_batch(model_, seqs);
  return {pll.begin(), pll.end()};
}

std::vector<std::optional<double>> NGramScorer::score(std::span<const LabelSeq> seqs) const {
  std::vector<std::optional<double>> out;
  out.reserve(seqs.size());
  for (const auto& s : seqs) out.push_back(lm::ngram_score(s, model_));
  return out;
}

std::vector<std::optional<double>> FunctionScorer::score(std::span<const LabelSeq> seqs) const {
  std::vector<std::optional<double>> out;
  out.reserve(seqs.size());
  for (const auto& s : seqs) out.push_back(fn_(s));
  return out;
}

void validate_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw InvalidArgument("fusion: lambda must lie in [0, 1], got " + std::to_string(lambda));
  }
}

double fused_score(double p_av, const std::optional<double>& p_lm, double lambda) {
  // The limits are taken literally so that 0 * -inf never appears.
  if (!p_lm || lambda == 0.0) return p_av;
  if (lambda == 1.0) return *p_lm;
  return lambda * *p_lm + (1.0 - lambda) * p_av;
}

void fuse(std::vector<BeamHypothesis>& hyps, double lambda) {
  validate_lambda(lambda);
  for (auto& h : hyps) h.fused = fused_score(h.p_av, h.p_lm, lambda);
  std::sort(hyps.begin(), hyps.end(), [](const BeamHypothesis& a, const BeamHypothesis& b) {
    if (a.fused != b.fused) return a.fused > b.fused;
    return a.actions < b.actions;
  });
}

Selection fuse_and_select(std::vector<BeamHypothesis> hyps, const SequenceScorer& scorer, double lambda,
                          std::size_t target) {
  validate_lambda(lambda);
  if (hyps.empty()) throw InvalidArgument("fusion: no hypotheses");
  std::vector<LabelSeq> seqs;
  for (const auto& h : hyps) {
    if (target >= h.actions.size()) throw InvalidArgument("fusion: target index outside the hypothesis");
    seqs.push_back(h.actions);
  }
  const auto lm = scorer.score(seqs);
  for (std::size_t i = 0; i < hyps.size(); ++i) hyps[i].p_lm = lm[i];
  fuse(hyps, lambda);
  Selection sel;
  sel.chosen = hyps.front().actions[target];
  sel.ranked = std::move(hyps);
  return sel;
}

void attach_lm(std::span<DecodedWindow> windows, const SequenceScorer& scorer) {
  std::vector<LabelSeq> seqs;
  for (const auto& w : windows)
    for (const auto& h : w.hyps) seqs.push_back(h.actions);
  const auto lm = scorer.score(seqs);
  std::size_t i = 0;
  for (auto& w : windows)
    for (auto& h : w.hyps) h.p_lm = lm[i++];
}

Top5Protocol parse_top5_protocol(const std::string& name) {
  if (name == "best_hypothesis") return Top5Protocol::best_hypothesis;
  if (name == "cross_hypothesis") return Top5Protocol::cross_hypothesis;
  throw InvalidArgument("unknown top-5 protocol '" + name + "' (expected best_hypothesis or cross_hypothesis)");
}

std::string to_string(Top5Protocol p) {
  return p == Top5Protocol::best_hypothesis ? "best_hypothesis" : "cross_hypothesis";
}

namespace {

std::vector<int> ranked_ids(std::span<const float> row) {
  std::vector<int> idx(row.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return row[a] > row[b]; });
  return idx;
}

template <class T>
void fill_unique(std::vector<T>& out, std::span<const T> more, std::size_t n) {
  for (const auto& x : more) {
    if (out.size() >= n) return;
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  }
}

}  // namespace

CentreRanking rank_centre(const ScoreSequence& s, std::span<const BeamHypothesis> ranked, Top5Protocol protocol,
                          std::size_t n) {
  if (ranked.empty()) throw InvalidArgument("ranking: no hypotheses");
  if (n == 0) throw InvalidArgument("ranking: n must be at least 1");
  const std::size_t t = s.target;
  CentreRanking r;
  r.chosen = ranked.front().actions[t];

  std::vector<ActionLabel> lead{r.chosen};
  if (protocol == Top5Protocol::cross_hypothesis) {
    for (const auto& h : ranked) fill_unique(lead, std::span<const ActionLabel>(&h.actions[t], 1), n);
  }
  std::vector<ActionLabel> av_actions;
  for (const auto& c : position_candidates(s, t, n)) av_actions.push_back(c.action);
  r.actions = lead;
  fill_unique<ActionLabel>(r.actions, av_actions, n);

  std::vector<int> lead_v, lead_n;
  for (const auto& a : lead) {
    if (std::find(lead_v.begin(), lead_v.end(), a.verb) == lead_v.end()) lead_v.push_back(a.verb);
    if (std::find(lead_n.begin(), lead_n.end(), a.noun) == lead_n.end()) lead_n.push_back(a.noun);
  }
  const auto av_v = ranked_ids(s.verb_row(t));
  const auto av_n = ranked_ids(s.noun_row(t));
  r.verbs = lead_v.size() > n ? std::vector<int>(lead_v.begin(), lead_v.begin() + n) : lead_v;
  r.nouns = lead_n.size() > n ? std::vector<int>(lead_n.begin(), lead_n.begin() + n) : lead_n;
  fill_unique<int>(r.verbs, av_v, n);
  fill_unique<int>(r.nouns, av_n, n);
  return r;
}

const std::vector<double>& default_lambda_grid() {
  static const std::vector<double> grid{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  return grid;
}

GridSearchResult grid_search_lambda(std::span<const DecodedWindow> windows, std::span<const double> grid) {
  if (grid.empty()) throw InvalidArgument("grid search: empty lambda grid");
  if (windows.empty()) throw InvalidArgument("grid search: empty validation set");
  for (double l : grid) validate_lambda(l);
  GridSearchResult res;
  double best = -1.0;
  for (double lambda : grid) {
    std::size_t hit = 0;
    for (const auto& w : windows) {
      auto hyps = w.hyps;
      fuse(hyps, lambda);
      hit += hyps.front().actions[w.scores.target] == w.truth;
    }
    const double acc = 100.0 * static_cast<double>(hit) / static_cast<double>(windows.size());
    res.accuracy.emplace_back(lambda, acc);
    if (acc > best || (acc == best && lambda < res.best_lambda)) {
      best = acc;
      res.best_lambda = lambda;
    }
  }
  return res;
}

}  // namespace mtcn::infer
