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

#include "infer/beam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"

namespace mtcn::infer {

ScoreSequence assemble(const data::FeatureStore& store, const data::ContextWindow& window,
                       std::span<const av::CentrePrediction> preds, std::size_t num_verbs, std::size_t num_nouns) {
  if (preds.size() != store.size()) throw DimensionError("infer: one prediction per store row expected");
  ScoreSequence s;
  s.window = window.size();
  s.num_verbs = num_verbs;
  s.num_nouns = num_nouns;
  s.target = window.target;
  s.anchor_row = window.anchor_row;
  s.padded.assign(s.window, 0);
  bool joint = false;
  for (std::size_t j = 0; j < s.window; ++j)
    if (!window.padded(j)) {
      joint = !preds[*window.slots[j]].action_logp.empty();
      break;
    }
  const std::size_t A = num_verbs * num_nouns;
  for (std::size_t j = 0; j < s.window; ++j) {
    if (window.padded(j)) {
      s.padded[j] = 1;
      s.verb_logp.insert(s.verb_logp.end(), num_verbs, static_cast<float>(-std::log(double(num_verbs))));
      s.noun_logp.insert(s.noun_logp.end(), num_nouns, static_cast<float>(-std::log(double(num_nouns))));
      if (joint) s.action_logp.insert(s.action_logp.end(), A, static_cast<float>(-std::log(double(A))));
      continue;
    }
    const auto& p = preds[*window.slots[j]];
    if (p.verb_logp.empty()) throw StateError("infer: no prediction for row " + std::to_string(*window.slots[j]));
    if (p.verb_logp.size() != num_verbs || p.noun_logp.size() != num_nouns) {
      throw DimensionError("infer: prediction rows do not match the vocabulary");
    }
    s.verb_logp.insert(s.verb_logp.end(), p.verb_logp.begin(), p.verb_logp.end());
    s.noun_logp.insert(s.noun_logp.end(), p.noun_logp.begin(), p.noun_logp.end());
    if (joint) {
      if (p.action_logp.size() != A) throw DimensionError("infer: joint rows need the verb x noun vocabulary");
      s.action_logp.insert(s.action_logp.end(), p.action_logp.begin(), p.action_logp.end());
    }
  }
  return s;
}

double action_logp(const ScoreSequence& s, std::size_t j, const ActionLabel& a) {
  if (s.padded[j]) return 0.0;
  if (s.joint()) return s.action_row(j)[static_cast<std::size_t>(a.verb) * s.num_nouns + a.noun];
  return static_cast<double>(s.verb_row(j)[a.verb]) + static_cast<double>(s.noun_row(j)[a.noun]);
}

bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.logp != b.logp) return a.logp > b.logp;
  return a.action < b.action;
}

namespace {

// Indices of the k largest entries, ties to the smaller index.
std::vector<int> top_indices(std::span<const float> row, std::size_t k) {
  std::vector<int> idx(row.size());
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
    return row[a] != row[b] ? row[a] > row[b] : a < b;
  });
  idx.resize(k);
  return idx;
}

bool hypothesis_before(const BeamHypothesis& a, const BeamHypothesis& b) {
  if (a.p_av != b.p_av) return a.p_av > b.p_av;
  return a.actions < b.actions;
}

}  // namespace

std::vector<Candidate> position_candidates(const ScoreSequence& s, std::size_t j, std::size_t k) {
  if (k == 0) throw InvalidArgument("beam: K must be at least 1");
  if (j >= s.window) throw InvalidArgument("beam: position out of range");
  if (s.padded[j]) return {Candidate{ActionLabel{}, 0.0}};
  std::vector<Candidate> out;
  if (s.joint()) {
    for (int a : top_indices(s.action_row(j), k)) {
      const ActionLabel act{a / static_cast<int>(s.num_nouns), a % static_cast<int>(s.num_nouns)};
      out.push_back({act, action_logp(s, j, act)});
    }
  } else {
    for (int v : top_indices(s.verb_row(j), k))
      for (int n : top_indices(s.noun_row(j), k)) out.push_back({{v, n}, action_logp(s, j, {v, n})});
  }
  std::sort(out.begin(), out.end(), candidate_before);
  if (out.size() > k) out.resize(k);
  return out;
}

std::vector<BeamHypothesis> beam_search(const ScoreSequence& s, std::size_t k) {
  if (k == 0) throw InvalidArgument("beam: K must be at least 1");
  if (s.window == 0) throw InvalidArgument("beam: empty score sequence");
  // Scores are additive and position-independent, so keeping the K best
  // prefixes at every step loses nothing: any prefix outside them is beaten by
  // K prefixes that extend with the same suffix.
  std::vector<BeamHypothesis> beam{BeamHypothesis{}};
  for (std::size_t j = 0; j < s.window; ++j) {
    const auto cands = position_candidates(s, j, k);
    std::vector<BeamHypothesis> next;
    next.reserve(beam.size() * cands.size());
    for (const auto& h : beam) {
      for (const auto& c : cands) {
        BeamHypothesis e = h;
        e.actions.push_back(c.action);
        e.p_av += c.logp;
        next.push_back(std::move(e));
      }
    }
    std::sort(next.begin(), next.end(), hypothesis_before);
    // Rounding can turn a strict prefix lead into a tie once the suffix is
    // added, and the tie then goes lexicographic; keep near-ties of the K-th.
    std::size_t keep = std::min(k, next.size());
    const double edge = next[keep - 1].p_av;
    while (keep < next.size() && next[keep].p_av >= edge - 1e-9 * (1.0 + std::abs(edge))) ++keep;
    next.resize(keep);
    beam = std::move(next);
  }
  if (beam.size() > k) beam.resize(k);
  for (auto& h : beam) h.fused = h.p_av;
  return beam;
}

}  // namespace mtcn::infer
