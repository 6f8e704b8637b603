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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "av/predict.hpp"
#include "data/store.hpp"
#include "data/windows.hpp"
#include "lm/model.hpp"

namespace mtcn::infer {

using lm::ActionLabel;
using lm::LabelSeq;

// AV log-probabilities for the w actions of one window, in temporal order.
struct ScoreSequence {
  std::size_t window = 0;
  std::size_t num_verbs = 0;
  std::size_t num_nouns = 0;
  std::size_t target = 0;
  std::size_t anchor_row = 0;
  std::vector<float> verb_logp;    // window x num_verbs
  std::vector<float> noun_logp;    // window x num_nouns
  std::vector<float> action_logp;  // window x (num_verbs * num_nouns), single-head models only
  std::vector<std::uint8_t> padded;

  std::span<const float> verb_row(std::size_t j) const { return {verb_logp.data() + j * num_verbs, num_verbs}; }
  std::span<const float> noun_row(std::size_t j) const { return {noun_logp.data() + j * num_nouns, num_nouns}; }
  std::span<const float> action_row(std::size_t j) const {
    return {action_logp.data() + j * num_verbs * num_nouns, num_verbs * num_nouns};
  }
  bool joint() const { return !action_logp.empty(); }
};

// Rows for a window come from each neighbour's own centre prediction, so a row
// is the same whichever window it is assembled into. `preds` is indexed by
// store row. Padding slots get a uniform row and are flagged.
ScoreSequence assemble(const data::FeatureStore& store, const data::ContextWindow& window,
                       std::span<const av::CentrePrediction> preds, std::size_t num_verbs, std::size_t num_nouns);

// log p of action a at position j: verb + noun log-probs, or the joint row.
double action_logp(const ScoreSequence& s, std::size_t j, const ActionLabel& a);

struct Candidate {
  ActionLabel action;
  double logp = 0.0;
};

// Descending score, then ascending (verb, noun).
bool candidate_before(const Candidate& a, const Candidate& b);

// Top-K verbs crossed with top-K nouns, pruned to the K best pairs. A padded
// position has the single PAD candidate scoring 0.
std::vector<Candidate> position_candidates(const ScoreSequence& s, std::size_t j, std::size_t k);

struct BeamHypothesis {
  LabelSeq actions;
  double p_av = 0.0;
  std::optional<double> p_lm;  // nullopt: scorer had no information
  double fused = 0.0;
};

// Exact top-K sequences over the per-position candidate sets, sorted by p_av
// descending with lexicographic ties on the action sequence.
std::vector<BeamHypothesis> beam_search(const ScoreSequence& s, std::size_t k);

}  // namespace mtcn::infer
