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

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "infer/beam.hpp"
#include "lm/model.hpp"
#include "lm/ngram.hpp"

namespace mtcn::infer {

// Scores whole label sequences; std::nullopt means "no information".
class SequenceScorer {
 public:
  virtual ~SequenceScorer() = default;
  virtual std::vector<std::optional<double>> score(std::span<const LabelSeq> seqs) const = 0;
};

class MlmScorer : public SequenceScorer {
 public:
  explicit MlmScorer(const lm::LmModel& model) : model_(model) {}
  std::vector<std::optional<double>> score(std::span<const LabelSeq> seqs) const override;

 private:
  const lm::LmModel& model_;
};

class NGramScorer : public SequenceScorer {
 public:
  explicit NGramScorer(const lm::NGramModel& model) : model_(model) {}
  std::vector<std::optional<double>> score(std::span<const LabelSeq> seqs) const override;

 private:
  const lm::NGramModel& model_;
};

class FunctionScorer : public SequenceScorer {
 public:
  using Fn = std::function<std::optional<double>(const LabelSeq&)>;
  explicit FunctionScorer(Fn fn) : fn_(std::move(fn)) {}
  std::vector<std::optional<double>> score(std::span<const LabelSeq> seqs) const override;

 private:
  Fn fn_;
};

void validate_lambda(double lambda);

// lambda * p_lm + (1 - lambda) * p_av; without LM information, p_av.
double fused_score(double p_av, const std::optional<double>& p_lm, double lambda);

// Sets `fused` and sorts descending, ties lexicographic on the actions.
void fuse(std::vector<BeamHypothesis>& hyps, double lambda);

struct Selection {
  ActionLabel chosen;
  std::vector<BeamHypothesis> ranked;
};

Selection fuse_and_select(std::vector<BeamHypothesis> hyps, const SequenceScorer& scorer, double lambda,
                          std::size_t target);

// A window after beam search, with LM scores attached once and re-fused per lambda.
struct DecodedWindow {
  ScoreSequence scores;
  std::vector<BeamHypothesis> hyps;
  ActionLabel truth;
};

// One scorer call over every hypothesis of every window.
void attach_lm(std::span<DecodedWindow> windows, const SequenceScorer& scorer);

enum class Top5Protocol {
  best_hypothesis,   // target rows of the best hypothesis, its action first
  cross_hypothesis,  // distinct target actions in fused order, then the AV rows
};
Top5Protocol parse_top5_protocol(const std::string& name);
std::string to_string(Top5Protocol p);

// Ranked predictions for the target action; lists hold n entries.
struct CentreRanking {
  ActionLabel chosen;
  std::vector<int> verbs;
  std::vector<int> nouns;
  std::vector<ActionLabel> actions;
};

// `ranked` must already be fused and sorted.
CentreRanking rank_centre(const ScoreSequence& s, std::span<const BeamHypothesis> ranked, Top5Protocol protocol,
                          std::size_t n = 5);

struct GridSearchResult {
  double best_lambda = 0.0;
  std::vector<std::pair<double, double>> accuracy;  // (lambda, top-1 action %)
};

const std::vector<double>& default_lambda_grid();

// Picks the lambda with the best top-1 action accuracy; ties go to the smaller lambda.
GridSearchResult grid_search_lambda(std::span<const DecodedWindow> windows, std::span<const double> grid);

}  // namespace mtcn::infer
