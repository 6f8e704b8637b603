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

#include <cstdint>
#include <utility>
#include <vector>

#include "data/store.hpp"

namespace mtcn::data {

struct SynthSpec {
  int num_verbs = 12;
  int num_nouns = 20;
  // Row-stochastic; empty means "build the default structured chain".
  std::vector<std::vector<double>> verb_transitions;
  // Noun prior for the first action and for every redraw; empty means Zipf.
  std::vector<double> noun_prior;
  double noun_zipf_exponent = 0.7;
  double noun_persistence = 0.5;

  // Each modality's feature is [verb part | noun part], feature_dim wide.
  std::size_t feature_dim = 16;
  bool audio = true;
  std::size_t clips_per_action = 10;
  double verb_mean_scale = 1.0;
  double noun_mean_scale = 1.0;
  double noise = 0.5;

  std::vector<std::pair<int, int>> verb_ambiguity = {{0, 1}};
  std::vector<std::pair<int, int>> noun_ambiguity;

  std::size_t videos = 50;
  std::size_t min_actions = 120;
  std::size_t max_actions = 120;
  std::size_t participants = 10;
  std::size_t held_out_participants = 2;
  double tail_mass = 0.2;
};

struct SynthCorpus {
  FeatureStore store;
  Splits splits;
  SynthSpec spec;  // resolved: transitions and noun prior filled in
  // [modality][class][dim] generating means, verb part and noun part.
  std::vector<std::vector<std::vector<float>>> verb_means;
  std::vector<std::vector<std::vector<float>>> noun_means;
};

// Default chain for C verbs with ambiguity pair (a, b). The remaining verbs split
// into two groups; a is usually followed by group B and b by group A, and group A
// leans towards a, group B towards b, so the pair is resolved by its neighbours.
std::vector<std::vector<double>> default_verb_transitions(int num_verbs, std::pair<int, int> pair,
                                                          std::uint64_t seed);

std::vector<double> zipf_prior(int n, double exponent);
std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& transitions);

// Fills in defaults and validates. Throws InvalidArgument on bad transitions,
// priors, ambiguity pairs or sizes.
SynthSpec resolve_spec(SynthSpec spec, std::uint64_t seed);

SynthCorpus synth_generate(const SynthSpec& spec, std::uint64_t seed);

// Class marginals implied by the spec (stationary verbs, noun prior).
std::vector<double> verb_marginal(const SynthSpec& resolved);
std::vector<double> noun_marginal(const SynthSpec& resolved);

// Accuracy of the best classifier that sees one action's features only, in the
// noise-free limit: each ambiguity pair loses its smaller class.
double memoryless_ceiling(const std::vector<double>& marginal, const std::vector<std::pair<int, int>>& pairs);
double memoryless_action_ceiling(const SynthSpec& resolved);

}  // namespace mtcn::data
