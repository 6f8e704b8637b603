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

#include <span>
#include <vector>

#include "lm/model.hpp"

namespace mtcn::lm {

// log p(verb_t) + log p(noun_t) (or log p(action_t)) with only position t masked.
double masked_logp(const LmModel& model, const LabelSeq& seq, std::size_t t);

// Pseudo-log-likelihood: masks each non-padding position in turn and sums the
// masked log-probabilities. Padding contributes nothing.
double sequence_pll(const LmModel& model, const LabelSeq& seq);

// sequence_pll for many sequences, batched and split across threads.
std::vector<double> sequence_pll_batch(const LmModel& model, std::span<const LabelSeq> seqs,
                                       std::size_t rows_per_forward = 256);

// Argmax (verb, noun) at position t with t masked, for each sequence.
std::vector<ActionLabel> predict_masked(const LmModel& model, std::span<const LabelSeq> seqs, std::size_t t);

}  // namespace mtcn::lm
