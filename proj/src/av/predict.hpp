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
#include <string>
#include <vector>

#include "av/batch.hpp"
#include "av/model.hpp"
#include "data/store.hpp"
#include "data/windows.hpp"

namespace mtcn::av {

// Log-probabilities for one action evaluated as the target of its own window.
// In single-head mode verb/noun rows are marginals of the action distribution.
struct CentrePrediction {
  std::vector<float> verb_logp;
  std::vector<float> noun_logp;
  std::vector<float> action_logp;  // single-head mode only, verb-major
};

std::vector<CentrePrediction> predict_centres(const AvModel& model, const data::FeatureStore& store,
                                              std::span<const std::size_t> rows, data::WindowMode mode,
                                              ClipPolicy policy = ClipPolicy::all, std::size_t batch_size = 32);

// Evaluation-mode forward of ready-made windows (dropout off, no graph).
std::vector<CentrePrediction> predict_windows(const AvModel& model, const data::FeatureStore& store,
                                              std::span<const data::ContextWindow> windows, ClipPolicy policy);

struct AttentionRecord {
  std::size_t layer;
  std::size_t head;
  TokenKind cls;
  std::size_t token_index;
  TokenKind modality;
  std::size_t window_pos;
  float weight;
};

// Attention rows of the summary tokens of window `b` of a forward that kept
// its attention maps.
std::vector<AttentionRecord> dump_attention(const AvModel& model, const AvOutput& out, std::size_t b = 0);
std::string attention_csv(const std::vector<AttentionRecord>& records);

}  // namespace mtcn::av
