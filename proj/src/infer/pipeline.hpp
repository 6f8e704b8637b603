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

#include "av/model.hpp"
#include "av/predict.hpp"
#include "data/store.hpp"
#include "data/windows.hpp"
#include "infer/fuse.hpp"

namespace mtcn::infer {

// Centre prediction for every store row, each from its own window.
std::vector<av::CentrePrediction> predict_all(const av::AvModel& model, const data::FeatureStore& store,
                                              data::WindowMode mode, av::ClipPolicy policy = av::ClipPolicy::all);

// Same as predict_all, restricted to the rows the windows anchored at `rows`
// touch; other entries stay empty.
std::vector<av::CentrePrediction> predict_for_windows(const av::AvModel& model, const data::FeatureStore& store,
                                                      std::span<const std::size_t> rows, std::size_t w,
                                                      data::WindowMode mode,
                                                      av::ClipPolicy policy = av::ClipPolicy::all);

// Score sequences and beam hypotheses for windows anchored at `rows`.
std::vector<DecodedWindow> decode(const data::FeatureStore& store, std::span<const av::CentrePrediction> preds,
                                  std::span<const std::size_t> rows, std::size_t w, data::WindowMode mode,
                                  std::size_t beam, std::size_t num_verbs, std::size_t num_nouns);

}  // namespace mtcn::infer
