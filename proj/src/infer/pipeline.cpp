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

#include "infer/pipeline.hpp"

#include <numeric>
#include <set>

namespace mtcn::infer {

std::vector<av::CentrePrediction> predict_all(const av::AvModel& model, const data::FeatureStore& store,
                                              data::WindowMode mode, av::ClipPolicy policy) {
  std::vector<std::size_t> rows(store.size());
  std::iota(rows.begin(), rows.end(), 0);
  return av::predict_centres(model, store, rows, mode, policy);
}

std::vector<av::CentrePrediction> predict_for_windows(const av::AvModel& model, const data::FeatureStore& store,
                                                      std::span<const std::size_t> rows, std::size_t w,
                                                      data::WindowMode mode, av::ClipPolicy policy) {
  std::set<std::size_t> needed;
  for (auto r : rows)
    for (const auto& slot : data::make_window(store, r, w, mode).slots)
      if (slot) needed.insert(*slot);
  const std::vector<std::size_t> list(needed.begin(), needed.end());
  auto preds = av::predict_centres(model, store, list, mode, policy);
  std::vector<av::CentrePrediction> out(store.size());
  for (std::size_t i = 0; i < list.size(); ++i) out[list[i]] = std::move(preds[i]);
  return out;
}

std::vector<DecodedWindow> decode(const data::FeatureStore& store, std::span<const av::CentrePrediction> preds,
                                  std::span<const std::size_t> rows, std::size_t w, data::WindowMode mode,
                                  std::size_t beam, std::size_t num_verbs, std::size_t num_nouns) {
  std::vector<DecodedWindow> out;
  out.reserve(rows.size());
  for (auto r : rows) {
    DecodedWindow d;
    d.scores = assemble(store, data::make_window(store, r, w, mode), preds, num_verbs, num_nouns);
    d.hyps = beam_search(d.scores, beam);
    d.truth = {store.record(r).verb, store.record(r).noun};
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace mtcn::infer
