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

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "data/store.hpp"
#include "infer/fuse.hpp"

namespace mtcn::eval {

using lm::ActionLabel;

enum class Head { verb, noun, action };
enum class Subset { overall, unseen, tail };
const char* to_string(Head h);
const char* to_string(Subset s);

// Percentage of score rows whose label is among the k best entries; ties go
// to the smaller class id.
double topk_accuracy(std::span<const std::vector<float>> scores, std::span<const int> labels, std::size_t k);

// One evaluated action with its ranked predictions.
struct InstanceResult {
  std::size_t row = 0;
  ActionLabel truth;
  infer::CentreRanking ranking;
  bool unseen = false;
  bool tail = false;
};

struct Cell {
  double top1 = 0.0;
  double top5 = 0.0;
  std::size_t count = 0;
};

struct MetricsReport {
  // [head][subset]; absent when the subset is empty.
  std::array<std::array<std::optional<Cell>, 3>, 3> cells;
  // Unweighted mean over classes present in the overall set of per-class top-1.
  std::array<double, 3> mean_class{};
  std::size_t total = 0;

  const std::optional<Cell>& at(Head h, Subset s) const {
    return cells[static_cast<int>(h)][static_cast<int>(s)];
  }
};

MetricsReport compute_metrics(std::span<const InstanceResult> results);

nlohmann::json to_json(const MetricsReport& report);

// Marks each result with the split's unseen/tail membership.
void tag_subsets(std::vector<InstanceResult>& results, const data::Splits& splits);

// One JSON-lines record per evaluated action.
nlohmann::json rescore_record(const InstanceResult& r, const infer::DecodedWindow& w, double lambda);
// Reads back the fields metrics need from rescore records.
std::vector<InstanceResult> results_from_jsonl(const std::string& text);

}  // namespace mtcn::eval
