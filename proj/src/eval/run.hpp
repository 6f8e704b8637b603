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

#include <filesystem>
#include <functional>
#include <string>

#include <json.hpp>

#include "av/model.hpp"
#include "data/store.hpp"
#include "eval/config.hpp"
#include "eval/metrics.hpp"
#include "infer/fuse.hpp"

namespace mtcn::eval {

using LogFn = std::function<void(const std::string&)>;

struct RunContext {
  std::filesystem::path run_dir;
  RunConfig config;
  LogFn log;  // progress lines; may be empty
};

// Decoding, LM scoring and ranking for a set of store rows.
struct Evaluation {
  std::vector<infer::DecodedWindow> windows;
  std::vector<InstanceResult> results;
  MetricsReport report;
  double lambda = 0.0;
};

// Beam search over AV predictions; `lm` may be null (lambda 0 path).
Evaluation evaluate(const av::AvModel& model, const data::FeatureStore& store, const data::Splits& splits,
                    std::span<const std::size_t> rows, const RunConfig& cfg, const infer::SequenceScorer* lm,
                    double lambda);
// Re-ranks already decoded windows (with LM scores attached) at another lambda.
Evaluation refuse(Evaluation decoded, const data::Splits& splits, const RunConfig& cfg, double lambda);

std::string rescored_jsonl(const Evaluation& e);

// Artifacts under run_dir; each returns a short JSON summary.
nlohmann::json run_synth(const RunContext& ctx);
nlohmann::json run_train_av(const RunContext& ctx);
nlohmann::json run_train_lm(const RunContext& ctx);
nlohmann::json run_eval(const RunContext& ctx);
nlohmann::json run_rescore(const RunContext& ctx);
nlohmann::json run_gridsearch(const RunContext& ctx);
nlohmann::json run_dump_attention(const RunContext& ctx, std::size_t val_index = 0);

// Run-dir helpers shared with the C API.
std::filesystem::path data_dir(const RunContext& ctx);
std::filesystem::path av_checkpoint(const RunContext& ctx);
std::filesystem::path lm_checkpoint(const RunContext& ctx);
std::filesystem::path ngram_table(const RunContext& ctx);
void write_run_header(const RunContext& ctx);
// Loads weights, naming the config field when a shape disagrees.
av::AvModel load_av(const RunConfig& cfg, const std::filesystem::path& path);
lm::LmModel load_lm(const RunConfig& cfg, const std::filesystem::path& path);

}  // namespace mtcn::eval
