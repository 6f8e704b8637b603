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
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "av/model.hpp"
#include "av/train.hpp"
#include "data/synth.hpp"
#include "data/windows.hpp"
#include "infer/fuse.hpp"
#include "lm/model.hpp"
#include "lm/train.hpp"

namespace mtcn::eval {

enum class LmKind { mlm, ngram, none };
LmKind parse_lm_kind(const std::string& name);
std::string to_string(LmKind kind);

struct FusionConfig {
  std::size_t beam = 10;
  double lambda = 0.0;
  std::vector<double> grid = infer::default_lambda_grid();
  infer::Top5Protocol top5 = infer::Top5Protocol::best_hypothesis;
};

struct RunConfig {
  std::uint64_t seed = 1;
  data::WindowMode mode = data::WindowMode::centre;
  // Shared by the AV model, the LM and the beam; copied into both by finalize().
  std::size_t window = 9;
  LmKind lm_kind = LmKind::mlm;
  // Store directory with splits.json; empty means <run>/data from `synth`.
  std::string data_dir;
  data::SynthSpec synth;
  av::AvConfig av;
  av::AvTrainConfig av_train;
  lm::LmConfig lm;
  lm::LmTrainConfig lm_train;
  FusionConfig fusion;
};

// Copies the shared fields into the sub-configs and validates everything.
void finalize(RunConfig& cfg);

// Missing keys keep their defaults; unknown keys are rejected by name.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace mtcn::eval
