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
#include <filesystem>
#include <optional>

#include "data/store.hpp"

namespace mtcn::data {

struct RawBlob {
  std::filesystem::path path;  // little-endian f32, rows x clips x dim, no header
  std::size_t dim = 0;
};

struct ImportRequest {
  std::filesystem::path manifest_csv;
  RawBlob visual;
  std::optional<RawBlob> audio;
  std::size_t clips_per_action = 10;
};

FeatureStore import_raw(const ImportRequest& request);

// Imports and writes the native store into out_dir.
FeatureStore import_to_store(const ImportRequest& request, const std::filesystem::path& out_dir);

}  // namespace mtcn::data
