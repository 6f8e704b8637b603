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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "data/store.hpp"

namespace mtcn::data {

enum class WindowMode { centre, online };

WindowMode parse_window_mode(std::string_view text);
std::string to_string(WindowMode mode);

struct ContextWindow {
  std::size_t anchor_row = 0;
  // Store row per slot; nullopt marks padding outside the video.
  std::vector<std::optional<std::size_t>> slots;
  std::size_t target = 0;
  WindowMode mode = WindowMode::centre;

  std::size_t size() const { return slots.size(); }
  bool padded(std::size_t j) const { return !slots[j].has_value(); }
};

// Target slot for a window of length w: (w-1)/2 in centre mode, w-1 online.
std::size_t target_slot(std::size_t w, WindowMode mode);
void validate_window_length(std::size_t w, WindowMode mode);

ContextWindow make_window(const FeatureStore& store, std::size_t row, std::size_t w, WindowMode mode);

// One window per store row, in row order.
std::vector<ContextWindow> build_windows(const FeatureStore& store, std::size_t w, WindowMode mode);

}  // namespace mtcn::data
