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

#include "data/windows.hpp"

#include "common/error.hpp"

namespace mtcn::data {

WindowMode parse_window_mode(std::string_view text) {
  if (text == "centre" || text == "center") return WindowMode::centre;
  if (text == "online") return WindowMode::online;
  throw InvalidArgument("unknown window mode '" + std::string(text) + "' (expected centre or online)");
}

std::string to_string(WindowMode mode) { return mode == WindowMode::centre ? "centre" : "online"; }

void validate_window_length(std::size_t w, WindowMode mode) {
  if (w == 0) throw InvalidArgument("window length must be at least 1");
  if (mode == WindowMode::centre && w % 2 == 0) {
    throw InvalidArgument("window length " + std::to_string(w) + " must be odd in centre mode");
  }
}

std::size_t target_slot(std::size_t w, WindowMode mode) { return mode == WindowMode::centre ? (w - 1) / 2 : w - 1; }

ContextWindow make_window(const FeatureStore& store, std::size_t row, std::size_t w, WindowMode mode) {
  validate_window_length(w, mode);
  const auto& rows = store.video_rows(row);
  const auto pos = static_cast<long>(store.position_in_video(row));
  const auto t = static_cast<long>(target_slot(w, mode));
  ContextWindow win;
  win.anchor_row = row;
  win.mode = mode;
  win.target = static_cast<std::size_t>(t);
  win.slots.resize(w);
  for (long j = 0; j < static_cast<long>(w); ++j) {
    const long p = pos - t + j;
    if (p >= 0 && p < static_cast<long>(rows.size())) win.slots[j] = rows[p];
  }
  return win;
}

std::vector<ContextWindow> build_windows(const FeatureStore& store, std::size_t w, WindowMode mode) {
  validate_window_length(w, mode);
  std::vector<ContextWindow> out;
  out.reserve(store.size());
  for (std::size_t r = 0; r < store.size(); ++r) out.push_back(make_window(store, r, w, mode));
  return out;
}

}  // namespace mtcn::data
