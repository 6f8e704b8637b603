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
#include <map>
#include <optional>
#include <span>
#include <string>

#include "lm/model.hpp"

namespace mtcn::lm {

// Counts of the target action keyed by the other w-1 actions of each window.
class NGramModel {
 public:
  using Table = std::map<ActionLabel, std::uint64_t>;

  NGramModel() = default;
  NGramModel(std::size_t window, std::size_t target);

  std::size_t window() const { return window_; }
  std::size_t target() const { return target_; }
  const std::map<LabelSeq, Table>& counts() const { return counts_; }

  void add(const LabelSeq& window_labels, std::uint64_t count = 1);
  LabelSeq context_of(const LabelSeq& seq) const;
  // Empty table for an unseen context.
  const Table& table(const LabelSeq& context) const;

 private:
  std::size_t window_ = 0, target_ = 0;
  std::map<LabelSeq, Table> counts_;
};

// Every length-w window fully inside a sequence; shorter sequences add nothing.
NGramModel ngram_build(std::span<const LabelSeq> corpus, std::size_t w, std::size_t target);

// log P(target action | context). std::nullopt is the no-information sentinel
// for an unseen context; a seen context with an unseen target gives -inf.
std::optional<double> ngram_score(const LabelSeq& seq, const NGramModel& model);

// Sorted text, one line per (context, target):
//   "v:n v:n _ v:n v:n<TAB>v:n<TAB>count", with "_" at the target slot and
// "pad" for padding. The first line is "ngram<TAB>w<TAB>target".
std::string ngram_to_text(const NGramModel& model);
NGramModel ngram_from_text(const std::string& text);
void save_ngram(const NGramModel& model, const std::filesystem::path& path);
NGramModel load_ngram(const std::filesystem::path& path);

}  // namespace mtcn::lm
