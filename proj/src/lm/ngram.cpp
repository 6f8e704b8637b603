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

#include "lm/ngram.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "common/binary_io.hpp"
#include "common/error.hpp"

namespace mtcn::lm {

NGramModel::NGramModel(std::size_t window, std::size_t target) : window_(window), target_(target) {
  if (window == 0 || target >= window) throw InvalidArgument("ngram: target slot must lie inside the window");
}

LabelSeq NGramModel::context_of(const LabelSeq& seq) const {
  if (seq.size() != window_) {
    throw DimensionError("ngram: sequence of length " + std::to_string(seq.size()) + " does not match window " +
                         std::to_string(window_));
  }
  LabelSeq ctx;
  ctx.reserve(window_ - 1);
  for (std::size_t t = 0; t < window_; ++t)
    if (t != target_) ctx.push_back(seq[t]);
  return ctx;
}

void NGramModel::add(const LabelSeq& window_labels, std::uint64_t count) {
  counts_[context_of(window_labels)][window_labels[target_]] += count;
}

const NGramModel::Table& NGramModel::table(const LabelSeq& context) const {
  static const Table empty;
  const auto it = counts_.find(context);
  return it == counts_.end() ? empty : it->second;
}

NGramModel ngram_build(std::span<const LabelSeq> corpus, std::size_t w, std::size_t target) {
  NGramModel model(w, target);
  for (const auto& seq : corpus) {
    if (seq.size() < w) continue;
    for (std::size_t s = 0; s + w <= seq.size(); ++s) model.add(LabelSeq(seq.begin() + s, seq.begin() + s + w));
  }
  return model;
}

std::optional<double> ngram_score(const LabelSeq& seq, const NGramModel& model) {
  const auto& table = model.table(model.context_of(seq));
  if (table.empty()) return std::nullopt;
  std::uint64_t total = 0;
  for (const auto& [a, c] : table) total += c;
  const auto it = table.find(seq[model.target()]);
  if (it == table.end()) return -std::numeric_limits<double>::infinity();
  return std::log(static_cast<double>(it->second) / static_cast<double>(total));
}

namespace {

std::string action_text(const ActionLabel& a) {
  return a.pad() ? "pad" : std::to_string(a.verb) + ":" + std::to_string(a.noun);
}

ActionLabel parse_action(const std::string& s) {
  if (s == "pad") return {};
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw FormatError("ngram: malformed action '" + s + "'");
  try {
    std::size_t a = 0, b = 0;
    const int v = std::stoi(s.substr(0, colon), &a);
    const int n = std::stoi(s.substr(colon + 1), &b);
    if (a != colon || b != s.size() - colon - 1 || v < 0 || n < 0) throw std::invalid_argument(s);
    return {v, n};
  } catch (const std::exception&) {
    throw FormatError("ngram: malformed action '" + s + "'");
  }
}

}  // namespace

std::string ngram_to_text(const NGramModel& model) {
  std::ostringstream os;
  os << "ngram\t" << model.window() << '\t' << model.target() << '\n';
  for (const auto& [ctx, table] : model.counts()) {
    std::string key;
    for (std::size_t t = 0, c = 0; t < model.window(); ++t) {
      if (t) key += ' ';
      key += t == model.target() ? "_" : action_text(ctx[c++]);
    }
    for (const auto& [a, count] : table) os << key << '\t' << action_text(a) << '\t' << count << '\n';
  }
  return os.str();
}

NGramModel ngram_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw FormatError("ngram: empty table");
  std::size_t w = 0, target = 0;
  {
    std::istringstream hs(line);
    std::string tag;
    if (!(hs >> tag >> w >> target) || tag != "ngram") throw FormatError("ngram: bad header line '" + line + "'");
  }
  NGramModel model(w, target);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto t1 = line.find('\t'), t2 = line.find('\t', t1 == std::string::npos ? t1 : t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos) {
      throw FormatError("ngram: line " + std::to_string(lineno) + " needs three tab-separated fields");
    }
    std::istringstream ks(line.substr(0, t1));
    LabelSeq seq;
    std::string tok;
    while (ks >> tok) seq.push_back(tok == "_" ? ActionLabel{} : parse_action(tok));
    if (seq.size() != w) throw FormatError("ngram: line " + std::to_string(lineno) + " has the wrong context length");
    seq[target] = parse_action(line.substr(t1 + 1, t2 - t1 - 1));
    std::uint64_t count = 0;
    try {
      count = std::stoull(line.substr(t2 + 1));
    } catch (const std::exception&) {
      throw FormatError("ngram: line " + std::to_string(lineno) + " has a bad count");
    }
    model.add(seq, count);
  }
  return model;
}

void save_ngram(const NGramModel& model, const std::filesystem::path& path) {
  io::write_text(path.string(), ngram_to_text(model));
}

NGramModel load_ngram(const std::filesystem::path& path) { return ngram_from_text(io::read_text(path.string())); }

}  // namespace mtcn::lm
