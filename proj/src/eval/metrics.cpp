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

#include "eval/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "common/error.hpp"

namespace mtcn::eval {

using nlohmann::json;

const char* to_string(Head h) {
  switch (h) {
    case Head::verb: return "verb";
    case Head::noun: return "noun";
    case Head::action: return "action";
  }
  return "?";
}

const char* to_string(Subset s) {
  switch (s) {
    case Subset::overall: return "overall";
    case Subset::unseen: return "unseen";
    case Subset::tail: return "tail";
  }
  return "?";
}

double topk_accuracy(std::span<const std::vector<float>> scores, std::span<const int> labels, std::size_t k) {
  if (k < 1) throw InvalidArgument("top-k accuracy: k must be at least 1");
  if (scores.size() != labels.size()) throw DimensionError("top-k accuracy: one label per score row expected");
  if (scores.empty()) throw InvalidArgument("top-k accuracy: no instances");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& row = scores[i];
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= row.size()) throw InvalidArgument("top-k accuracy: label out of range");
    // Rank of y: entries strictly better, or equal with a smaller id.
    std::size_t ahead = 0;
    for (std::size_t c = 0; c < row.size(); ++c)
      if (row[c] > row[y] || (row[c] == row[y] && static_cast<int>(c) < y)) ++ahead;
    hit += ahead < k;
  }
  return 100.0 * static_cast<double>(hit) / static_cast<double>(scores.size());
}

namespace {

template <class T>
bool in_first(const std::vector<T>& list, const T& x, std::size_t k) {
  const auto end = list.begin() + std::min(k, list.size());
  return std::find(list.begin(), end, x) != end;
}

bool top1(const InstanceResult& r, Head h) {
  switch (h) {
    case Head::verb: return r.ranking.chosen.verb == r.truth.verb;
    case Head::noun: return r.ranking.chosen.noun == r.truth.noun;
    case Head::action: return r.ranking.chosen == r.truth;
  }
  return false;
}

bool top5(const InstanceResult& r, Head h) {
  switch (h) {
    case Head::verb: return in_first(r.ranking.verbs, r.truth.verb, 5);
    case Head::noun: return in_first(r.ranking.nouns, r.truth.noun, 5);
    case Head::action: return in_first(r.ranking.actions, r.truth, 5);
  }
  return false;
}

bool member(const InstanceResult& r, Subset s) {
  return s == Subset::overall || (s == Subset::unseen && r.unseen) || (s == Subset::tail && r.tail);
}

}  // namespace

MetricsReport compute_metrics(std::span<const InstanceResult> results) {
  MetricsReport rep;
  rep.total = results.size();
  for (int h = 0; h < 3; ++h) {
    for (int s = 0; s < 3; ++s) {
      Cell c;
      std::size_t h1 = 0, h5 = 0;
      for (const auto& r : results) {
        if (!member(r, static_cast<Subset>(s))) continue;
        ++c.count;
        h1 += top1(r, static_cast<Head>(h));
        h5 += top5(r, static_cast<Head>(h));
      }
      if (c.count == 0) continue;
      c.top1 = 100.0 * static_cast<double>(h1) / static_cast<double>(c.count);
      c.top5 = 100.0 * static_cast<double>(h5) / static_cast<double>(c.count);
      rep.cells[h][s] = c;
    }
    // Per-class top-1, keyed by the true class of this head.
    std::map<std::pair<int, int>, std::pair<std::size_t, std::size_t>> per_class;
    for (const auto& r : results) {
      const auto key = h == 0 ? std::pair{r.truth.verb, 0} : h == 1 ? std::pair{r.truth.noun, 0}
                                                                     : std::pair{r.truth.verb, r.truth.noun};
      auto& [hit, n] = per_class[key];
      ++n;
      hit += top1(r, static_cast<Head>(h));
    }
    double sum = 0.0;
    for (const auto& [k, v] : per_class) sum += 100.0 * static_cast<double>(v.first) / static_cast<double>(v.second);
    rep.mean_class[h] = per_class.empty() ? 0.0 : sum / static_cast<double>(per_class.size());
  }
  return rep;
}

json to_json(const MetricsReport& report) {
  json j;
  j["instances"] = report.total;
  for (int h = 0; h < 3; ++h) {
    json head;
    for (int s = 0; s < 3; ++s) {
      const auto& c = report.cells[h][s];
      if (!c) {
        head[to_string(static_cast<Subset>(s))] = nullptr;
        continue;
      }
      head[to_string(static_cast<Subset>(s))] = {{"top1", c->top1}, {"top5", c->top5}, {"count", c->count}};
    }
    head["mean_class_accuracy"] = report.mean_class[h];
    j[to_string(static_cast<Head>(h))] = head;
  }
  return j;
}

void tag_subsets(std::vector<InstanceResult>& results, const data::Splits& splits) {
  const std::set<std::size_t> unseen(splits.unseen.begin(), splits.unseen.end());
  const std::set<std::size_t> tail(splits.tail.begin(), splits.tail.end());
  for (auto& r : results) {
    r.unseen = unseen.count(r.row) > 0;
    r.tail = tail.count(r.row) > 0;
  }
}

namespace {

json action_json(const ActionLabel& a) { return json::array({a.verb, a.noun}); }
ActionLabel action_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

}  // namespace

json rescore_record(const InstanceResult& r, const infer::DecodedWindow& w, double lambda) {
  json hyps = json::array();
  for (const auto& h : w.hyps) {
    json actions = json::array();
    for (const auto& a : h.actions) actions.push_back(a.pad() ? json(nullptr) : action_json(a));
    hyps.push_back({{"actions", actions},
                    {"p_av", h.p_av},
                    {"p_lm", h.p_lm ? json(*h.p_lm) : json(nullptr)},
                    {"fused", h.fused}});
  }
  json actions = json::array();
  for (const auto& a : r.ranking.actions) actions.push_back(action_json(a));
  return {{"window_id", r.row},
          {"target_index", w.scores.target},
          {"lambda", lambda},
          {"truth", action_json(r.truth)},
          {"chosen", action_json(r.ranking.chosen)},
          {"top_verbs", r.ranking.verbs},
          {"top_nouns", r.ranking.nouns},
          {"top_actions", actions},
          {"unseen", r.unseen},
          {"tail", r.tail},
          {"hypotheses", hyps}};
}

std::vector<InstanceResult> results_from_jsonl(const std::string& text) {
  std::vector<InstanceResult> out;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      InstanceResult r;
      r.row = j.at("window_id").get<std::size_t>();
      r.truth = action_from(j.at("truth"));
      r.ranking.chosen = action_from(j.at("chosen"));
      r.ranking.verbs = j.at("top_verbs").get<std::vector<int>>();
      r.ranking.nouns = j.at("top_nouns").get<std::vector<int>>();
      for (const auto& a : j.at("top_actions")) r.ranking.actions.push_back(action_from(a));
      r.unseen = j.at("unseen").get<bool>();
      r.tail = j.at("tail").get<bool>();
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw FormatError("rescored.jsonl line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace mtcn::eval
