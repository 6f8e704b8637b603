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

#include "data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "numcore/rng.hpp"

namespace mtcn::data {

namespace {

using numcore::Rng;

std::size_t sample_categorical(Rng& rng, const std::vector<double>& p) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    cum += p[i];
    if (u < cum) return i;
  }
  // Rounding left u above the last cumulative value.
  for (std::size_t i = p.size(); i-- > 0;)
    if (p[i] > 0.0) return i;
  return p.size() - 1;
}

void check_distribution(const std::vector<double>& p, const std::string& what) {
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument(what + " has a negative or non-finite entry");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-6) {
    std::ostringstream os;
    os << what << " sums to " << std::setprecision(10) << s << ", expected 1";
    throw InvalidArgument(os.str());
  }
}

void check_pairs(const std::vector<std::pair<int, int>>& pairs, int n, const std::string& what) {
  std::set<int> used;
  for (const auto& [a, b] : pairs) {
    if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
      throw InvalidArgument(what + " ambiguity pair (" + std::to_string(a) + ", " + std::to_string(b) +
                            ") is out of range or degenerate");
    }
    if (!used.insert(a).second || !used.insert(b).second) {
      throw InvalidArgument(what + " ambiguity pairs must be disjoint");
    }
  }
}

// Class means with ambiguity partners copied from their first member.
std::vector<std::vector<float>> class_means(Rng& rng, int n, std::size_t dim, double scale,
                                            const std::vector<std::pair<int, int>>& pairs) {
  std::vector<std::vector<float>> mu(n, std::vector<float>(dim));
  std::normal_distribution<double> gauss(0.0, scale);
  for (auto& m : mu)
    for (auto& v : m) v = static_cast<float>(gauss(rng));
  for (const auto& [a, b] : pairs) mu[b] = mu[a];
  return mu;
}

std::string padded_id(const char* prefix, std::size_t i, int width) {
  std::ostringstream os;
  os << prefix << std::setw(width) << std::setfill('0') << i;
  return os.str();
}

}  // namespace

std::vector<double> zipf_prior(int n, double exponent) {
  std::vector<double> p(n);
  for (int i = 0; i < n; ++i) p[i] = 1.0 / std::pow(static_cast<double>(i + 1), exponent);
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p) v /= s;
  return p;
}

std::vector<std::vector<double>> default_verb_transitions(int num_verbs, std::pair<int, int> pair,
                                                          std::uint64_t seed) {
  if (num_verbs < 4) throw InvalidArgument("the structured verb chain needs at least 4 verbs");
  const auto [va, vb] = pair;
  std::vector<int> group_a, group_b;
  {
    std::vector<int> rest;
    for (int v = 0; v < num_verbs; ++v)
      if (v != va && v != vb) rest.push_back(v);
    const std::size_t half = (rest.size() + 1) / 2;
    group_a.assign(rest.begin(), rest.begin() + half);
    group_b.assign(rest.begin() + half, rest.end());
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  const double n = num_verbs;
  std::vector<std::vector<double>> T(num_verbs, std::vector<double>(num_verbs, 0.0));

  auto spread = [&](std::vector<double>& row, const std::vector<int>& to, double mass, int self) {
    std::vector<std::pair<int, double>> w;
    for (int d : to)
      if (d != self) w.emplace_back(d, weight(rng));
    if (w.empty()) {
      for (auto& v : row) v += mass / n;
      return;
    }
    double s = 0.0;
    for (const auto& e : w) s += e.second;
    for (const auto& [d, x] : w) row[d] += mass * x / s;
  };

  for (int v = 0; v < num_verbs; ++v) {
    auto& row = T[v];
    if (v == va) {
      spread(row, group_b, 0.85, -1);
      for (auto& x : row) x += 0.15 / n;
    } else if (v == vb) {
      spread(row, group_a, 0.85, -1);
      for (auto& x : row) x += 0.15 / n;
    } else {
      const bool in_a = std::find(group_a.begin(), group_a.end(), v) != group_a.end();
      row[in_a ? va : vb] += 0.45;
      row[in_a ? vb : va] += 0.10;
      spread(row, in_a ? group_a : group_b, 0.35, v);
      for (auto& x : row) x += 0.10 / n;
    }
  }
  return T;
}

std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& T) {
  const std::size_t n = T.size();
  std::vector<double> pi(n, 1.0 / n), next(n);
  for (int it = 0; it < 100000; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) next[j] += pi[i] * T[i][j];
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(next[i] - pi[i]));
    pi.swap(next);
    if (diff < 1e-15) break;
  }
  const double s = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (auto& v : pi) v /= s;
  return pi;
}

SynthSpec resolve_spec(SynthSpec spec, std::uint64_t seed) {
  if (spec.num_verbs < 1 || spec.num_nouns < 1) throw InvalidArgument("class counts must be positive");
  if (spec.feature_dim < 2) throw InvalidArgument("feature_dim must be at least 2");
  if (spec.clips_per_action < 1) throw InvalidArgument("clips_per_action must be at least 1");
  if (spec.videos < 1 || spec.min_actions < 1 || spec.min_actions > spec.max_actions) {
    throw InvalidArgument("invalid video count or sequence length range");
  }
  if (spec.participants < 1 || spec.held_out_participants >= spec.participants) {
    throw InvalidArgument("held_out_participants must be smaller than participants");
  }
  if (!(spec.noun_persistence >= 0.0 && spec.noun_persistence <= 1.0)) {
    throw InvalidArgument("noun_persistence must lie in [0, 1]");
  }
  if (!(spec.noise >= 0.0)) throw InvalidArgument("noise must be non-negative");
  check_pairs(spec.verb_ambiguity, spec.num_verbs, "verb");
  check_pairs(spec.noun_ambiguity, spec.num_nouns, "noun");

  if (spec.verb_transitions.empty()) {
    if (!spec.verb_ambiguity.empty() && spec.num_verbs >= 4) {
      spec.verb_transitions = default_verb_transitions(spec.num_verbs, spec.verb_ambiguity.front(), seed ^ 0x5eedULL);
    } else {
      Rng rng(seed ^ 0x5eedULL);
      std::uniform_real_distribution<double> weight(0.2, 1.8);
      spec.verb_transitions.assign(spec.num_verbs, std::vector<double>(spec.num_verbs));
      for (auto& row : spec.verb_transitions) {
        for (auto& x : row) x = weight(rng);
        const double s = std::accumulate(row.begin(), row.end(), 0.0);
        for (auto& x : row) x /= s;
      }
    }
  }
  if (spec.verb_transitions.size() != static_cast<std::size_t>(spec.num_verbs)) {
    throw InvalidArgument("verb transition matrix has " + std::to_string(spec.verb_transitions.size()) +
                          " rows, expected " + std::to_string(spec.num_verbs));
  }
  for (std::size_t i = 0; i < spec.verb_transitions.size(); ++i) {
    if (spec.verb_transitions[i].size() != static_cast<std::size_t>(spec.num_verbs)) {
      throw InvalidArgument("verb transition row " + std::to_string(i) + " has the wrong length");
    }
    check_distribution(spec.verb_transitions[i], "verb transition row " + std::to_string(i));
  }
  if (spec.noun_prior.empty()) spec.noun_prior = zipf_prior(spec.num_nouns, spec.noun_zipf_exponent);
  if (spec.noun_prior.size() != static_cast<std::size_t>(spec.num_nouns)) {
    throw InvalidArgument("noun prior length does not match num_nouns");
  }
  check_distribution(spec.noun_prior, "noun prior");
  return spec;
}

std::vector<double> verb_marginal(const SynthSpec& resolved) {
  return stationary_distribution(resolved.verb_transitions);
}

std::vector<double> noun_marginal(const SynthSpec& resolved) { return resolved.noun_prior; }

double memoryless_ceiling(const std::vector<double>& marginal, const std::vector<std::pair<int, int>>& pairs) {
  double lost = 0.0;
  for (const auto& [a, b] : pairs) lost += std::min(marginal.at(a), marginal.at(b));
  return 1.0 - lost;
}

double memoryless_action_ceiling(const SynthSpec& resolved) {
  return memoryless_ceiling(verb_marginal(resolved), resolved.verb_ambiguity) *
         memoryless_ceiling(noun_marginal(resolved), resolved.noun_ambiguity);
}

SynthCorpus synth_generate(const SynthSpec& input, std::uint64_t seed) {
  const SynthSpec spec = resolve_spec(input, seed);
  Rng rng(seed);
  const std::size_t verb_dim = spec.feature_dim / 2;
  const std::size_t noun_dim = spec.feature_dim - verb_dim;
  const int modalities = spec.audio ? 2 : 1;

  std::vector<std::vector<std::vector<float>>> verb_mu, noun_mu;
  for (int m = 0; m < modalities; ++m) {
    verb_mu.push_back(class_means(rng, spec.num_verbs, verb_dim, spec.verb_mean_scale, spec.verb_ambiguity));
    noun_mu.push_back(class_means(rng, spec.num_nouns, noun_dim, spec.noun_mean_scale, spec.noun_ambiguity));
  }

  const auto pi = stationary_distribution(spec.verb_transitions);
  std::vector<ActionRecord> manifest;
  std::vector<std::size_t> video_of_row;
  std::uniform_int_distribution<std::size_t> length(spec.min_actions, spec.max_actions);
  std::uniform_real_distribution<double> gap(0.0, 2.0), duration(1.0, 5.0), unit(0.0, 1.0);
  for (std::size_t v = 0; v < spec.videos; ++v) {
    const std::size_t n = length(rng);
    const std::string vid = padded_id("V", v, 3);
    const std::string participant = padded_id("P", v % spec.participants, 2);
    int verb = static_cast<int>(sample_categorical(rng, pi));
    int noun = static_cast<int>(sample_categorical(rng, spec.noun_prior));
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) {
        verb = static_cast<int>(sample_categorical(rng, spec.verb_transitions[verb]));
        if (unit(rng) >= spec.noun_persistence) noun = static_cast<int>(sample_categorical(rng, spec.noun_prior));
      }
      ActionRecord r;
      r.video_id = vid;
      r.order_index = static_cast<std::uint32_t>(i);
      r.start_sec = t + gap(rng);
      r.stop_sec = r.start_sec + duration(rng);
      t = r.stop_sec;
      r.verb = verb;
      r.noun = noun;
      r.participant_id = participant;
      manifest.push_back(std::move(r));
      video_of_row.push_back(v);
    }
  }

  std::normal_distribution<float> noise(0.0f, static_cast<float>(spec.noise));
  std::vector<FeatureArray> feats(modalities);
  for (int m = 0; m < modalities; ++m) {
    auto& f = feats[m];
    f.num_actions = manifest.size();
    f.clips = spec.clips_per_action;
    f.dim = spec.feature_dim;
    f.values.resize(f.num_actions * f.clips * f.dim);
    for (std::size_t r = 0; r < manifest.size(); ++r) {
      const auto& vm = verb_mu[m][manifest[r].verb];
      const auto& nm = noun_mu[m][manifest[r].noun];
      for (std::size_t c = 0; c < f.clips; ++c) {
        float* out = f.values.data() + (r * f.clips + c) * f.dim;
        for (std::size_t d = 0; d < verb_dim; ++d) out[d] = vm[d] + (spec.noise > 0 ? noise(rng) : 0.0f);
        for (std::size_t d = 0; d < noun_dim; ++d) out[verb_dim + d] = nm[d] + (spec.noise > 0 ? noise(rng) : 0.0f);
      }
    }
  }

  Splits splits;
  {
    const std::size_t first_held = spec.participants - spec.held_out_participants;
    std::vector<std::size_t> last_video(spec.participants, spec.videos);
    for (std::size_t v = 0; v < spec.videos; ++v) last_video[v % spec.participants] = v;
    std::vector<int> verb_count(spec.num_verbs, 0), noun_count(spec.num_nouns, 0);
    for (std::size_t r = 0; r < manifest.size(); ++r) {
      const std::size_t v = video_of_row[r];
      const std::size_t p = v % spec.participants;
      if (p >= first_held) {
        splits.val.push_back(r);
        splits.unseen.push_back(r);
      } else if (v == last_video[p]) {
        splits.val.push_back(r);
      } else {
        splits.train.push_back(r);
        ++verb_count[manifest[r].verb];
        ++noun_count[manifest[r].noun];
      }
    }
    auto tail_classes = [&](const std::vector<int>& count) {
      std::vector<int> order(count.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return count[a] < count[b]; });
      const double budget = spec.tail_mass * static_cast<double>(splits.train.size());
      std::vector<int> tail;
      double cum = 0.0;
      for (int c : order) {
        if (cum + count[c] > budget) break;
        cum += count[c];
        tail.push_back(c);
      }
      std::sort(tail.begin(), tail.end());
      return tail;
    };
    splits.tail_verbs = tail_classes(verb_count);
    splits.tail_nouns = tail_classes(noun_count);
    const std::set<int> tv(splits.tail_verbs.begin(), splits.tail_verbs.end());
    const std::set<int> tn(splits.tail_nouns.begin(), splits.tail_nouns.end());
    for (std::size_t r : splits.val)
      if (tv.count(manifest[r].verb) || tn.count(manifest[r].noun)) splits.tail.push_back(r);
  }

  std::optional<FeatureArray> audio;
  if (spec.audio) audio = std::move(feats[1]);
  return SynthCorpus{FeatureStore(std::move(manifest), std::move(feats[0]), std::move(audio)), std::move(splits),
                     spec, std::move(verb_mu), std::move(noun_mu)};
}

}  // namespace mtcn::data
