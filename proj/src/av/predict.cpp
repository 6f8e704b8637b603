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

#include "av/predict.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "common/error.hpp"
#include "numcore/ops.hpp"

namespace mtcn::av {

using namespace numcore;

namespace {

std::vector<float> log_softmax_row(std::span<const float> x) {
  const float mx = *std::max_element(x.begin(), x.end());
  double z = 0.0;
  for (float v : x) z += std::exp(static_cast<double>(v) - mx);
  const float lz = mx + static_cast<float>(std::log(z));
  std::vector<float> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - lz;
  return out;
}

float log_sum_exp(std::span<const float> x) {
  const float mx = *std::max_element(x.begin(), x.end());
  double z = 0.0;
  for (float v : x) z += std::exp(static_cast<double>(v) - mx);
  return mx + static_cast<float>(std::log(z));
}

}  // namespace

std::vector<CentrePrediction> predict_windows(const AvModel& model, const data::FeatureStore& store,
                                              std::span<const data::ContextWindow> windows, ClipPolicy policy) {
  NoGradGuard no_grad;
  const auto& cfg = model.config();
  const auto in = build_input(store, windows, cfg, policy);
  Rng unused(0);
  const auto out = model.forward(in, false, unused, false);
  std::vector<CentrePrediction> preds(windows.size());
  for (std::size_t b = 0; b < windows.size(); ++b) {
    auto& p = preds[b];
    if (cfg.single_head) {
      const std::size_t A = cfg.action_classes();
      p.action_logp = log_softmax_row(out.centre_action.data().subspan(b * A, A));
      // Marginals only make sense for the verb-major product vocabulary.
      if (A == cfg.num_verbs * cfg.num_nouns) {
        p.verb_logp.resize(cfg.num_verbs);
        p.noun_logp.resize(cfg.num_nouns);
        std::vector<float> tmp(cfg.num_verbs);
        for (std::size_t v = 0; v < cfg.num_verbs; ++v)
          p.verb_logp[v] = log_sum_exp(std::span<const float>(p.action_logp).subspan(v * cfg.num_nouns, cfg.num_nouns));
        for (std::size_t n = 0; n < cfg.num_nouns; ++n) {
          for (std::size_t v = 0; v < cfg.num_verbs; ++v) tmp[v] = p.action_logp[v * cfg.num_nouns + n];
          p.noun_logp[n] = log_sum_exp(tmp);
        }
      }
    } else {
      p.verb_logp = log_softmax_row(out.centre_verb.data().subspan(b * cfg.num_verbs, cfg.num_verbs));
      p.noun_logp = log_softmax_row(out.centre_noun.data().subspan(b * cfg.num_nouns, cfg.num_nouns));
    }
  }
  return preds;
}

std::vector<CentrePrediction> predict_centres(const AvModel& model, const data::FeatureStore& store,
                                              std::span<const std::size_t> rows, data::WindowMode mode,
                                              ClipPolicy policy, std::size_t batch_size) {
  if (batch_size == 0) throw InvalidArgument("av: batch size must be positive");
  std::vector<CentrePrediction> preds(rows.size());
  const std::size_t chunks = (rows.size() + batch_size - 1) / batch_size;
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), chunks));

  // Each chunk writes its own slice, so the result is independent of scheduling.
  auto run = [&](std::size_t worker) {
    for (std::size_t c = worker; c < chunks; c += workers) {
      const std::size_t start = c * batch_size;
      const std::size_t end = std::min(rows.size(), start + batch_size);
      std::vector<data::ContextWindow> wins;
      for (std::size_t i = start; i < end; ++i)
        wins.push_back(data::make_window(store, rows[i], model.config().window, mode));
      auto part = predict_windows(model, store, wins, policy);
      std::move(part.begin(), part.end(), preds.begin() + start);
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        try {
          run(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }
  return preds;
}

std::vector<AttentionRecord> dump_attention(const AvModel& model, const AvOutput& out, std::size_t b) {
  if (!out.has_attention) throw StateError("attention dump requested but the forward pass did not retain attention");
  if (b >= out.batch) throw InvalidArgument("attention dump: window index out of range");
  const std::size_t T = out.tokens_per_window;
  const std::size_t H = model.config().heads;
  std::vector<AttentionRecord> records;
  for (std::size_t l = 0; l < out.attention.layers.size(); ++l) {
    const auto& probs = out.attention.layers[l];
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t q = 0; q < T; ++q) {
        const auto kind = out.layout[q].kind;
        if (kind == TokenKind::visual || kind == TokenKind::audio) continue;
        const float* row = probs.data() + ((b * H + h) * T + q) * T;
        for (std::size_t k = 0; k < T; ++k) {
          records.push_back({l, h, kind, k, out.layout[k].kind, out.layout[k].slot, row[k]});
        }
      }
    }
  }
  return records;
}

std::string attention_csv(const std::vector<AttentionRecord>& records) {
  std::ostringstream os;
  os << "layer,head,cls,token_index,modality,window_pos,weight\n";
  os << std::setprecision(9);
  for (const auto& r : records) {
    os << r.layer << ',' << r.head << ',' << to_string(r.cls) << ',' << r.token_index << ','
       << to_string(r.modality) << ',' << r.window_pos << ',' << r.weight << '\n';
  }
  return os.str();
}

}  // namespace mtcn::av
