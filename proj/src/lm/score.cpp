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

#include "lm/score.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "common/error.hpp"
#include "numcore/ops.hpp"

namespace mtcn::lm {

using namespace numcore;

namespace {

double log_prob(std::span<const float> logits, std::size_t cls) {
  const float mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (float v : logits) z += std::exp(static_cast<double>(v) - mx);
  return static_cast<double>(logits[cls]) - mx - std::log(z);
}

std::size_t argmax(std::span<const float> x) {
  return static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
}

struct Job {
  std::size_t seq;
  std::size_t pos;
};

// Scores single-mask jobs in one forward call and adds them into `totals`.
void run_jobs(const LmModel& model, std::span<const LabelSeq> seqs, std::span<const Job> jobs,
              std::vector<double>& totals) {
  const std::size_t w = model.config().window;
  LmBatch batch;
  std::vector<std::size_t> readout;
  for (const auto& j : jobs) {
    readout.push_back(batch.batch * w + j.pos);
    model.append(batch, seqs[j.seq], static_cast<std::ptrdiff_t>(j.pos));
  }
  Rng unused(0);
  const LmOutput out = model.forward(batch, false, unused, readout);
  const std::size_t cv = out.verb_logits.cols();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& a = seqs[jobs[i].seq][jobs[i].pos];
    double lp;
    if (model.config().single_head) {
      lp = log_prob(out.verb_logits.data().subspan(i * cv, cv), model.action_id(a));
    } else {
      const std::size_t cn = out.noun_logits.cols();
      lp = log_prob(out.verb_logits.data().subspan(i * cv, cv), static_cast<std::size_t>(a.verb)) +
           log_prob(out.noun_logits.data().subspan(i * cn, cn), static_cast<std::size_t>(a.noun));
    }
    totals[jobs[i].seq] += lp;
  }
}

}  // namespace

double masked_logp(const LmModel& model, const LabelSeq& seq, std::size_t t) {
  if (t >= seq.size()) throw InvalidArgument("lm: masked position out of range");
  if (seq[t].pad()) throw InvalidArgument("lm: cannot score a padding position");
  NoGradGuard no_grad;
  std::vector<double> total(1, 0.0);
  const Job job{0, t};
  run_jobs(model, std::span<const LabelSeq>(&seq, 1), std::span<const Job>(&job, 1), total);
  return total[0];
}

double sequence_pll(const LmModel& model, const LabelSeq& seq) {
  double total = 0.0;
  for (std::size_t t = 0; t < seq.size(); ++t)
    if (!seq[t].pad()) total += masked_logp(model, seq, t);
  return total;
}

std::vector<double> sequence_pll_batch(const LmModel& model, std::span<const LabelSeq> seqs,
                                       std::size_t rows_per_forward) {
  if (rows_per_forward == 0) throw InvalidArgument("lm: rows per forward must be positive");
  const std::size_t w = model.config().window;
  for (const auto& s : seqs)
    if (s.size() != w) throw DimensionError("lm: sequence length does not match window");

  // Whole sequences per chunk so each thread owns its slice of the result.
  const std::size_t per_chunk = std::max<std::size_t>(1, rows_per_forward / w);
  const std::size_t chunks = (seqs.size() + per_chunk - 1) / per_chunk;
  std::vector<double> totals(seqs.size(), 0.0);
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), chunks));

  auto run = [&](std::size_t worker) {
    NoGradGuard no_grad;
    for (std::size_t c = worker; c < chunks; c += workers) {
      const std::size_t start = c * per_chunk, end = std::min(seqs.size(), start + per_chunk);
      std::vector<Job> jobs;
      for (std::size_t s = start; s < end; ++s)
        for (std::size_t t = 0; t < w; ++t)
          if (!seqs[s][t].pad()) jobs.push_back({s, t});
      if (!jobs.empty()) run_jobs(model, seqs, jobs, totals);
    }
  };
  if (workers == 1) {
    run(0);
    return totals;
  }
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
  return totals;
}

std::vector<ActionLabel> predict_masked(const LmModel& model, std::span<const LabelSeq> seqs, std::size_t t) {
  const std::size_t w = model.config().window;
  if (t >= w) throw InvalidArgument("lm: masked position out of range");
  std::vector<ActionLabel> out;
  if (seqs.empty()) return out;
  NoGradGuard no_grad;
  LmBatch batch;
  std::vector<std::size_t> readout;
  for (const auto& s : seqs) {
    readout.push_back(batch.batch * w + t);
    model.append(batch, s, static_cast<std::ptrdiff_t>(t));
  }
  Rng unused(0);
  const LmOutput o = model.forward(batch, false, unused, readout);
  const std::size_t cv = o.verb_logits.cols();
  const std::size_t nn = model.config().num_nouns;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const std::size_t v = argmax(o.verb_logits.data().subspan(i * cv, cv));
    if (model.config().single_head) {
      out.push_back({static_cast<int>(v / nn), static_cast<int>(v % nn)});
    } else {
      const std::size_t cn = o.noun_logits.cols();
      out.push_back({static_cast<int>(v), static_cast<int>(argmax(o.noun_logits.data().subspan(i * cn, cn)))});
    }
  }
  return out;
}

}  // namespace mtcn::lm
