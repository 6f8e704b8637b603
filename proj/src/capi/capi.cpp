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

#include "mtcn/mtcn.h"

#include <exception>
#include <memory>
#include <string>

#include <json.hpp>

#include "common/error.hpp"
#include "data/store.hpp"
#include "eval/config.hpp"
#include "eval/run.hpp"
#include "infer/beam.hpp"
#include "lm/score.hpp"

using nlohmann::json;
using namespace mtcn;

struct mtcn_config {
  eval::RunConfig cfg;
};
struct mtcn_store {
  data::FeatureStore store;
};
struct mtcn_av {
  av::AvModel model;
};
struct mtcn_lm {
  lm::LmModel model;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_error_json;

mtcn_status fail(mtcn_status code, const std::string& message) {
  last_error = message;
  last_error_json = json{{"error", {{"code", mtcn_status_name(code)}, {"message", message}}}}.dump();
  return code;
}

// Runs f, translating exceptions into status codes.
template <class F>
mtcn_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    last_error_json.clear();
    return MTCN_OK;
  } catch (const Error& e) {
    return fail(static_cast<mtcn_status>(e.code()), e.what());
  } catch (const json::exception& e) {
    return fail(MTCN_ERR_FORMAT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MTCN_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MTCN_ERR_INTERNAL, e.what());
  }
}

void need(const void* p, const char* what) {
  if (!p) throw InvalidArgument(std::string(what) + " must not be null");
}

char* dup(const std::string& s) {
  char* out = new char[s.size() + 1];
  s.copy(out, s.size());
  out[s.size()] = '\0';
  return out;
}

template <class V>
void set_field(mtcn_config* c, const char* key, V value) {
  need(c, "config");
  need(key, "key");
  std::string ptr = "/";
  for (const char* p = key; *p; ++p) ptr += *p == '.' ? '/' : *p;
  json j = eval::to_json(c->cfg);
  const json::json_pointer jp(ptr);
  if (!j.contains(jp) || j.at(jp).is_object()) throw InvalidArgument(std::string("unknown config field ") + key);
  j[jp] = value;
  c->cfg = eval::config_from_json(j);
}

}  // namespace

extern "C" {

const char* mtcn_version(void) { return "0.1.0"; }

const char* mtcn_status_name(mtcn_status status) {
  switch (status) {
    case MTCN_OK: return "ok";
    case MTCN_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case MTCN_ERR_IO: return "io";
    case MTCN_ERR_FORMAT: return "format";
    case MTCN_ERR_DIMENSION: return "dimension";
    case MTCN_ERR_NUMERIC: return "numeric";
    case MTCN_ERR_STATE: return "state";
    case MTCN_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* mtcn_last_error(void) { return last_error.c_str(); }
const char* mtcn_last_error_json(void) { return last_error_json.c_str(); }
void mtcn_string_free(char* s) { delete[] s; }

mtcn_status mtcn_config_default(mtcn_config** out) {
  return guarded([&] {
    need(out, "out");
    auto c = std::make_unique<mtcn_config>();
    eval::finalize(c->cfg);
    *out = c.release();
  });
}

mtcn_status mtcn_config_load(const char* path, mtcn_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new mtcn_config{eval::load_config(path)};
  });
}

mtcn_status mtcn_config_from_json(const char* text, mtcn_config** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw FormatError(std::string("config: ") + e.what());
    }
    *out = new mtcn_config{eval::config_from_json(j)};
  });
}

mtcn_status mtcn_config_set_string(mtcn_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(value, "value");
    set_field(cfg, key, std::string(value));
  });
}

mtcn_status mtcn_config_set_int(mtcn_config* cfg, const char* key, int64_t value) {
  return guarded([&] { set_field(cfg, key, value); });
}

mtcn_status mtcn_config_set_double(mtcn_config* cfg, const char* key, double value) {
  return guarded([&] { set_field(cfg, key, value); });
}

mtcn_status mtcn_config_to_json(const mtcn_config* cfg, char** out) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    *out = dup(eval::to_json(cfg->cfg).dump(2));
  });
}

void mtcn_config_free(mtcn_config* cfg) { delete cfg; }

mtcn_status mtcn_run_command(const mtcn_config* cfg, const char* run_dir, const char* command, mtcn_log_fn log,
                             void* user, char** summary) {
  return guarded([&] {
    need(cfg, "config");
    need(run_dir, "run_dir");
    need(command, "command");
    eval::RunContext ctx{run_dir, cfg->cfg, {}};
    if (log) ctx.log = [log, user](const std::string& line) { log(line.c_str(), user); };
    const std::string cmd = command;
    json out;
    if (cmd == "synth") out = eval::run_synth(ctx);
    else if (cmd == "train-av") out = eval::run_train_av(ctx);
    else if (cmd == "train-lm") out = eval::run_train_lm(ctx);
    else if (cmd == "eval") out = eval::run_eval(ctx);
    else if (cmd == "rescore") out = eval::run_rescore(ctx);
    else if (cmd == "gridsearch-lambda") out = eval::run_gridsearch(ctx);
    else if (cmd == "dump-attention") out = eval::run_dump_attention(ctx);
    else throw InvalidArgument("unknown command '" + cmd + "'");
    if (summary) *summary = dup(out.dump(2));
  });
}

mtcn_status mtcn_store_open(const char* dir, mtcn_store** out) {
  return guarded([&] {
    need(dir, "dir");
    need(out, "out");
    *out = new mtcn_store{data::load_store(dir)};
  });
}

size_t mtcn_store_size(const mtcn_store* store) { return store ? store->store.size() : 0; }

mtcn_status mtcn_store_label(const mtcn_store* store, size_t row, int* verb, int* noun) {
  return guarded([&] {
    need(store, "store");
    need(verb, "verb");
    need(noun, "noun");
    if (row >= store->store.size()) throw InvalidArgument("store row out of range");
    const auto& r = store->store.record(row);
    *verb = r.verb;
    *noun = r.noun;
  });
}

void mtcn_store_free(mtcn_store* store) { delete store; }

mtcn_status mtcn_beam_search(size_t w, size_t num_verbs, size_t num_nouns, const float* verb_logp,
                             const float* noun_logp, const unsigned char* padded, size_t k, int* out_actions,
                             double* out_scores, size_t* out_count) {
  return guarded([&] {
    need(verb_logp, "verb_logp");
    need(noun_logp, "noun_logp");
    need(out_actions, "out_actions");
    need(out_scores, "out_scores");
    need(out_count, "out_count");
    if (w == 0 || num_verbs == 0 || num_nouns == 0 || k == 0)
      throw InvalidArgument("beam search: w, vocabularies and k must be positive");
    infer::ScoreSequence s;
    s.window = w;
    s.num_verbs = num_verbs;
    s.num_nouns = num_nouns;
    s.target = (w - 1) / 2;
    s.verb_logp.assign(verb_logp, verb_logp + w * num_verbs);
    s.noun_logp.assign(noun_logp, noun_logp + w * num_nouns);
    s.padded.assign(w, 0);
    if (padded)
      for (size_t j = 0; j < w; ++j) s.padded[j] = padded[j] ? 1 : 0;
    auto hyps = infer::beam_search(s, k);
    if (hyps.size() > k) hyps.resize(k);
    for (size_t h = 0; h < hyps.size(); ++h) {
      for (size_t j = 0; j < w; ++j) {
        out_actions[(h * w + j) * 2] = hyps[h].actions[j].verb;
        out_actions[(h * w + j) * 2 + 1] = hyps[h].actions[j].noun;
      }
      out_scores[h] = hyps[h].p_av;
    }
    *out_count = hyps.size();
  });
}

mtcn_status mtcn_av_load(const mtcn_config* cfg, const char* checkpoint, mtcn_av** out) {
  return guarded([&] {
    need(cfg, "config");
    need(checkpoint, "checkpoint");
    need(out, "out");
    *out = new mtcn_av{eval::load_av(cfg->cfg, checkpoint)};
  });
}

mtcn_status mtcn_av_parameter_count(const mtcn_av* av, size_t* out) {
  return guarded([&] {
    need(av, "av");
    need(out, "out");
    *out = av->model.params().scalar_count();
  });
}

void mtcn_av_free(mtcn_av* av) { delete av; }

mtcn_status mtcn_lm_load(const mtcn_config* cfg, const char* checkpoint, mtcn_lm** out) {
  return guarded([&] {
    need(cfg, "config");
    need(checkpoint, "checkpoint");
    need(out, "out");
    *out = new mtcn_lm{eval::load_lm(cfg->cfg, checkpoint)};
  });
}

mtcn_status mtcn_lm_pll(const mtcn_lm* lm, const int* verbs, const int* nouns, size_t len, double* out) {
  return guarded([&] {
    need(lm, "lm");
    need(verbs, "verbs");
    need(nouns, "nouns");
    need(out, "out");
    if (len != lm->model.config().window) throw DimensionError("lm: sequence length does not match window");
    lm::LabelSeq seq(len);
    for (size_t j = 0; j < len; ++j) seq[j] = {verbs[j], nouns[j]};
    *out = lm::sequence_pll(lm->model, seq);
  });
}

void mtcn_lm_free(mtcn_lm* lm) { delete lm; }

}  // extern "C"
