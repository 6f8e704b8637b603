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

#include "eval/run.hpp"

#include <algorithm>
#include <sstream>

#include "av/predict.hpp"
#include "av/train.hpp"
#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "data/synth.hpp"
#include "infer/pipeline.hpp"
#include "lm/ngram.hpp"
#include "lm/train.hpp"
#include "numcore/params.hpp"

namespace mtcn::eval {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path data_dir(const RunContext& ctx) {
  return ctx.config.data_dir.empty() ? ctx.run_dir / "data" : fs::path(ctx.config.data_dir);
}
fs::path av_checkpoint(const RunContext& ctx) { return ctx.run_dir / "checkpoints" / "av.ckpt"; }
fs::path lm_checkpoint(const RunContext& ctx) { return ctx.run_dir / "checkpoints" / "lm.ckpt"; }
fs::path ngram_table(const RunContext& ctx) { return ctx.run_dir / "checkpoints" / "ngram.txt"; }

void write_run_header(const RunContext& ctx) {
  fs::create_directories(ctx.run_dir / "checkpoints");
  io::write_text((ctx.run_dir / "config.json").string(), to_json(ctx.config).dump(2) + "\n");
  io::write_text((ctx.run_dir / "seed").string(), std::to_string(ctx.config.seed) + "\n");
}

namespace {

void log(const RunContext& ctx, const std::string& line) {
  if (ctx.log) ctx.log(line);
}

struct Dataset {
  data::FeatureStore store;
  data::Splits splits;
};

Dataset load_data(const RunContext& ctx) {
  const fs::path dir = data_dir(ctx);
  if (!fs::exists(dir / "manifest.csv")) {
    throw IoError("no feature store at " + dir.string() + " (run `synth` first or set data_dir)");
  }
  return {data::load_store(dir), data::read_splits(dir / "splits.json")};
}

void check_store_matches(const RunConfig& cfg, const data::FeatureStore& store) {
  auto mismatch = [](const std::string& field, std::size_t cfg_value, std::size_t found) {
    throw InvalidArgument("config field " + field + "=" + std::to_string(cfg_value) + " does not match the data (" +
                          std::to_string(found) + ")");
  };
  if (store.visual().dim != cfg.av.visual_dim) mismatch("av.visual_dim", cfg.av.visual_dim, store.visual().dim);
  if (cfg.av.audio_enabled) {
    if (!store.has_audio()) throw InvalidArgument("config field av.audio_enabled=true but the store has no audio");
    if (store.audio().dim != cfg.av.audio_dim) mismatch("av.audio_dim", cfg.av.audio_dim, store.audio().dim);
  }
  const auto verbs = static_cast<std::size_t>(store.num_verbs());
  const auto nouns = static_cast<std::size_t>(store.num_nouns());
  if (verbs > cfg.av.num_verbs) mismatch("av.num_verbs", cfg.av.num_verbs, verbs);
  if (nouns > cfg.av.num_nouns) mismatch("av.num_nouns", cfg.av.num_nouns, nouns);
}

std::string field_for(const std::string& section, const std::string& name, std::size_t axis) {
  auto starts = [&](const char* p) { return name.rfind(p, 0) == 0; };
  const std::string dim = section + ".model_dim";
  if (starts("g_v.")) return axis == 0 && name == "g_v.weight" ? "av.visual_dim" : dim;
  if (starts("g_a.")) return axis == 0 && name == "g_a.weight" ? "av.audio_dim" : dim;
  if (name == "pos") return axis == 0 ? "window" : dim;
  const bool class_axis = name.find(".bias") != std::string::npos || axis == 1;
  if (starts("head_v.")) return class_axis ? "av.num_verbs" : dim;
  if (starts("head_n.")) return class_axis ? "av.num_nouns" : dim;
  if (starts("head_a.")) return class_axis ? (section == "av" ? "av.num_actions" : "av.num_verbs/av.num_nouns") : dim;
  if (starts("emb_v")) return axis == 0 ? "av.num_verbs" : dim;
  if (starts("emb_n")) return axis == 0 ? "av.num_nouns" : dim;
  if (starts("emb_a")) return axis == 0 ? "av.num_verbs/av.num_nouns" : dim;
  if (name.find("ffn.w1") != std::string::npos) return axis == 1 ? section + ".ffn_dim" : dim;
  if (name.find("ffn.b1") != std::string::npos || name.find("ffn.w2") != std::string::npos) {
    return axis == 0 || name.find("b1") != std::string::npos ? section + ".ffn_dim" : dim;
  }
  return dim;
}

void load_weights(numcore::ParamSet& params, const fs::path& path, const std::string& section) {
  if (!fs::exists(path)) throw IoError("missing checkpoint " + path.string());
  const auto entries = numcore::read_checkpoint(path);
  for (const auto& e : entries) {
    if (!params.contains(e.name)) {
      throw InvalidArgument("checkpoint " + path.string() + " holds parameter '" + e.name +
                            "' that the config does not build (check " + section + ".layers, " + section +
                            ".weight_sharing, av.audio_enabled, av.single_head)");
    }
    const auto& want = params.get(e.name).shape();
    const auto& got = e.tensor.shape();
    if (want.size() != got.size()) {
      throw InvalidArgument("checkpoint parameter '" + e.name + "' has rank " + std::to_string(got.size()) +
                            ", config builds rank " + std::to_string(want.size()));
    }
    for (std::size_t a = 0; a < want.size(); ++a) {
      if (want[a] != got[a]) {
        throw InvalidArgument("config field " + field_for(section, e.name, a) + " does not match checkpoint " +
                              path.string() + ": parameter '" + e.name + "' is " + numcore::shape_str(got) +
                              ", config builds " + numcore::shape_str(want));
      }
    }
  }
  for (const auto& e : params.entries()) {
    const bool present = std::any_of(entries.begin(), entries.end(), [&](const auto& x) { return x.name == e.name; });
    if (!present) {
      throw InvalidArgument("checkpoint " + path.string() + " lacks parameter '" + e.name + "' (check " + section +
                            ".layers, " + section + ".weight_sharing, av.audio_enabled, av.single_head)");
    }
  }
  numcore::load_checkpoint(params, path);
}

std::vector<InstanceResult> rank_all(std::vector<infer::DecodedWindow>& windows, const data::Splits& splits,
                                     const RunConfig& cfg, double lambda) {
  std::vector<InstanceResult> results;
  results.reserve(windows.size());
  for (auto& w : windows) {
    infer::fuse(w.hyps, lambda);
    InstanceResult r;
    r.row = w.scores.anchor_row;
    r.truth = w.truth;
    r.ranking = infer::rank_centre(w.scores, w.hyps, cfg.fusion.top5);
    results.push_back(std::move(r));
  }
  tag_subsets(results, splits);
  return results;
}

std::unique_ptr<infer::SequenceScorer> make_scorer(const RunContext& ctx, std::unique_ptr<lm::LmModel>& mlm,
                                                   std::unique_ptr<lm::NGramModel>& ngram) {
  switch (ctx.config.lm_kind) {
    case LmKind::mlm:
      mlm = std::make_unique<lm::LmModel>(load_lm(ctx.config, lm_checkpoint(ctx)));
      return std::make_unique<infer::MlmScorer>(*mlm);
    case LmKind::ngram: {
      if (!fs::exists(ngram_table(ctx))) throw IoError("missing n-gram table " + ngram_table(ctx).string());
      ngram = std::make_unique<lm::NGramModel>(lm::load_ngram(ngram_table(ctx)));
      if (ngram->window() != ctx.config.window || ngram->target() != data::target_slot(ctx.config.window, ctx.config.mode)) {
        throw InvalidArgument("config field window/mode does not match the n-gram table's window " +
                              std::to_string(ngram->window()) + " and target " + std::to_string(ngram->target()));
      }
      return std::make_unique<infer::NGramScorer>(*ngram);
    }
    case LmKind::none: return nullptr;
  }
  return nullptr;
}

void write_eval_outputs(const RunContext& ctx, const Evaluation& e) {
  io::write_text((ctx.run_dir / "metrics.json").string(), to_json(e.report).dump(2) + "\n");
  io::write_text((ctx.run_dir / "rescored.jsonl").string(), rescored_jsonl(e));
}

}  // namespace

av::AvModel load_av(const RunConfig& cfg, const fs::path& path) {
  av::AvModel model(cfg.av, cfg.seed);
  load_weights(model.params(), path, "av");
  return model;
}

lm::LmModel load_lm(const RunConfig& cfg, const fs::path& path) {
  lm::LmModel model(cfg.lm, cfg.seed);
  load_weights(model.params(), path, "lm");
  return model;
}

Evaluation evaluate(const av::AvModel& model, const data::FeatureStore& store, const data::Splits& splits,
                    std::span<const std::size_t> rows, const RunConfig& cfg, const infer::SequenceScorer* lm,
                    double lambda) {
  if (rows.empty()) throw InvalidArgument("evaluation: no rows to evaluate");
  const auto preds = infer::predict_for_windows(model, store, rows, cfg.window, cfg.mode);
  Evaluation e;
  e.windows = infer::decode(store, preds, rows, cfg.window, cfg.mode, cfg.fusion.beam, model.config().num_verbs,
                            model.config().num_nouns);
  if (lm) infer::attach_lm(e.windows, *lm);
  return refuse(std::move(e), splits, cfg, lambda);
}

Evaluation refuse(Evaluation e, const data::Splits& splits, const RunConfig& cfg, double lambda) {
  infer::validate_lambda(lambda);
  e.lambda = lambda;
  e.results = rank_all(e.windows, splits, cfg, lambda);
  e.report = compute_metrics(e.results);
  return e;
}

std::string rescored_jsonl(const Evaluation& e) {
  std::string out;
  for (std::size_t i = 0; i < e.results.size(); ++i) out += rescore_record(e.results[i], e.windows[i], e.lambda).dump() + "\n";
  return out;
}

json run_synth(const RunContext& ctx) {
  write_run_header(ctx);
  const auto corpus = data::synth_generate(ctx.config.synth, ctx.config.seed);
  const fs::path dir = data_dir(ctx);
  fs::create_directories(dir);
  data::save_store(dir, corpus.store);
  data::write_splits(dir / "splits.json", corpus.splits);
  const double ceiling = data::memoryless_action_ceiling(corpus.spec);
  log(ctx, "synth: " + std::to_string(corpus.store.size()) + " actions written to " + dir.string());
  return {{"command", "synth"},
          {"actions", corpus.store.size()},
          {"train", corpus.splits.train.size()},
          {"val", corpus.splits.val.size()},
          {"unseen", corpus.splits.unseen.size()},
          {"tail", corpus.splits.tail.size()},
          {"memoryless_action_ceiling", ceiling},
          {"data_dir", dir.string()}};
}

json run_train_av(const RunContext& ctx) {
  write_run_header(ctx);
  const auto data = load_data(ctx);
  check_store_matches(ctx.config, data.store);
  av::AvModel model(ctx.config.av, ctx.config.seed);
  const auto train_log = av::train_av(model, data.store, data.splits.train, ctx.config.av_train, ctx.config.seed + 1,
                                      [&](std::size_t epoch, float loss) {
                                        std::ostringstream os;
                                        os << "train-av: epoch " << epoch + 1 << " loss " << loss;
                                        log(ctx, os.str());
                                      });
  numcore::save_checkpoint(model.params(), av_checkpoint(ctx));
  const json summary = {{"command", "train-av"},
                        {"epochs", ctx.config.av_train.epochs},
                        {"epoch_loss", train_log.epoch_loss},
                        {"parameters", model.params().scalar_count()},
                        {"checkpoint", av_checkpoint(ctx).string()}};
  io::write_text((ctx.run_dir / "checkpoints" / "av_train.json").string(), summary.dump(2) + "\n");
  return summary;
}

json run_train_lm(const RunContext& ctx) {
  write_run_header(ctx);
  const auto& cfg = ctx.config;
  const auto data = load_data(ctx);
  if (cfg.lm_kind == LmKind::none) return {{"command", "train-lm"}, {"lm_kind", "none"}, {"skipped", true}};
  if (cfg.lm_kind == LmKind::ngram) {
    const auto videos = lm::video_sequences(data.store, data.splits.train);
    const auto model = lm::ngram_build(videos, cfg.window, data::target_slot(cfg.window, cfg.mode));
    lm::save_ngram(model, ngram_table(ctx));
    log(ctx, "train-lm: n-gram table with " + std::to_string(model.counts().size()) + " contexts");
    return {{"command", "train-lm"},
            {"lm_kind", "ngram"},
            {"contexts", model.counts().size()},
            {"table", ngram_table(ctx).string()}};
  }
  if (static_cast<std::size_t>(data.store.num_verbs()) > cfg.lm.num_verbs ||
      static_cast<std::size_t>(data.store.num_nouns()) > cfg.lm.num_nouns) {
    throw InvalidArgument("config fields av.num_verbs/av.num_nouns are smaller than the data's label range");
  }
  const auto train = lm::window_corpus(data.store, data.splits.train, cfg.window, cfg.mode);
  const auto val = lm::window_corpus(data.store, data.splits.val, cfg.window, cfg.mode);
  lm::LmModel model(cfg.lm, cfg.seed + 2);
  const auto train_log =
      lm::train_lm(model, train, val, cfg.lm_train, cfg.seed + 3, [&](std::size_t epoch, float loss, float acc) {
        std::ostringstream os;
        os << "train-lm: epoch " << epoch + 1 << " loss " << loss << " val masked acc " << acc;
        log(ctx, os.str());
      });
  numcore::save_checkpoint(model.params(), lm_checkpoint(ctx));
  const json summary = {{"command", "train-lm"},
                        {"lm_kind", "mlm"},
                        {"epoch_loss", train_log.epoch_loss},
                        {"val_accuracy", train_log.val_accuracy},
                        {"lr", train_log.lr},
                        {"checkpoint", lm_checkpoint(ctx).string()}};
  io::write_text((ctx.run_dir / "checkpoints" / "lm_train.json").string(), summary.dump(2) + "\n");
  return summary;
}

json run_eval(const RunContext& ctx) {
  write_run_header(ctx);
  const auto data = load_data(ctx);
  check_store_matches(ctx.config, data.store);
  const auto model = load_av(ctx.config, av_checkpoint(ctx));
  const auto e = evaluate(model, data.store, data.splits, data.splits.val, ctx.config, nullptr, 0.0);
  write_eval_outputs(ctx, e);
  return {{"command", "eval"}, {"lambda", 0.0}, {"metrics", to_json(e.report)}};
}

json run_rescore(const RunContext& ctx) {
  write_run_header(ctx);
  const auto data = load_data(ctx);
  check_store_matches(ctx.config, data.store);
  const auto model = load_av(ctx.config, av_checkpoint(ctx));
  std::unique_ptr<lm::LmModel> mlm;
  std::unique_ptr<lm::NGramModel> ngram;
  const auto scorer = make_scorer(ctx, mlm, ngram);
  const double lambda = ctx.config.fusion.lambda;
  const auto e = evaluate(model, data.store, data.splits, data.splits.val, ctx.config, scorer.get(), lambda);
  write_eval_outputs(ctx, e);
  return {{"command", "rescore"},
          {"lm_kind", to_string(ctx.config.lm_kind)},
          {"lambda", lambda},
          {"metrics", to_json(e.report)}};
}

json run_gridsearch(const RunContext& ctx) {
  write_run_header(ctx);
  const auto data = load_data(ctx);
  check_store_matches(ctx.config, data.store);
  const auto model = load_av(ctx.config, av_checkpoint(ctx));
  std::unique_ptr<lm::LmModel> mlm;
  std::unique_ptr<lm::NGramModel> ngram;
  const auto scorer = make_scorer(ctx, mlm, ngram);
  const auto e = evaluate(model, data.store, data.splits, data.splits.val, ctx.config, scorer.get(), 0.0);
  const auto res = infer::grid_search_lambda(e.windows, ctx.config.fusion.grid);
  json table = json::array();
  for (const auto& [l, acc] : res.accuracy) table.push_back({{"lambda", l}, {"top1_action", acc}});
  const json out = {{"lm_kind", to_string(ctx.config.lm_kind)}, {"best_lambda", res.best_lambda}, {"table", table}};
  io::write_text((ctx.run_dir / "gridsearch.json").string(), out.dump(2) + "\n");
  json summary = out;
  summary["command"] = "gridsearch-lambda";
  return summary;
}

json run_dump_attention(const RunContext& ctx, std::size_t val_index) {
  write_run_header(ctx);
  const auto data = load_data(ctx);
  check_store_matches(ctx.config, data.store);
  if (val_index >= data.splits.val.size()) {
    throw InvalidArgument("dump-attention: validation index " + std::to_string(val_index) + " out of range (" +
                          std::to_string(data.splits.val.size()) + " windows)");
  }
  const auto model = load_av(ctx.config, av_checkpoint(ctx));
  const std::size_t row = data.splits.val[val_index];
  const std::vector<data::ContextWindow> wins{data::make_window(data.store, row, ctx.config.window, ctx.config.mode)};
  numcore::NoGradGuard no_grad;
  numcore::Rng unused(0);
  const auto in = av::build_input(data.store, wins, model.config(), av::ClipPolicy::all);
  const auto out = model.forward(in, false, unused, false, true);
  const auto records = av::dump_attention(model, out, 0);
  io::write_text((ctx.run_dir / "attention.csv").string(), av::attention_csv(records));
  return {{"command", "dump-attention"}, {"row", row}, {"records", records.size()}};
}

}  // namespace mtcn::eval
