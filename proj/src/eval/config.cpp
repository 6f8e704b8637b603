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

#include "eval/config.hpp"

#include <set>

#include "common/binary_io.hpp"
#include "common/error.hpp"

namespace mtcn::eval {

using nlohmann::json;

LmKind parse_lm_kind(const std::string& name) {
  if (name == "mlm") return LmKind::mlm;
  if (name == "ngram") return LmKind::ngram;
  if (name == "none") return LmKind::none;
  throw InvalidArgument("unknown lm kind '" + name + "' (expected mlm, ngram or none)");
}

std::string to_string(LmKind kind) {
  switch (kind) {
    case LmKind::mlm: return "mlm";
    case LmKind::ngram: return "ngram";
    case LmKind::none: return "none";
  }
  return "?";
}

namespace {

// Reads known keys of one JSON object and rejects anything else.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw InvalidArgument("config section '" + name_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    known_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw InvalidArgument("config field " + field(key) + " has the wrong type");
    }
  }

  template <class Parse>
  void get_string(const char* key, Parse parse) {
    std::string s;
    known_.insert(key);
    if (!j_.contains(key)) return;
    get(key, s);
    try {
      parse(s);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("config field " + field(key) + ": " + e.what());
    }
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!known_.count(k)) throw InvalidArgument("unknown config field " + field(k.c_str()));
  }

  std::string field(const char* key) const { return name_.empty() ? key : name_ + "." + key; }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> known_;
};

void read_optimizer(Section& s, numcore::OptimizerConfig& o) {
  s.get_string("optimizer", [&](const std::string& v) { o.kind = numcore::parse_optimizer_kind(v); });
  s.get("lr", o.lr);
  s.get("momentum", o.momentum);
  s.get("weight_decay", o.weight_decay);
  s.get("beta1", o.beta1);
  s.get("beta2", o.beta2);
  s.get("eps", o.eps);
}

json optimizer_json(const numcore::OptimizerConfig& o) {
  return {{"optimizer", numcore::to_string(o.kind)}, {"lr", o.lr},       {"momentum", o.momentum},
          {"weight_decay", o.weight_decay},          {"beta1", o.beta1}, {"beta2", o.beta2},
          {"eps", o.eps}};
}

}  // namespace

void finalize(RunConfig& c) {
  data::validate_window_length(c.window, c.mode);
  c.av.window = c.window;
  c.lm.window = c.window;
  c.lm.num_verbs = c.av.num_verbs;
  c.lm.num_nouns = c.av.num_nouns;
  c.lm.single_head = c.av.single_head;
  c.av_train.mode = c.mode;
  c.lm_train.mode = c.mode;
  av::validate(c.av);
  lm::validate(c.lm);
  if (c.fusion.beam == 0) throw InvalidArgument("config field fusion.beam must be at least 1");
  infer::validate_lambda(c.fusion.lambda);
  if (c.fusion.grid.empty()) throw InvalidArgument("config field fusion.grid must not be empty");
  for (double l : c.fusion.grid) infer::validate_lambda(l);
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  Section top(j, "");
  top.get("seed", c.seed);
  top.get_string("mode", [&](const std::string& v) { c.mode = data::parse_window_mode(v); });
  top.get("window", c.window);
  top.get_string("lm_kind", [&](const std::string& v) { c.lm_kind = parse_lm_kind(v); });
  top.get("data_dir", c.data_dir);

  static const json empty = json::object();
  auto sub = [&](const char* key) -> const json& {
    return j.contains(key) ? j.at(key) : empty;
  };
  {
    Section s(sub("synth"), "synth");
    auto& p = c.synth;
    s.get("num_verbs", p.num_verbs);
    s.get("num_nouns", p.num_nouns);
    s.get("verb_transitions", p.verb_transitions);
    s.get("noun_prior", p.noun_prior);
    s.get("noun_zipf_exponent", p.noun_zipf_exponent);
    s.get("noun_persistence", p.noun_persistence);
    s.get("feature_dim", p.feature_dim);
    s.get("audio", p.audio);
    s.get("clips_per_action", p.clips_per_action);
    s.get("verb_mean_scale", p.verb_mean_scale);
    s.get("noun_mean_scale", p.noun_mean_scale);
    s.get("noise", p.noise);
    s.get("verb_ambiguity", p.verb_ambiguity);
    s.get("noun_ambiguity", p.noun_ambiguity);
    s.get("videos", p.videos);
    s.get("min_actions", p.min_actions);
    s.get("max_actions", p.max_actions);
    s.get("participants", p.participants);
    s.get("held_out_participants", p.held_out_participants);
    s.get("tail_mass", p.tail_mass);
    s.finish();
  }
  {
    Section s(sub("av"), "av");
    auto& a = c.av;
    s.get("visual_dim", a.visual_dim);
    s.get("audio_dim", a.audio_dim);
    s.get("model_dim", a.model_dim);
    s.get("layers", a.layers);
    s.get("heads", a.heads);
    s.get("ffn_dim", a.ffn_dim);
    s.get("dropout_enc", a.dropout_enc);
    s.get("dropout_layer", a.dropout_layer);
    s.get("weight_sharing", a.weight_sharing);
    s.get("beta", a.beta);
    s.get("single_head", a.single_head);
    s.get("audio_enabled", a.audio_enabled);
    s.get("num_verbs", a.num_verbs);
    s.get("num_nouns", a.num_nouns);
    s.get("num_actions", a.num_actions);
    s.get("clips_per_action", a.clips_per_action);
    s.get("init_std", a.init_std);
    auto& t = c.av_train;
    s.get("epochs", t.epochs);
    s.get("batch_size", t.batch_size);
    read_optimizer(s, t.optimizer);
    s.get("lr_milestones", t.lr_milestones);
    s.get("lr_gamma", t.lr_gamma);
    s.get("mixup_alpha", t.mixup_alpha);
    s.finish();
  }
  {
    Section s(sub("lm"), "lm");
    auto& m = c.lm;
    s.get("model_dim", m.model_dim);
    s.get("layers", m.layers);
    s.get("heads", m.heads);
    s.get("ffn_dim", m.ffn_dim);
    s.get("dropout_enc", m.dropout_enc);
    s.get("dropout_layer", m.dropout_layer);
    s.get("weight_sharing", m.weight_sharing);
    s.get("init_std", m.init_std);
    s.get("embed_std", m.embed_std);
    auto& t = c.lm_train;
    s.get("epochs", t.epochs);
    s.get("batch_size", t.batch_size);
    read_optimizer(s, t.optimizer);
    s.get("mask_rounds", t.mask_rounds);
    s.get("replace_ramp", t.replace_ramp);
    s.get("plateau_patience", t.plateau_patience);
    s.get("plateau_factor", t.plateau_factor);
    s.finish();
  }
  {
    Section s(sub("fusion"), "fusion");
    auto& f = c.fusion;
    s.get("beam", f.beam);
    s.get("lambda", f.lambda);
    s.get("grid", f.grid);
    s.get_string("top5_protocol", [&](const std::string& v) { f.top5 = infer::parse_top5_protocol(v); });
    s.finish();
  }
  // Sections are checked above; here only their names count as known.
  for (const char* key : {"synth", "av", "lm", "fusion"}) {
    json ignored;
    top.get(key, ignored);
  }
  top.finish();
  finalize(c);
  return c;
}

json to_json(const RunConfig& c) {
  const auto& p = c.synth;
  const auto& a = c.av;
  const auto& m = c.lm;
  json av = {{"visual_dim", a.visual_dim},
             {"audio_dim", a.audio_dim},
             {"model_dim", a.model_dim},
             {"layers", a.layers},
             {"heads", a.heads},
             {"ffn_dim", a.ffn_dim},
             {"dropout_enc", a.dropout_enc},
             {"dropout_layer", a.dropout_layer},
             {"weight_sharing", a.weight_sharing},
             {"beta", a.beta},
             {"single_head", a.single_head},
             {"audio_enabled", a.audio_enabled},
             {"num_verbs", a.num_verbs},
             {"num_nouns", a.num_nouns},
             {"num_actions", a.num_actions},
             {"clips_per_action", a.clips_per_action},
             {"init_std", a.init_std},
             {"epochs", c.av_train.epochs},
             {"batch_size", c.av_train.batch_size},
             {"lr_milestones", c.av_train.lr_milestones},
             {"lr_gamma", c.av_train.lr_gamma},
             {"mixup_alpha", c.av_train.mixup_alpha}};
  av.update(optimizer_json(c.av_train.optimizer));
  json lm = {{"model_dim", m.model_dim},
             {"layers", m.layers},
             {"heads", m.heads},
             {"ffn_dim", m.ffn_dim},
             {"dropout_enc", m.dropout_enc},
             {"dropout_layer", m.dropout_layer},
             {"weight_sharing", m.weight_sharing},
             {"init_std", m.init_std},
             {"embed_std", m.embed_std},
             {"epochs", c.lm_train.epochs},
             {"batch_size", c.lm_train.batch_size},
             {"mask_rounds", c.lm_train.mask_rounds},
             {"replace_ramp", c.lm_train.replace_ramp},
             {"plateau_patience", c.lm_train.plateau_patience},
             {"plateau_factor", c.lm_train.plateau_factor}};
  lm.update(optimizer_json(c.lm_train.optimizer));
  return {{"seed", c.seed},
          {"mode", data::to_string(c.mode)},
          {"window", c.window},
          {"lm_kind", to_string(c.lm_kind)},
          {"data_dir", c.data_dir},
          {"synth",
           {{"num_verbs", p.num_verbs},
            {"num_nouns", p.num_nouns},
            {"verb_transitions", p.verb_transitions},
            {"noun_prior", p.noun_prior},
            {"noun_zipf_exponent", p.noun_zipf_exponent},
            {"noun_persistence", p.noun_persistence},
            {"feature_dim", p.feature_dim},
            {"audio", p.audio},
            {"clips_per_action", p.clips_per_action},
            {"verb_mean_scale", p.verb_mean_scale},
            {"noun_mean_scale", p.noun_mean_scale},
            {"noise", p.noise},
            {"verb_ambiguity", p.verb_ambiguity},
            {"noun_ambiguity", p.noun_ambiguity},
            {"videos", p.videos},
            {"min_actions", p.min_actions},
            {"max_actions", p.max_actions},
            {"participants", p.participants},
            {"held_out_participants", p.held_out_participants},
            {"tail_mass", p.tail_mass}}},
          {"av", av},
          {"lm", lm},
          {"fusion",
           {{"beam", c.fusion.beam},
            {"lambda", c.fusion.lambda},
            {"grid", c.fusion.grid},
            {"top5_protocol", infer::to_string(c.fusion.top5)}}}};
}

RunConfig load_config(const std::filesystem::path& path) {
  const std::string text = io::read_text(path.string());
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace mtcn::eval
