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

// mtcn command line: thin wrapper over the C API.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "mtcn/mtcn.h"

namespace {

struct Options {
  std::string config;
  std::string run_dir = "run";
  std::optional<std::int64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::int64_t> window;
  std::optional<std::string> lm;
  std::optional<double> lambda;
  std::optional<std::int64_t> beam;
  bool verbose = false;
};

int report(const std::string& code, const std::string& message, int exit_code) {
  std::cerr << nlohmann::json{{"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
  return exit_code;
}

int report_last() {
  std::cerr << mtcn_last_error_json() << "\n";
  return 1;
}

void print_log(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

int run(const std::string& command, const Options& o) {
  mtcn_config* cfg = nullptr;
  mtcn_status st = o.config.empty() ? mtcn_config_default(&cfg) : mtcn_config_load(o.config.c_str(), &cfg);
  if (st != MTCN_OK) return report_last();
  // Flag overrides, applied after the file so they win.
  if (st == MTCN_OK && o.seed) st = mtcn_config_set_int(cfg, "seed", *o.seed);
  if (st == MTCN_OK && o.mode) st = mtcn_config_set_string(cfg, "mode", o.mode->c_str());
  if (st == MTCN_OK && o.window) st = mtcn_config_set_int(cfg, "window", *o.window);
  if (st == MTCN_OK && o.lm) st = mtcn_config_set_string(cfg, "lm_kind", o.lm->c_str());
  if (st == MTCN_OK && o.lambda) st = mtcn_config_set_double(cfg, "fusion.lambda", *o.lambda);
  if (st == MTCN_OK && o.beam) st = mtcn_config_set_int(cfg, "fusion.beam", *o.beam);
  char* summary = nullptr;
  if (st == MTCN_OK)
    st = mtcn_run_command(cfg, o.run_dir.c_str(), command.c_str(), o.verbose ? print_log : nullptr, nullptr,
                          &summary);
  mtcn_config_free(cfg);
  if (st != MTCN_OK) return report_last();
  std::cout << summary << "\n";
  mtcn_string_free(summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mtcn: temporal context action recognition on precomputed features"};
  app.set_version_flag("--version", std::string(mtcn_version()));
  app.require_subcommand(1);

  Options o;
  const char* commands[][2] = {
      {"synth", "generate the synthetic corpus into <run>/data"},
      {"train-av", "train the audio-visual transformer"},
      {"train-lm", "train the language model chosen by --lm"},
      {"eval", "evaluate the AV model alone (lambda 0)"},
      {"rescore", "beam search, LM rescoring and fusion at --lambda"},
      {"gridsearch-lambda", "pick lambda on the validation split"},
      {"dump-attention", "write summary-token attention weights to attention.csv"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--run-dir", o.run_dir, "run directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--mode", o.mode, "centre or online");
    sub->add_option("--w", o.window, "window length");
    sub->add_option("--lm", o.lm, "mlm, ngram or none");
    sub->add_option("--lambda", o.lambda, "fusion weight in [0, 1]");
    sub->add_option("--beam", o.beam, "beam width K");
    sub->add_flag("-v,--verbose", o.verbose, "progress lines on stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what(), 2);
  }
  return run(app.get_subcommands().front()->get_name(), o);
}
