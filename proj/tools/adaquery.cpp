// Copyright 2026 The Adaquery Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adaquery/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"adaquery: adaptive-query experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t jobs = 1;
  std::vector<std::string> overrides;

  CLI::App* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "Experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override experiment.seed")
      ->each([&seed_set](const std::string&) { seed_set = true; });
  run->add_option("--jobs", jobs, "Parallel trial workers")
      ->check(CLI::PositiveNumber);
  run->add_option("--set", overrides,
                  "Override a config field (section.key=value)");

  CLI::App* validate =
      app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", config_path, "Experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  validate->add_option("--set", overrides,
                       "Override a config field (section.key=value)");

  CLI11_PARSE(app, argc, argv);

  try {
    adaquery::ConfigMap cfg = adaquery::ConfigMap::parse_file(config_path);
    for (const std::string& o : overrides) cfg.set_override(o);
    if (validate->parsed()) {
      adaquery::validate_config(cfg);
      std::cout << "ok: " << config_path << "\n";
      return 0;
    }
    const adaquery::ExperimentOutcome outcome =
        adaquery::run_experiment(cfg, seed, seed_set, jobs);
    std::cout << outcome.summary.dump(2) << "\n";
    if (!outcome.pass) {
      std::cerr << "one or more configured assertions failed\n";
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
