// Copyright 2026 The FLECS Authors. All Rights Reserved.
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

// flecs: run, sweep and compare federated experiments.
//
// Exit codes: 0 ok, 1 configuration or dataset error, 2 runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "experiment.h"
#include "run_config.h"

namespace fs = std::filesystem;
using flecs::cli::Json;

namespace {

constexpr int kOk = 0;
constexpr int kConfigFailure = 1;
constexpr int kRuntimeFailure = 2;

Json prepare(const std::string& path, const std::vector<std::string>& sets) {
  Json user = flecs::cli::load_config_file(path);
  for (const std::string& s : sets) flecs::cli::apply_override(user, s);
  return user;
}

fs::path run_dir(const std::string& out, const Json& resolved) {
  return out.empty() ? flecs::cli::output_root() / resolved["name"].get<std::string>()
                     : fs::path(out);
}

template <typename Fn>
int guarded(Fn fn) {
  try {
    return fn();
  } catch (const flecs::ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kConfigFailure;
  } catch (const flecs::cli::DatasetError& e) {
    spdlog::error("dataset error: {}", e.what());
    return kConfigFailure;
  } catch (const flecs::ParseError& e) {
    spdlog::error("input error: {}", e.what());
    return kConfigFailure;
  } catch (const std::exception& e) {
    spdlog::error("runtime error: {}", e.what());
    return kRuntimeFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated sketched quasi-Newton experiments"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  std::string config_path, out_dir;
  std::vector<std::string> sets, params;
  bool resume = false;

  CLI::App* run = app.add_subcommand("run", "Run one configuration");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("--set", sets, "Override a field: dotted.key=value");
  run->add_option("-o,--out", out_dir,
                  "Output directory (default $FLECS_OUTPUT_ROOT/<name>)");
  run->add_flag("--resume", resume, "Continue from the run's checkpoint");

  CLI::App* sweep = app.add_subcommand("sweep", "Run a grid of configurations");
  sweep->add_option("config", config_path, "JSON config file")->required();
  sweep->add_option("--param", params, "dotted.key=v1,v2,...")->required();
  sweep->add_option("--set", sets, "Override a field: dotted.key=value");
  sweep->add_option("-o,--out", out_dir,
                    "Sweep directory (default $FLECS_OUTPUT_ROOT/<name>)");
  sweep->add_flag("--resume", resume, "Continue each point from its checkpoint");

  std::vector<std::string> csvs;
  std::string merged_path;
  CLI::App* compare = app.add_subcommand("compare", "Merge metrics CSVs");
  compare->add_option("csv", csvs, "metrics.csv files")->required();
  compare->add_option("-o,--out", merged_path, "Merged CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  if (run->parsed()) {
    return guarded([&] {
      Json resolved = flecs::cli::resolve_config(prepare(config_path, sets));
      flecs::cli::run_experiment(resolved, run_dir(out_dir, resolved), resume);
      return kOk;
    });
  }
  if (sweep->parsed()) {
    return guarded([&] {
      Json base = prepare(config_path, sets);
      std::vector<std::pair<std::string, std::vector<Json>>> grid;
      for (const std::string& p : params) {
        grid.push_back(flecs::cli::parse_sweep_param(p));
      }
      const fs::path root = run_dir(out_dir, flecs::cli::resolve_config(base));
      std::vector<flecs::cli::SweepPoint> points =
          flecs::cli::expand_sweep(base, grid);
      // Validate the whole grid before running anything.
      std::vector<Json> resolved;
      for (const auto& p : points) {
        resolved.push_back(flecs::cli::resolve_config(p.config));
        flecs::cli::to_experiment(resolved.back());
      }
      for (std::size_t i = 0; i < points.size(); ++i) {
        flecs::cli::run_experiment(resolved[i], root / points[i].label, resume);
      }
      return kOk;
    });
  }
  return guarded([&] {
    std::vector<std::string> labels;
    std::vector<std::vector<flecs::IterationRecord>> runs;
    for (const std::string& path : csvs) {
      std::ifstream in(path);
      if (!in) throw flecs::cli::DatasetError("cannot open '" + path + "'");
      runs.push_back(flecs::read_metrics_csv(in));
      std::string label = flecs::cli::run_label(path);
      std::string unique = label;
      for (int n = 2; std::find(labels.begin(), labels.end(), unique) !=
                      labels.end();
           ++n) {
        unique = label + "#" + std::to_string(n);
      }
      labels.push_back(unique);
    }
    if (merged_path.empty()) {
      flecs::cli::write_comparison(std::cout, labels, runs);
    } else {
      std::ofstream out(merged_path, std::ios::binary | std::ios::trunc);
      flecs::cli::write_comparison(out, labels, runs);
      if (!out) throw std::runtime_error("cannot write '" + merged_path + "'");
    }
    return kOk;
  });
}
