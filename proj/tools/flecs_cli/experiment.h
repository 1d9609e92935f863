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

#ifndef FLECS_CLI_EXPERIMENT_H_
#define FLECS_CLI_EXPERIMENT_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "flecs/metrics.h"
#include "run_config.h"

namespace flecs::cli {

// FLECS_OUTPUT_ROOT when set, otherwise ./runs.
std::filesystem::path output_root();

struct RunSummary {
  RunMetrics metrics;
  Index dim = 0;
  std::uint64_t compressor_k = 0;
  double seconds = 0.0;
  bool resumed = false;
  bool within_budget = true;
};

// Runs one resolved config and writes metrics.csv, summary.txt and
// resolved_config.json into `dir`. With `resume`, continues from
// dir/checkpoint.bin when it exists.
RunSummary run_experiment(const Json& resolved, const std::filesystem::path& dir,
                          bool resume);

// "key=v1,v2,..." -> (key, values).
std::pair<std::string, std::vector<Json>> parse_sweep_param(
    const std::string& spec);

struct SweepPoint {
  std::string label;  // e.g. "sketch.m=4" or "sketch.m=4,seed=1"
  Json config;
};

// Cartesian grid over the parameters, first parameter varying slowest.
std::vector<SweepPoint> expand_sweep(
    const Json& base,
    const std::vector<std::pair<std::string, std::vector<Json>>>& params);

// Outer join of metrics CSVs on the iteration index. Each run contributes
// <label>.loss, .grad_norm_sq, .uplink_bits_cum, .downlink_bits_cum and
// .hvp_cum columns; runs shorter than the longest leave empty cells.
void write_comparison(std::ostream& out,
                      const std::vector<std::string>& labels,
                      const std::vector<std::vector<IterationRecord>>& runs);

// Label for a metrics file: its directory name for ".../<run>/metrics.csv",
// otherwise the file stem.
std::string run_label(const std::filesystem::path& csv);

}  // namespace flecs::cli

#endif  // FLECS_CLI_EXPERIMENT_H_
