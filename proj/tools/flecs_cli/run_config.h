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

#ifndef FLECS_CLI_RUN_CONFIG_H_
#define FLECS_CLI_RUN_CONFIG_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "flecs/dataset.h"
#include "flecs/federation.h"
#include "flecs/objective.h"

namespace flecs::cli {

using Json = nlohmann::json;

// The dataset named by the config cannot be opened.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every recognized key with its default value. A bare `{}` config resolves
// to the full defaults (m=16, mu=1e-5, omega=1e-3, Omega=1e8, alpha=1,
// beta=1, Top-K with k=4d, B_0 = local Hessian at w_0).
Json default_config();

// Overlays `user` on the defaults. Unknown keys and type mismatches throw
// ConfigError naming the dotted field.
Json resolve_config(const Json& user);

// Applies "dotted.key=value". The value is read as JSON when it parses
// (numbers, booleans, quoted strings, arrays) and as a bare string otherwise.
void apply_override(Json& config, std::string_view assignment);
void set_dotted(Json& config, std::string_view key, Json value);

// Reads a JSON config file. Throws ConfigError on I/O or syntax problems.
Json load_config_file(const std::string& path);

enum class DataSource { kLibsvm, kAdultLike, kQuadratic };

struct Experiment {
  std::string name;
  DataSource source = DataSource::kAdultLike;
  std::string data_path;
  std::uint64_t data_rows = 0;  // 0: every row (surrogate: Adult size)
  std::int32_t data_features = kAdultFeatures;
  std::uint64_t data_seed = 0;
  Index quad_d = 50;
  double quad_mu = 1e-2;
  double quad_lipschitz = 1.0;
  std::uint64_t quad_seed = 0;
  std::size_t workers = 20;
  PartitionMode partition = PartitionMode::kContiguous;
  std::uint64_t partition_seed = 0;
  ObjectiveKind objective = ObjectiveKind::kLogregL2;
  double objective_mu = 1e-5;
  // compressor.k written as "<c>d" means c * d; resolved once d is known.
  double compressor_k_per_dim = 0.0;
  bool wall_time = false;
  double runtime_budget_sec = 0.0;  // 0 means none
  FederationConfig federation;
};

// Converts a resolved config into typed settings. Throws ConfigError with
// the offending field on bad values.
Experiment to_experiment(const Json& resolved);

// Builds the objective (loading or synthesizing data) and finalizes the
// dimension-dependent settings in `experiment`. Throws DatasetError when a
// LIBSVM file is missing, ConfigError for invalid settings.
GlobalObjective build_objective(Experiment& experiment);

// Text stored in checkpoints: the resolved config without the keys that may
// legitimately differ between an interrupted run and its resumption.
std::string fingerprint(const Json& resolved);

}  // namespace flecs::cli

#endif  // FLECS_CLI_RUN_CONFIG_H_
