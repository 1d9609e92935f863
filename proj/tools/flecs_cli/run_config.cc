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

#include "run_config.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace flecs::cli {
namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

bool same_kind(const Json& def, const Json& val) {
  if (def.is_null()) return true;
  if (def.is_number()) return val.is_number();
  return def.type() == val.type();
}

void overlay(Json& base, const Json& user, const std::string& prefix) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string field = join(prefix, it.key());
    if (!base.contains(it.key())) {
      throw ConfigError("unknown config field '" + field + "'");
    }
    Json& slot = base[it.key()];
    if (slot.is_object()) {
      if (!it.value().is_object()) {
        throw ConfigError("config field '" + field + "' must be an object");
      }
      overlay(slot, it.value(), field);
    } else if (field == "compressor.k") {
      if (!it.value().is_number() && !it.value().is_string()) {
        throw ConfigError("config field 'compressor.k' must be a count or "
                          "a multiple of d such as \"4d\"");
      }
      slot = it.value();
    } else if (!same_kind(slot, it.value())) {
      throw ConfigError("config field '" + field + "' must be a " +
                        std::string(slot.type_name()) + ", got " +
                        it.value().type_name());
    } else {
      slot = it.value();
    }
  }
}

template <typename T>
T count_field(const Json& v, const char* field) {
  if (!v.is_number_integer()) {
    throw ConfigError(std::string("config field '") + field +
                      "' must be a whole number");
  }
  if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
    throw ConfigError(std::string("config field '") + field +
                      "' must be non-negative");
  }
  return static_cast<T>(v.get<std::uint64_t>());
}

template <typename Fn>
auto parse_enum(const Json& j, const char* field, Fn fn) {
  try {
    return fn(j.get<std::string>());
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config field '") + field + "': " +
                      e.what());
  }
}

}  // namespace

Json default_config() {
  return Json{
      {"name", "flecs"},
      {"algorithm", "flecs"},
      {"data",
       {{"source", "adult_like"},
        {"path", ""},
        {"rows", 0},
        {"features", kAdultFeatures},
        {"seed", 20260101},
        {"quadratic", {{"d", 50}, {"mu", 1e-2}, {"L", 1.0}, {"seed", 0}}}}},
      {"workers", 20},
      {"partition", {{"mode", "contiguous"}, {"seed", 0}}},
      {"objective", {{"kind", "logreg_l2"}, {"mu", 1e-5}}},
      {"sketch", {{"family", "gaussian"}, {"m", 16}}},
      {"compressor", {{"kind", "top_k"}, {"k", "4d"}, {"s", 128}}},
      {"hessian", {{"rule", "lsr1"}, {"beta", 1.0}, {"init", "local_hessian"}}},
      {"direction", {{"rule", "trunc_inv"}, {"rho", 1e-8}}},
      {"omega", 1e-3},
      {"big_omega", 1e8},
      {"step_size", 1.0},
      {"max_iterations", 500},
      {"tol", 1e-12},
      {"seed", 0},
      {"initial_point", nullptr},
      {"limits",
       {{"dense_direction_cap", kDefaultDenseDirectionCap},
        {"dense_hessian_cap", kDefaultDenseHessianCap},
        {"server_memory_bytes", std::uint64_t{8} << 30}}},
      {"checkpoint", {{"every", 0}}},
      {"output", {{"wall_time", false}}},
      {"runtime_budget_sec", 0},
  };
}

Json resolve_config(const Json& user) {
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  Json out = default_config();
  overlay(out, user, "");
  return out;
}

void set_dotted(Json& config, std::string_view key, Json value) {
  if (key.empty()) throw ConfigError("override has an empty key");
  std::string pointer = "/";
  for (char c : key) pointer += c == '.' ? '/' : c;
  try {
    config[Json::json_pointer(pointer)] = std::move(value);
  } catch (const Json::exception& e) {
    throw ConfigError("cannot set '" + std::string(key) + "': " + e.what());
  }
}

void apply_override(Json& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) +
                      "' is not of the form key=value");
  }
  const std::string raw(assignment.substr(eq + 1));
  Json value = Json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = raw;
  set_dotted(config, assignment.substr(0, eq), std::move(value));
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return Json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " +
                      e.what());
  }
}

Experiment to_experiment(const Json& c) {
  Experiment e;
  e.name = c["name"].get<std::string>();
  if (e.name.empty() || e.name.find('/') != std::string::npos) {
    throw ConfigError("config field 'name' must be a non-empty plain name");
  }
  const std::string source = c["data"]["source"].get<std::string>();
  if (source == "libsvm") {
    e.source = DataSource::kLibsvm;
  } else if (source == "adult_like") {
    e.source = DataSource::kAdultLike;
  } else if (source == "quadratic") {
    e.source = DataSource::kQuadratic;
  } else {
    throw ConfigError("config field 'data.source' must be libsvm, adult_like "
                      "or quadratic; got '" + source + "'");
  }
  e.data_path = c["data"]["path"].get<std::string>();
  if (e.source == DataSource::kLibsvm && e.data_path.empty()) {
    throw ConfigError("config field 'data.path' is required for libsvm data");
  }
  e.data_rows = count_field<std::uint64_t>(c["data"]["rows"], "data.rows");
  e.data_features =
      count_field<std::int32_t>(c["data"]["features"], "data.features");
  e.data_seed = count_field<std::uint64_t>(c["data"]["seed"], "data.seed");
  const Json& q = c["data"]["quadratic"];
  e.quad_d = count_field<Index>(q["d"], "data.quadratic.d");
  e.quad_mu = q["mu"].get<double>();
  e.quad_lipschitz = q["L"].get<double>();
  e.quad_seed = count_field<std::uint64_t>(q["seed"], "data.quadratic.seed");

  e.workers = count_field<std::size_t>(c["workers"], "workers");
  if (e.workers == 0) throw ConfigError("config field 'workers' must be >= 1");
  e.partition = parse_enum(c["partition"]["mode"], "partition.mode",
                           parse_partition_mode);
  e.partition_seed =
      count_field<std::uint64_t>(c["partition"]["seed"], "partition.seed");
  e.objective =
      parse_enum(c["objective"]["kind"], "objective.kind", parse_objective_kind);
  e.objective_mu = c["objective"]["mu"].get<double>();
  if (!(e.objective_mu >= 0.0)) {
    throw ConfigError("config field 'objective.mu' must be >= 0");
  }

  FederationConfig& f = e.federation;
  f.algorithm = parse_enum(c["algorithm"], "algorithm", parse_algorithm);
  f.sketch.family =
      parse_enum(c["sketch"]["family"], "sketch.family", parse_sketch_family);
  f.sketch.m = count_field<Index>(c["sketch"]["m"], "sketch.m");
  f.compressor.kind = parse_enum(c["compressor"]["kind"], "compressor.kind",
                                 parse_compressor_kind);
  const Json& k = c["compressor"]["k"];
  if (k.is_string()) {
    const std::string s = k.get<std::string>();
    std::size_t used = 0;
    double mult = 0.0;
    try {
      mult = s == "d" ? 1.0 : std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (s != "d" && (used == 0 || s.substr(used) != "d" || !(mult > 0))) {
      throw ConfigError("config field 'compressor.k' must be a count or a "
                        "positive multiple of d such as \"4d\"; got '" + s +
                        "'");
    }
    e.compressor_k_per_dim = mult;
  } else {
    f.compressor.k = count_field<std::uint64_t>(k, "compressor.k");
  }
  f.compressor.levels =
      count_field<std::uint32_t>(c["compressor"]["s"], "compressor.s");
  f.hessian_rule =
      parse_enum(c["hessian"]["rule"], "hessian.rule", parse_hessian_rule);
  f.beta = c["hessian"]["beta"].get<double>();
  f.hessian_init =
      parse_enum(c["hessian"]["init"], "hessian.init", parse_hessian_init);
  f.direction_rule = parse_enum(c["direction"]["rule"], "direction.rule",
                                parse_direction_rule);
  f.rho = c["direction"]["rho"].get<double>();
  f.omega = c["omega"].get<double>();
  f.big_omega = c["big_omega"].get<double>();
  f.step_size = c["step_size"].get<double>();
  f.max_iterations =
      count_field<std::uint64_t>(c["max_iterations"], "max_iterations");
  f.tol = c["tol"].get<double>();
  f.seed = count_field<std::uint64_t>(c["seed"], "seed");
  if (!c["initial_point"].is_null()) {
    const Json& w0 = c["initial_point"];
    if (!w0.is_array()) {
      throw ConfigError("config field 'initial_point' must be null or an "
                        "array of numbers");
    }
    Vector w(static_cast<Index>(w0.size()));
    for (std::size_t i = 0; i < w0.size(); ++i) {
      if (!w0[i].is_number()) {
        throw ConfigError("config field 'initial_point' must contain only "
                          "numbers");
      }
      w[static_cast<Index>(i)] = w0[i].get<double>();
    }
    f.initial_point = w;
  }
  f.dense_direction_cap = count_field<Index>(
      c["limits"]["dense_direction_cap"], "limits.dense_direction_cap");
  f.dense_hessian_cap = count_field<Index>(c["limits"]["dense_hessian_cap"],
                                           "limits.dense_hessian_cap");
  f.server_memory_budget = count_field<std::uint64_t>(
      c["limits"]["server_memory_bytes"], "limits.server_memory_bytes");
  f.checkpoint_every =
      count_field<std::uint64_t>(c["checkpoint"]["every"], "checkpoint.every");
  e.wall_time = c["output"]["wall_time"].get<bool>();
  e.runtime_budget_sec = c["runtime_budget_sec"].get<double>();
  if (!(e.runtime_budget_sec >= 0.0)) {
    throw ConfigError("config field 'runtime_budget_sec' must be >= 0");
  }
  return e;
}

GlobalObjective build_objective(Experiment& e) {
  Index d = 0;
  auto finalize = [&](Index dim) {
    d = dim;
    if (e.compressor_k_per_dim > 0) {
      e.federation.compressor.k = static_cast<std::uint64_t>(
          std::llround(e.compressor_k_per_dim * static_cast<double>(d)));
    }
  };
  if (e.source == DataSource::kQuadratic) {
    if (e.quad_d < 1) throw ConfigError("config field 'data.quadratic.d' must be >= 1");
    QuadraticProblem q = synthetic_quadratic(e.quad_d, e.quad_mu,
                                             e.quad_lipschitz, e.workers,
                                             e.quad_seed);
    finalize(q.dim());
    return make_quadratic_objective(q);
  }
  SparseDataset data;
  if (e.source == DataSource::kLibsvm) {
    if (!std::filesystem::exists(e.data_path)) {
      throw DatasetError("dataset '" + e.data_path + "' does not exist");
    }
    data = load_libsvm(e.data_path, e.data_features);
    if (e.data_rows > 0 && e.data_rows < data.num_rows()) {
      data = data.head(e.data_rows);
    }
  } else {
    data = adult_like(e.data_rows > 0 ? e.data_rows : kAdultRows, e.data_seed);
  }
  if (e.objective == ObjectiveKind::kQuadratic) {
    throw ConfigError("config field 'objective.kind': quadratic objectives "
                      "come from data.source=quadratic");
  }
  Partition p = partition_rows(data, e.workers, e.partition, e.partition_seed);
  GlobalObjective obj = make_logistic_objective(data, p, e.objective,
                                                e.objective_mu);
  finalize(obj.dim());
  return obj;
}

std::string fingerprint(const Json& resolved) {
  Json j = resolved;
  for (const char* key :
       {"name", "max_iterations", "checkpoint", "output", "runtime_budget_sec"}) {
    j.erase(key);
  }
  return j.dump();
}

}  // namespace flecs::cli
