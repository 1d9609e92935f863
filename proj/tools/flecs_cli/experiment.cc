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

#include "experiment.h"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include <spdlog/spdlog.h>

namespace flecs::cli {
namespace fs = std::filesystem;

fs::path output_root() {
  const char* root = std::getenv("FLECS_OUTPUT_ROOT");
  return root && *root ? fs::path(root) : fs::path("runs");
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

std::string value_label(const Json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

}  // namespace

RunSummary run_experiment(const Json& resolved, const fs::path& dir,
                          bool resume) {
  Experiment e = to_experiment(resolved);
  GlobalObjective objective = build_objective(e);
  fs::create_directories(dir);
  write_file(dir / "resolved_config.json", resolved.dump(2) + "\n");

  const fs::path ckpt = dir / "checkpoint.bin";
  e.federation.checkpoint_path = ckpt.string();
  Simulator sim(objective, e.federation);
  sim.set_config_fingerprint(fingerprint(resolved));

  RunSummary summary;
  summary.dim = objective.dim();
  summary.compressor_k = e.federation.compressor.k;
  if (resume) {
    if (fs::exists(ckpt)) {
      sim.restore_checkpoint(ckpt.string());
      summary.resumed = true;
      spdlog::info("resuming '{}' at iteration {}", e.name, sim.state().k);
    } else {
      spdlog::warn("no checkpoint at {}; starting from scratch", ckpt.string());
    }
  }
  spdlog::info("running '{}': d={}, n={}, algorithm={}", e.name,
               objective.dim(), objective.num_workers(),
               to_string(e.federation.algorithm));
  const auto t0 = std::chrono::steady_clock::now();
  summary.metrics = sim.run();
  summary.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  summary.within_budget =
      e.runtime_budget_sec <= 0.0 || summary.seconds <= e.runtime_budget_sec;
  if (!summary.within_budget) {
    spdlog::warn("'{}' took {:.1f} s, over its budget of {:.1f} s", e.name,
                 summary.seconds, e.runtime_budget_sec);
  }

  {
    std::ofstream out(dir / "metrics.csv", std::ios::binary | std::ios::trunc);
    write_metrics_csv(out, summary.metrics, e.wall_time);
    if (!out) throw std::runtime_error("cannot write metrics.csv");
  }
  const IterationRecord& last = summary.metrics.records.back();
  std::string text;
  text += "name " + e.name + "\n";
  text += "algorithm " + std::string(to_string(e.federation.algorithm)) + "\n";
  text += "dimension " + std::to_string(summary.dim) + "\n";
  text += "workers " + std::to_string(objective.num_workers()) + "\n";
  text += "compressor_k " + std::to_string(summary.compressor_k) + "\n";
  text += "iterations " + std::to_string(summary.metrics.records.size()) + "\n";
  text += "final_iter " + std::to_string(last.iter) + "\n";
  text += "final_loss " + format_double(last.loss) + "\n";
  text += "final_grad_norm_sq " + format_double(last.grad_norm_sq) + "\n";
  text += std::string("converged ") +
          (summary.metrics.converged ? "true" : "false") + "\n";
  text += "uplink_bits_total " + std::to_string(last.uplink_bits_cum) + "\n";
  text += "downlink_bits_total " + std::to_string(last.downlink_bits_cum) + "\n";
  text += "hvp_total " + std::to_string(last.hvp_cum) + "\n";
  text += "wall_seconds " + format_double(summary.seconds) + "\n";
  text += std::string("within_budget ") +
          (summary.within_budget ? "true" : "false") + "\n";
  text += std::string("resumed ") + (summary.resumed ? "true" : "false") + "\n";
  write_file(dir / "summary.txt", text);
  spdlog::info("'{}': {} iterations, final loss {}, |grad|^2 {}", e.name,
               summary.metrics.records.size(), format_double(last.loss),
               format_double(last.grad_norm_sq));
  return summary;
}

std::pair<std::string, std::vector<Json>> parse_sweep_param(
    const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw ConfigError("sweep parameter '" + spec +
                      "' is not of the form key=v1,v2,...");
  }
  std::vector<Json> values;
  std::size_t start = eq + 1;
  while (start <= spec.size()) {
    const auto comma = spec.find(',', start);
    const std::string raw = spec.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (raw.empty()) {
      throw ConfigError("sweep parameter '" + spec + "' has an empty value");
    }
    Json v = Json::parse(raw, nullptr, false);
    values.push_back(v.is_discarded() ? Json(raw) : v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return {spec.substr(0, eq), values};
}

std::vector<SweepPoint> expand_sweep(
    const Json& base,
    const std::vector<std::pair<std::string, std::vector<Json>>>& params) {
  std::vector<SweepPoint> points = {{"", base}};
  for (const auto& [key, values] : params) {
    std::vector<SweepPoint> next;
    for (const SweepPoint& p : points) {
      for (const Json& v : values) {
        SweepPoint q = p;
        set_dotted(q.config, key, v);
        q.label += (q.label.empty() ? "" : ",") + key + "=" + value_label(v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

void write_comparison(std::ostream& out,
                      const std::vector<std::string>& labels,
                      const std::vector<std::vector<IterationRecord>>& runs) {
  out << "iter";
  for (const std::string& l : labels) {
    for (const char* col : {"loss", "grad_norm_sq", "uplink_bits_cum",
                            "downlink_bits_cum", "hvp_cum"}) {
      out << ',' << l << '.' << col;
    }
  }
  out << '\n';
  std::uint64_t max_iter = 0;
  bool any = false;
  for (const auto& r : runs) {
    for (const IterationRecord& rec : r) {
      max_iter = std::max(max_iter, rec.iter);
      any = true;
    }
  }
  if (!any) return;
  std::vector<std::size_t> cursor(runs.size(), 0);
  for (std::uint64_t it = 0; it <= max_iter; ++it) {
    std::string row = std::to_string(it);
    bool present = false;
    for (std::size_t j = 0; j < runs.size(); ++j) {
      const auto& r = runs[j];
      while (cursor[j] < r.size() && r[cursor[j]].iter < it) ++cursor[j];
      if (cursor[j] < r.size() && r[cursor[j]].iter == it) {
        const IterationRecord& rec = r[cursor[j]];
        row += ',' + format_double(rec.loss) + ',' +
               format_double(rec.grad_norm_sq) + ',' +
               std::to_string(rec.uplink_bits_cum) + ',' +
               std::to_string(rec.downlink_bits_cum) + ',' +
               std::to_string(rec.hvp_cum);
        present = true;
      } else {
        row += ",,,,,";
      }
    }
    if (present) out << row << '\n';
  }
}

std::string run_label(const fs::path& csv) {
  if (csv.filename() == "metrics.csv" && csv.has_parent_path() &&
      !csv.parent_path().filename().empty()) {
    return csv.parent_path().filename().string();
  }
  return csv.stem().string();
}

}  // namespace flecs::cli
