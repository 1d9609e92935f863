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

#ifndef FLECS_METRICS_H_
#define FLECS_METRICS_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "flecs/common.h"

namespace flecs {

// One row of the per-iteration metrics: the state at w_k before the update,
// with communication and work counters accumulated through iteration k.
struct IterationRecord {
  std::uint64_t iter = 0;
  double loss = 0.0;
  double grad_norm_sq = 0.0;
  std::uint64_t uplink_bits_cum = 0;
  std::uint64_t downlink_bits_cum = 0;
  std::uint64_t hvp_cum = 0;
  double wall_ms = 0.0;

  bool operator==(const IterationRecord&) const = default;
};

struct RunMetrics {
  std::vector<IterationRecord> records;
  bool converged = false;
  Vector final_w;
};

inline constexpr const char* kMetricsHeader =
    "iter,loss,grad_norm_sq,uplink_bits_cum,downlink_bits_cum,hvp_cum,wall_ms";

// Writes the metrics CSV. Floating values use shortest round-trip
// formatting; wall_ms is written as 0 unless include_wall_time is set so
// that repeated runs produce byte-identical files.
void write_metrics_csv(std::ostream& out, const RunMetrics& metrics,
                       bool include_wall_time);

// Parses a metrics CSV written by write_metrics_csv. Throws ParseError.
std::vector<IterationRecord> read_metrics_csv(std::istream& in);

// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

}  // namespace flecs

#endif  // FLECS_METRICS_H_
