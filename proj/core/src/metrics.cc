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

#include "flecs/metrics.h"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace flecs {
namespace {

template <typename T>
T parse_field(const std::string& tok, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
    throw ParseError("metrics line " + std::to_string(line_no) +
                         ": bad field '" + tok + "'",
                     line_no);
  }
  return value;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void write_metrics_csv(std::ostream& out, const RunMetrics& metrics,
                       bool include_wall_time) {
  out << kMetricsHeader << '\n';
  for (const IterationRecord& r : metrics.records) {
    out << r.iter << ',' << format_double(r.loss) << ','
        << format_double(r.grad_norm_sq) << ',' << r.uplink_bits_cum << ','
        << r.downlink_bits_cum << ',' << r.hvp_cum << ','
        << format_double(include_wall_time ? r.wall_ms : 0.0) << '\n';
  }
}

std::vector<IterationRecord> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("metrics CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader) {
    throw ParseError("metrics CSV has an unexpected header", 1);
  }
  std::vector<IterationRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) fields.push_back(tok);
    if (fields.size() != 7) {
      throw ParseError("metrics line " + std::to_string(line_no) +
                           ": expected 7 fields",
                       line_no);
    }
    IterationRecord r;
    r.iter = parse_field<std::uint64_t>(fields[0], line_no);
    r.loss = parse_field<double>(fields[1], line_no);
    r.grad_norm_sq = parse_field<double>(fields[2], line_no);
    r.uplink_bits_cum = parse_field<std::uint64_t>(fields[3], line_no);
    r.downlink_bits_cum = parse_field<std::uint64_t>(fields[4], line_no);
    r.hvp_cum = parse_field<std::uint64_t>(fields[5], line_no);
    r.wall_ms = parse_field<double>(fields[6], line_no);
    records.push_back(r);
  }
  return records;
}

}  // namespace flecs
