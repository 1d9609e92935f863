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

// Checkpoint file layout (version 1), all integers u64 and all reals IEEE
// binary64, little-endian:
//
//   magic "FLECSCKP" (8 bytes)
//   version u32, reserved u32 (0)
//   d, n, m, k, converged (0/1)
//   uplink_bits, downlink_bits, hvp, wall_ms (f64)
//   fingerprint length, fingerprint bytes
//   w[d]
//   n blocks of d*d column-major B_i (absent for gradient descent)
//   record count, then per record:
//     iter, loss (f64), grad_norm_sq (f64), uplink, downlink, hvp,
//     wall_ms (f64)

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "flecs/federation.h"

namespace flecs {
namespace {

constexpr std::array<char, 8> kMagic = {'F', 'L', 'E', 'C', 'S', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::string& path)
      : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  }

  void bytes(const char* data, std::size_t len) { out_.write(data, len); }
  void u32(std::uint32_t v) {
    std::array<char, 4> b;
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    bytes(b.data(), b.size());
  }
  void u64(std::uint64_t v) {
    std::array<char, 8> b;
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    bytes(b.data(), b.size());
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void reals(const double* data, Index count) {
    for (Index i = 0; i < count; ++i) f64(data[i]);
  }
  void finish() {
    out_.flush();
    if (!out_) throw std::runtime_error("checkpoint write failed");
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("cannot read checkpoint '" + path + "'");
  }

  void bytes(char* data, std::size_t len) {
    in_.read(data, static_cast<std::streamsize>(len));
    if (in_.gcount() != static_cast<std::streamsize>(len)) {
      throw ParseError("checkpoint is truncated");
    }
  }
  std::uint32_t u32() {
    std::array<unsigned char, 4> b;
    bytes(reinterpret_cast<char*>(b.data()), b.size());
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::uint64_t u64() {
    std::array<unsigned char, 8> b;
    bytes(reinterpret_cast<char*>(b.data()), b.size());
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  void reals(double* data, Index count) {
    for (Index i = 0; i < count; ++i) data[i] = f64();
  }

 private:
  std::ifstream in_;
};

}  // namespace

void Simulator::save_checkpoint(const std::string& path) const {
  const Index d = objective_.dim();
  // Write to a side file first so an interrupted save never clobbers the
  // previous checkpoint.
  const std::string tmp = path + ".tmp";
  {
    Writer w(tmp);
    w.bytes(kMagic.data(), kMagic.size());
    w.u32(kVersion);
    w.u32(0);
    w.u64(static_cast<std::uint64_t>(d));
    w.u64(objective_.num_workers());
    w.u64(static_cast<std::uint64_t>(config_.sketch.m));
    w.u64(state_.k);
    w.u64(state_.converged ? 1 : 0);
    w.u64(state_.counters.uplink_bits);
    w.u64(state_.counters.downlink_bits);
    w.u64(state_.counters.hvp);
    w.f64(state_.counters.wall_ms);
    w.u64(fingerprint_.size());
    w.bytes(fingerprint_.data(), fingerprint_.size());
    w.reals(state_.w.data(), d);
    for (const WorkerHessianState& h : state_.hessians) {
      w.reals(h.b.data(), d * d);
    }
    w.u64(metrics_.records.size());
    for (const IterationRecord& r : metrics_.records) {
      w.u64(r.iter);
      w.f64(r.loss);
      w.f64(r.grad_norm_sq);
      w.u64(r.uplink_bits_cum);
      w.u64(r.downlink_bits_cum);
      w.u64(r.hvp_cum);
      w.f64(r.wall_ms);
    }
    w.finish();
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("cannot move checkpoint into place at '" + path +
                             "'");
  }
}

void Simulator::restore_checkpoint(const std::string& path) {
  Reader r(path);
  std::array<char, 8> magic;
  r.bytes(magic.data(), magic.size());
  if (magic != kMagic) throw ParseError("not a checkpoint file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw ParseError("unsupported checkpoint version " +
                     std::to_string(version));
  }
  r.u32();
  const Index d = objective_.dim();
  const std::uint64_t file_d = r.u64();
  const std::uint64_t file_n = r.u64();
  const std::uint64_t file_m = r.u64();
  if (file_d != static_cast<std::uint64_t>(d) ||
      file_n != objective_.num_workers() ||
      file_m != static_cast<std::uint64_t>(config_.sketch.m)) {
    throw ConfigError("checkpoint dimensions do not match this run");
  }
  RunState state;
  state.k = r.u64();
  state.converged = r.u64() != 0;
  state.counters.uplink_bits = r.u64();
  state.counters.downlink_bits = r.u64();
  state.counters.hvp = r.u64();
  state.counters.wall_ms = r.f64();
  const std::uint64_t fp_len = r.u64();
  if (fp_len > (std::uint64_t{1} << 26)) {
    throw ParseError("checkpoint fingerprint is implausibly long");
  }
  std::string fingerprint(fp_len, '\0');
  r.bytes(fingerprint.data(), fingerprint.size());
  if (fingerprint != fingerprint_) {
    throw ConfigError("checkpoint was written by a different configuration");
  }
  state.w.resize(d);
  r.reals(state.w.data(), d);
  state.hessians.resize(state_.hessians.size());
  for (std::size_t i = 0; i < state.hessians.size(); ++i) {
    state.hessians[i].worker_id = i;
    state.hessians[i].b.resize(d, d);
    r.reals(state.hessians[i].b.data(), d * d);
  }
  RunMetrics metrics;
  const std::uint64_t count = r.u64();
  if (count > state.k + 1) throw ParseError("checkpoint record count is corrupt");
  for (std::uint64_t i = 0; i < count; ++i) {
    IterationRecord rec;
    rec.iter = r.u64();
    rec.loss = r.f64();
    rec.grad_norm_sq = r.f64();
    rec.uplink_bits_cum = r.u64();
    rec.downlink_bits_cum = r.u64();
    rec.hvp_cum = r.u64();
    rec.wall_ms = r.f64();
    metrics.records.push_back(rec);
  }
  metrics.converged = state.converged;
  metrics.final_w = state.w;
  state_ = std::move(state);
  metrics_ = std::move(metrics);
}

}  // namespace flecs
