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

#ifndef FLECS_FEDERATION_H_
#define FLECS_FEDERATION_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flecs/common.h"
#include "flecs/compress.h"
#include "flecs/direction.h"
#include "flecs/hessian_learn.h"
#include "flecs/metrics.h"
#include "flecs/objective.h"
#include "flecs/sketch.h"

namespace flecs {

enum class Algorithm { kFlecs, kGradientDescent, kFedNlLite };
enum class HessianInit { kZero, kLocalHessian };

Algorithm parse_algorithm(std::string_view name);
std::string_view to_string(Algorithm algorithm);
HessianInit parse_hessian_init(std::string_view name);
std::string_view to_string(HessianInit init);

// Algorithmic settings of one simulated run.
struct FederationConfig {
  Algorithm algorithm = Algorithm::kFlecs;
  SketchSpec sketch;  // sketch.run_seed is overwritten by `seed`
  CompressorSpec compressor;
  HessianRule hessian_rule = HessianRule::kLsr1;
  double beta = 1.0;
  HessianInit hessian_init = HessianInit::kLocalHessian;
  DirectionRule direction_rule = DirectionRule::kTruncatedInverse;
  double omega = 1e-3;
  double big_omega = 1e8;
  double rho = 1e-8;  // FedSONIA complement scaling, clamped per iteration
  double step_size = 1.0;
  std::uint64_t max_iterations = 500;
  double tol = 1e-12;  // stop when |grad F|^2 <= tol
  std::uint64_t seed = 0;
  std::optional<Vector> initial_point;  // zero when absent

  Index dense_direction_cap = kDefaultDenseDirectionCap;
  Index dense_hessian_cap = kDefaultDenseHessianCap;
  std::uint64_t server_memory_budget = std::uint64_t{8} << 30;  // bytes

  std::uint64_t checkpoint_every = 0;  // 0 disables checkpointing
  std::string checkpoint_path;

  // Throws ConfigError describing the first offending field.
  void validate(Index d, std::size_t n) const;
};

// Server -> worker i at iteration k. Sent uncompressed.
struct DownlinkMessage {
  Vector w;
  Matrix bs;  // B_k^i S_k (empty for the baselines)
  std::uint64_t bit_cost = 0;
};

// Worker i -> server at iteration k.
struct UplinkMessage {
  Vector grad;
  Matrix m;               // S' hess(f_i) S, symmetrized; m(m+1)/2 sent
  CompressedBlock residual;  // C(Y - B S), or C(hess - B) for FedNL-lite
  std::uint64_t bit_cost = 0;
};

std::uint64_t downlink_bits(Index d, Index m);
std::uint64_t uplink_bits(Index d, Index m, const CompressedBlock& residual);

// The worker side of one iteration. It sees its local objective, the
// iterate, the shared sketch and its own B_i S product, never B_i itself.
UplinkMessage worker_step(const LocalObjective& f, const Vector& w,
                          const Matrix& sketch, const Matrix& bs,
                          const CompressorSpec& compressor, Rng& rng,
                          std::uint64_t* hvp_counter);

struct Counters {
  std::uint64_t uplink_bits = 0;
  std::uint64_t downlink_bits = 0;
  std::uint64_t hvp = 0;
  double wall_ms = 0.0;
};

struct RunState {
  std::uint64_t k = 0;
  Vector w;
  std::vector<WorkerHessianState> hessians;
  Counters counters;
  bool converged = false;
};

// What the server did with one round of uplinks.
struct ServerStepResult {
  Vector grad;
  Matrix y_tilde_agg;
  Matrix m_agg;
  Matrix b_agg;
  DirectionResult direction;
  std::vector<double> residual_norms;
  std::size_t skipped_updates = 0;
  bool direction_failed = false;
};

// Reconstructs every Y~_i, updates every B_i, averages, computes p_k and
// sets w <- w + alpha p. Advances state.k.
ServerStepResult server_step(RunState& state,
                             std::span<const UplinkMessage> uplinks,
                             const Matrix& sketch,
                             const FederationConfig& config);

// Everything exchanged in one iteration, for transcript checks.
struct IterationTrace {
  std::uint64_t k = 0;
  Matrix sketch;
  std::vector<DownlinkMessage> downlinks;
  std::vector<UplinkMessage> uplinks;
  std::vector<Matrix> hessians;  // B_{k+1}^i after the update
  Vector grad;
  Vector p;
  Vector w_next;
};

// Deterministic in-process simulation of the federation. Workers run
// sequentially by index.
class Simulator {
 public:
  using Observer = std::function<void(const IterationTrace&)>;

  Simulator(const GlobalObjective& objective, FederationConfig config);

  // Runs until convergence or max_iterations; returns the full series
  // (including rows restored from a checkpoint).
  RunMetrics run();

  // One iteration. Returns false once the run has stopped.
  bool step();

  void set_observer(Observer observer) { observer_ = std::move(observer); }
  // Opaque text stored in checkpoints and verified on restore.
  void set_config_fingerprint(std::string fingerprint) {
    fingerprint_ = std::move(fingerprint);
  }

  const RunState& state() const { return state_; }
  const RunMetrics& metrics() const { return metrics_; }
  const FederationConfig& config() const { return config_; }

  void save_checkpoint(const std::string& path) const;
  void restore_checkpoint(const std::string& path);

 private:
  void initialize();
  bool stopped() const;
  void record(std::uint64_t iter, double loss, double grad_norm_sq);
  void step_flecs();
  void step_gradient_descent();
  void step_fednl_lite();

  const GlobalObjective& objective_;
  FederationConfig config_;
  RunState state_;
  RunMetrics metrics_;
  Observer observer_;
  std::string fingerprint_;
};

// (1/n) sum_i |B_i - hess f_i(w_ref)|_F, compared against 2 mu^2 / L^2 in
// the local convergence analysis.
double hessian_drift(const RunState& state, const GlobalObjective& objective,
                     const Vector& w_ref);

}  // namespace flecs

#endif  // FLECS_FEDERATION_H_
