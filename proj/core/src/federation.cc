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

#include "flecs/federation.h"

#include <chrono>
#include <cmath>
#include <string>

#include <spdlog/spdlog.h>

#include "flecs/numerics.h"

namespace flecs {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

Algorithm parse_algorithm(std::string_view name) {
  if (name == "flecs" || name == "none") return Algorithm::kFlecs;
  if (name == "gd") return Algorithm::kGradientDescent;
  if (name == "fednl_lite") return Algorithm::kFedNlLite;
  throw ConfigError("unknown algorithm/baseline '" + std::string(name) + "'");
}

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kFlecs:
      return "flecs";
    case Algorithm::kGradientDescent:
      return "gd";
    case Algorithm::kFedNlLite:
      return "fednl_lite";
  }
  return "?";
}

HessianInit parse_hessian_init(std::string_view name) {
  if (name == "zero") return HessianInit::kZero;
  if (name == "local_hessian") return HessianInit::kLocalHessian;
  throw ConfigError("unknown hessian init '" + std::string(name) + "'");
}

std::string_view to_string(HessianInit init) {
  return init == HessianInit::kZero ? "zero" : "local_hessian";
}

void FederationConfig::validate(Index d, std::size_t n) const {
  if (d <= 0) throw ConfigError("problem dimension must be positive");
  if (n == 0) throw ConfigError("workers: need at least one worker");
  check_truncation(omega, big_omega);
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw ConfigError("hessian.beta must be in (0, 1]");
  }
  if (!positive_finite(step_size)) {
    throw ConfigError("step_size must be a positive finite number");
  }
  if (!(tol >= 0.0)) throw ConfigError("tol must be >= 0");
  if (max_iterations == 0) throw ConfigError("max_iterations must be >= 1");
  if (!positive_finite(rho)) throw ConfigError("direction.rho must be > 0");
  if (initial_point && initial_point->size() != d) {
    throw ConfigError("initial_point has the wrong dimension");
  }
  if ((compressor.kind == CompressorKind::kTopK ||
       compressor.kind == CompressorKind::kRandK) &&
      compressor.k < 1) {
    throw ConfigError("compressor.k must be >= 1");
  }
  if (compressor.kind == CompressorKind::kDither && compressor.levels < 1) {
    throw ConfigError("compressor.s must be >= 1");
  }
  if (algorithm == Algorithm::kGradientDescent) return;

  const auto dd = static_cast<std::uint64_t>(d);
  const std::uint64_t server_bytes = n * dd * dd * sizeof(double);
  if (server_bytes > server_memory_budget) {
    throw ConfigError(
        "per-worker dense Hessian approximations need " +
        std::to_string(server_bytes) + " bytes, over the server budget of " +
        std::to_string(server_memory_budget));
  }
  if (algorithm == Algorithm::kFedNlLite) {
    if (d > dense_hessian_cap) {
      throw ConfigError("fednl_lite needs dense local Hessians; d exceeds "
                        "the dense Hessian cap");
    }
    return;
  }
  if (sketch.m < 1 || sketch.m > d) {
    throw ConfigError("sketch.m must be in [1, d]; got " +
                      std::to_string(sketch.m) + " with d=" +
                      std::to_string(d));
  }
  if (direction_rule != DirectionRule::kFedSonia && d > dense_direction_cap) {
    throw ConfigError("direction rule '" +
                      std::string(to_string(direction_rule)) +
                      "' is O(d^3); d exceeds the cap, use fedsonia");
  }
  if (hessian_init == HessianInit::kLocalHessian && d > dense_hessian_cap) {
    throw ConfigError("hessian.init=local_hessian exceeds the dense cap");
  }
}

std::uint64_t downlink_bits(Index d, Index m) {
  return kFloatBits * static_cast<std::uint64_t>(d + d * m);
}

std::uint64_t uplink_bits(Index d, Index m, const CompressedBlock& residual) {
  const auto mm = static_cast<std::uint64_t>(m);
  return kFloatBits * static_cast<std::uint64_t>(d) +
         kFloatBits * mm * (mm + 1) / 2 + residual.bit_cost;
}

UplinkMessage worker_step(const LocalObjective& f, const Vector& w,
                          const Matrix& sketch, const Matrix& bs,
                          const CompressorSpec& compressor, Rng& rng,
                          std::uint64_t* hvp_counter) {
  if (bs.rows() != sketch.rows() || bs.cols() != sketch.cols()) {
    throw NumericError("worker_step: B S and S shapes disagree");
  }
  UplinkMessage msg;
  Matrix y = f.hessian_sketch(w, sketch, hvp_counter);
  msg.m = symmetrize(sketch.transpose() * y);
  msg.residual = compress(compressor, y - bs, rng);
  msg.grad = f.gradient(w);
  msg.bit_cost = uplink_bits(f.dim(), sketch.cols(), msg.residual);
  return msg;
}

ServerStepResult server_step(RunState& state,
                             std::span<const UplinkMessage> uplinks,
                             const Matrix& sketch,
                             const FederationConfig& config) {
  const std::size_t n = uplinks.size();
  if (n == 0 || n != state.hessians.size()) {
    throw NumericError("server_step: expected one uplink per worker");
  }
  const Index d = state.w.size();
  const Index m = sketch.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  ServerStepResult out;
  out.grad = Vector::Zero(d);
  out.y_tilde_agg = Matrix::Zero(d, m);
  out.m_agg = Matrix::Zero(m, m);
  out.residual_norms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const UplinkMessage& up = uplinks[i];
    Matrix& b = state.hessians[i].b;
    ReconstructedSketch rec = reconstruct(up.residual, up.m, b, sketch);
    UpdateOutcome outcome =
        config.hessian_rule == HessianRule::kLsr1
            ? update_lsr1_truncated(b, rec.y_tilde, rec.m, sketch,
                                    config.omega)
            : update_direct(b, rec.y_tilde, rec.m, config.beta);
    if (outcome.skipped) ++out.skipped_updates;
    b = std::move(outcome.b);
    out.grad += up.grad;
    out.y_tilde_agg += rec.y_tilde;
    out.m_agg += rec.m;
    out.residual_norms.push_back(block_frobenius_norm(up.residual));
  }
  out.grad *= inv_n;
  out.y_tilde_agg *= inv_n;
  out.m_agg *= inv_n;

  if (config.direction_rule != DirectionRule::kFedSonia) {
    out.b_agg = Matrix::Zero(d, d);
    for (const WorkerHessianState& h : state.hessians) out.b_agg += h.b;
    out.b_agg *= inv_n;
  }

  try {
    switch (config.direction_rule) {
      case DirectionRule::kTruncatedInverse:
        out.direction = direction_truncated_inverse(
            out.b_agg, out.grad, config.omega, config.big_omega);
        break;
      case DirectionRule::kFedSonia:
        out.direction =
            direction_fedsonia(out.y_tilde_agg, out.m_agg, out.grad,
                               config.omega, config.big_omega, config.rho);
        break;
      case DirectionRule::kRegularized: {
        Matrix shifted =
            update_regularized_identity(out.b_agg, out.residual_norms);
        out.direction = direction_regularized(shifted, out.grad, 0.0);
        break;
      }
    }
    if (!out.direction.p.allFinite()) {
      throw NumericError("search direction is not finite");
    }
  } catch (const NumericError& e) {
    spdlog::warn("iteration {}: direction failed ({}); taking a gradient step",
                 state.k, e.what());
    out.direction = DirectionResult{};
    out.direction.p = -out.grad;
    out.direction.fallback = true;
    out.direction_failed = true;
  }

  state.w += config.step_size * out.direction.p;
  ++state.k;
  return out;
}

Simulator::Simulator(const GlobalObjective& objective, FederationConfig config)
    : objective_(objective), config_(std::move(config)) {
  config_.sketch.run_seed = config_.seed;
  config_.validate(objective_.dim(), objective_.num_workers());
  initialize();
}

void Simulator::initialize() {
  const Index d = objective_.dim();
  state_ = RunState{};
  state_.w = config_.initial_point.value_or(Vector::Zero(d));
  metrics_ = RunMetrics{};
  if (config_.algorithm == Algorithm::kGradientDescent) return;
  state_.hessians.resize(objective_.num_workers());
  for (std::size_t i = 0; i < objective_.num_workers(); ++i) {
    state_.hessians[i].worker_id = i;
    // Initialization cost is not charged to the HVP counter.
    state_.hessians[i].b =
        config_.hessian_init == HessianInit::kLocalHessian
            ? objective_.local(i).hessian_dense(state_.w,
                                                config_.dense_hessian_cap)
            : Matrix::Zero(d, d);
  }
}

bool Simulator::stopped() const {
  return state_.converged || state_.k >= config_.max_iterations;
}

void Simulator::record(std::uint64_t iter, double loss, double grad_norm_sq) {
  IterationRecord r;
  r.iter = iter;
  r.loss = loss;
  r.grad_norm_sq = grad_norm_sq;
  r.uplink_bits_cum = state_.counters.uplink_bits;
  r.downlink_bits_cum = state_.counters.downlink_bits;
  r.hvp_cum = state_.counters.hvp;
  r.wall_ms = state_.counters.wall_ms;
  metrics_.records.push_back(r);
  metrics_.converged = state_.converged;
  metrics_.final_w = state_.w;
}

bool Simulator::step() {
  if (stopped()) return false;
  switch (config_.algorithm) {
    case Algorithm::kFlecs:
      step_flecs();
      break;
    case Algorithm::kGradientDescent:
      step_gradient_descent();
      break;
    case Algorithm::kFedNlLite:
      step_fednl_lite();
      break;
  }
  if (config_.checkpoint_every > 0 && !config_.checkpoint_path.empty() &&
      (state_.k % config_.checkpoint_every == 0 || stopped())) {
    save_checkpoint(config_.checkpoint_path);
  }
  return !stopped();
}

RunMetrics Simulator::run() {
  while (step()) {
  }
  metrics_.converged = state_.converged;
  metrics_.final_w = state_.w;
  return metrics_;
}

void Simulator::step_flecs() {
  const auto start = Clock::now();
  const std::uint64_t k = state_.k;
  const Index d = objective_.dim();
  const Index m = config_.sketch.m;
  const std::size_t n = objective_.num_workers();

  Matrix sketch = shared_sketch(config_.sketch, k, d);
  IterationTrace trace;
  std::vector<UplinkMessage> uplinks;
  uplinks.reserve(n);
  Vector grad = Vector::Zero(d);
  for (std::size_t i = 0; i < n; ++i) {
    DownlinkMessage down{state_.w, state_.hessians[i].b * sketch,
                         downlink_bits(d, m)};
    state_.counters.downlink_bits += down.bit_cost;
    Rng rng = compression_stream(config_.seed, k, i);
    UplinkMessage up =
        worker_step(objective_.local(i), down.w, sketch, down.bs,
                    config_.compressor, rng, &state_.counters.hvp);
    state_.counters.uplink_bits += up.bit_cost;
    grad += up.grad;
    if (observer_) trace.downlinks.push_back(std::move(down));
    uplinks.push_back(std::move(up));
  }
  grad /= static_cast<double>(n);
  const double grad_norm_sq = grad.squaredNorm();
  const double loss = objective_.value(state_.w);

  Vector p = Vector::Zero(d);
  if (grad_norm_sq <= config_.tol) {
    state_.converged = true;
  } else {
    ServerStepResult res = server_step(state_, uplinks, sketch, config_);
    p = std::move(res.direction.p);
    if (res.skipped_updates > 0) {
      spdlog::debug("iteration {}: {} Hessian updates skipped", k,
                    res.skipped_updates);
    }
  }
  state_.counters.wall_ms += elapsed_ms(start);
  record(k, loss, grad_norm_sq);

  if (observer_) {
    trace.k = k;
    trace.sketch = std::move(sketch);
    trace.uplinks = std::move(uplinks);
    for (const WorkerHessianState& h : state_.hessians) {
      trace.hessians.push_back(h.b);
    }
    trace.grad = std::move(grad);
    trace.p = std::move(p);
    trace.w_next = state_.w;
    observer_(trace);
  }
}

void Simulator::step_gradient_descent() {
  const auto start = Clock::now();
  const std::uint64_t k = state_.k;
  const Index d = objective_.dim();
  const std::size_t n = objective_.num_workers();
  Vector grad = Vector::Zero(d);
  for (std::size_t i = 0; i < n; ++i) {
    state_.counters.downlink_bits += kFloatBits * static_cast<std::uint64_t>(d);
    grad += objective_.local(i).gradient(state_.w);
    state_.counters.uplink_bits += kFloatBits * static_cast<std::uint64_t>(d);
  }
  grad /= static_cast<double>(n);
  const double grad_norm_sq = grad.squaredNorm();
  const double loss = objective_.value(state_.w);
  if (grad_norm_sq <= config_.tol) {
    state_.converged = true;
  } else {
    state_.w -= config_.step_size * grad;
    ++state_.k;
  }
  state_.counters.wall_ms += elapsed_ms(start);
  record(k, loss, grad_norm_sq);
}

void Simulator::step_fednl_lite() {
  const auto start = Clock::now();
  const std::uint64_t k = state_.k;
  const Index d = objective_.dim();
  const std::size_t n = objective_.num_workers();

  Vector grad = Vector::Zero(d);
  Matrix b_agg = Matrix::Zero(d, d);
  std::vector<double> norms;
  norms.reserve(n);
  // The worker keeps B_i; the server mirrors it from the same compressed
  // messages, so a single copy is simulated.
  for (std::size_t i = 0; i < n; ++i) {
    state_.counters.downlink_bits += kFloatBits * static_cast<std::uint64_t>(d);
    const LocalObjective& f = objective_.local(i);
    Matrix hess = f.hessian_dense(state_.w, config_.dense_hessian_cap);
    state_.counters.hvp += static_cast<std::uint64_t>(d);
    Matrix& b = state_.hessians[i].b;
    Rng rng = compression_stream(config_.seed, k, i);
    CompressedBlock block = compress(config_.compressor, hess - b, rng);
    Matrix delta = decompress(block);
    norms.push_back(delta.norm());
    b = symmetrize(b + config_.beta * delta);
    grad += f.gradient(state_.w);
    state_.counters.uplink_bits +=
        kFloatBits * static_cast<std::uint64_t>(d) + block.bit_cost;
    b_agg += b;
  }
  grad /= static_cast<double>(n);
  b_agg /= static_cast<double>(n);
  const double grad_norm_sq = grad.squaredNorm();
  const double loss = objective_.value(state_.w);
  if (grad_norm_sq <= config_.tol) {
    state_.converged = true;
  } else {
    double lambda = 0.0;
    for (double v : norms) lambda += v;
    lambda /= static_cast<double>(n);
    DirectionResult dir = direction_regularized(b_agg, grad, lambda);
    state_.w += config_.step_size * dir.p;
    ++state_.k;
  }
  state_.counters.wall_ms += elapsed_ms(start);
  record(k, loss, grad_norm_sq);
}

double hessian_drift(const RunState& state, const GlobalObjective& objective,
                     const Vector& w_ref) {
  if (state.hessians.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < state.hessians.size(); ++i) {
    total += (state.hessians[i].b - objective.local(i).hessian_dense(w_ref))
                 .norm();
  }
  return total / static_cast<double>(state.hessians.size());
}

}  // namespace flecs
