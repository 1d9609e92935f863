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

#include "flecs/hessian_learn.h"

#include <cmath>
#include <string>

#include <spdlog/spdlog.h>

#include "flecs/numerics.h"

namespace flecs {

HessianRule parse_hessian_rule(std::string_view name) {
  if (name == "lsr1") return HessianRule::kLsr1;
  if (name == "direct") return HessianRule::kDirect;
  throw ConfigError("unknown hessian rule '" + std::string(name) + "'");
}

std::string_view to_string(HessianRule rule) {
  return rule == HessianRule::kLsr1 ? "lsr1" : "direct";
}

ReconstructedSketch reconstruct(const CompressedBlock& residual,
                                const Matrix& m, const Matrix& b,
                                const Matrix& sketch) {
  const Index d = b.rows();
  if (b.cols() != d || sketch.rows() != d || residual.rows != d ||
      residual.cols != sketch.cols() || m.rows() != sketch.cols() ||
      m.cols() != sketch.cols()) {
    throw NumericError("reconstruct: dimension mismatch");
  }
  ReconstructedSketch out;
  out.y_tilde = decompress(residual) + b * sketch;
  out.m = symmetrize(m);
  return out;
}

UpdateOutcome update_lsr1_truncated(const Matrix& b, const Matrix& y_tilde,
                                    const Matrix& m, const Matrix& sketch,
                                    double omega) {
  if (!(omega > 0.0)) throw ConfigError("L-SR1 truncation omega must be > 0");
  if (!b.allFinite() || !y_tilde.allFinite() || !m.allFinite() ||
      !sketch.allFinite()) {
    throw NumericError("L-SR1 update: non-finite input");
  }
  Matrix bs = b * sketch;
  Matrix residual = y_tilde - bs;
  if (residual.isZero(0.0)) return {b, false};

  Matrix inner = symmetrize(m - sketch.transpose() * bs);
  SpectralDecomposition eig;
  try {
    eig = sym_eig(inner);
  } catch (const NumericError& e) {
    spdlog::warn("L-SR1 inner eigendecomposition failed ({}); keeping B", e.what());
    return {b, true};
  }
  Vector inv = truncate_sr1_inner(eig.eigenvalues, omega);
  Matrix ru = residual * eig.eigenvectors;  // d x m
  Matrix next = b + ru * inv.asDiagonal() * ru.transpose();
  next = symmetrize(next);
  if (!next.allFinite()) {
    spdlog::warn("L-SR1 update produced non-finite entries; keeping B");
    return {b, true};
  }
  return {std::move(next), false};
}

UpdateOutcome update_direct(const Matrix& b, const Matrix& y_tilde,
                            const Matrix& m, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw ConfigError("direct update learning rate beta must be in (0, 1]");
  }
  if (!b.allFinite() || !y_tilde.allFinite() || !m.allFinite()) {
    throw NumericError("direct update: non-finite input");
  }
  Matrix pinv;
  try {
    pinv = pinv_sym(m);
  } catch (const NumericError& e) {
    spdlog::warn("direct update pseudo-inverse failed ({}); keeping B", e.what());
    return {b, true};
  }
  Matrix next = (1.0 - beta) * b +
                beta * (y_tilde * pinv * y_tilde.transpose());
  next = symmetrize(next);
  if (!next.allFinite()) {
    spdlog::warn("direct update produced non-finite entries; keeping B");
    return {b, true};
  }
  return {std::move(next), false};
}

Matrix update_regularized_identity(const Matrix& b_agg,
                                   std::span<const double> residual_norms) {
  if (residual_norms.empty()) return b_agg;
  double mean = 0.0;
  for (double v : residual_norms) mean += v;
  mean /= static_cast<double>(residual_norms.size());
  Matrix out = b_agg;
  out.diagonal().array() += mean;
  return out;
}

double block_frobenius_norm(const CompressedBlock& block) {
  return decompress(block).norm();
}

bool is_symmetric(const Matrix& b, double rel_tol) {
  if (b.rows() != b.cols()) return false;
  return (b - b.transpose()).norm() <= rel_tol * b.norm();
}

}  // namespace flecs
