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

#ifndef FLECS_DIRECTION_H_
#define FLECS_DIRECTION_H_

#include <string_view>

#include "flecs/common.h"

namespace flecs {

enum class DirectionRule { kTruncatedInverse, kFedSonia, kRegularized };

DirectionRule parse_direction_rule(std::string_view name);
std::string_view to_string(DirectionRule rule);

// Largest d for which the O(d^3) dense direction rules are allowed.
inline constexpr Index kDefaultDenseDirectionCap = 6000;

// p = -A grad. For the truncated rules (mu1, mu2) is the guaranteed spectral
// interval of A.
struct DirectionResult {
  Vector p;
  double mu1 = 0.0;
  double mu2 = 0.0;
  Index clamped_low = 0;   // eigenvalues raised to omega
  Index clamped_high = 0;  // eigenvalues lowered to Omega
  double rho = 0.0;        // FedSONIA complement scaling actually used
  double epsilon = 0.0;    // regularized rule: diagonal shift that succeeded
  bool fallback = false;   // regularized rule: fell back to -grad
};

// p = -V (|Lambda|_omega^Omega)^-1 V' grad with B = V Lambda V'.
DirectionResult direction_truncated_inverse(const Matrix& b_agg,
                                            const Vector& grad, double omega,
                                            double big_omega);

// Curvature inside range(Y~), scaled gradient outside it:
//   Y~ = QR, R M^+ R' = V Lambda V', W = QV,
//   p = -W (|Lambda|_omega^Omega)^-1 W' grad - rho (I - WW') grad.
// rho is clamped per call into [1/Omega, min(min_i |Lambda|_ii, 1/omega)].
DirectionResult direction_fedsonia(const Matrix& y_tilde_agg,
                                   const Matrix& m_agg, const Vector& grad,
                                   double omega, double big_omega, double rho);

// Solves (B + lambda I + eps I) p = -grad with eps escalating 0, 1e-8, ...,
// 1e-2 until the solve succeeds and p'grad < 0; otherwise p = -grad.
DirectionResult direction_regularized(const Matrix& b_agg, const Vector& grad,
                                      double lambda);

// Explicit FedSONIA operator A (test and diagnostics helper for small d).
Matrix fedsonia_operator(const Matrix& y_tilde_agg, const Matrix& m_agg,
                         double omega, double big_omega, double rho);

}  // namespace flecs

#endif  // FLECS_DIRECTION_H_
