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

#ifndef FLECS_HESSIAN_LEARN_H_
#define FLECS_HESSIAN_LEARN_H_

#include <span>
#include <string_view>

#include "flecs/common.h"
#include "flecs/compress.h"

namespace flecs {

enum class HessianRule { kLsr1, kDirect };

HessianRule parse_hessian_rule(std::string_view name);
std::string_view to_string(HessianRule rule);

// Server-resident approximation B_i of worker i's local Hessian.
struct WorkerHessianState {
  Matrix b;
  std::size_t worker_id = 0;
};

// The server's view of one worker's sketch: Y~ = decompress(C) + B S and the
// (exact, symmetrized) M = S' hess(f_i) S.
struct ReconstructedSketch {
  Matrix y_tilde;
  Matrix m;
};

ReconstructedSketch reconstruct(const CompressedBlock& residual,
                                const Matrix& m, const Matrix& b,
                                const Matrix& sketch);

struct UpdateOutcome {
  Matrix b;
  bool skipped = false;  // update rejected; b is the previous approximation
};

// Truncated L-SR1:
//   B+ = B + R U [(L)^-1]_omega U' R',   R = Y~ - B S,
// with U L U' the spectrum of the inner matrix M - S'BS. A zero residual
// leaves B unchanged. Non-finite results or an eigensolver failure keep the
// previous B and set `skipped`.
UpdateOutcome update_lsr1_truncated(const Matrix& b, const Matrix& y_tilde,
                                    const Matrix& m, const Matrix& sketch,
                                    double omega);

// Direct update: B+ = (1 - beta) B + beta Y~ M^+ Y~'. beta in (0, 1].
UpdateOutcome update_direct(const Matrix& b, const Matrix& y_tilde,
                            const Matrix& m, double beta);

// B + (1/n) sum_i |C_i|_F * I.
Matrix update_regularized_identity(const Matrix& b_agg,
                                   std::span<const double> residual_norms);

// Frobenius norm of a decompressed block.
double block_frobenius_norm(const CompressedBlock& block);

// |B - B'|_F <= 1e-10 * |B|_F (exact zero for the zero matrix).
bool is_symmetric(const Matrix& b, double rel_tol = 1e-10);

}  // namespace flecs

#endif  // FLECS_HESSIAN_LEARN_H_
