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

#ifndef FLECS_NUMERICS_H_
#define FLECS_NUMERICS_H_

#include "flecs/common.h"

namespace flecs {

// A = V diag(eigenvalues) V', eigenvalues ascending, V orthonormal.
struct SpectralDecomposition {
  Vector eigenvalues;
  Matrix eigenvectors;
};

// (A + A') / 2.
Matrix symmetrize(const Matrix& a);

// Symmetric eigendecomposition of the symmetrized input. Throws
// NumericError on non-finite entries or solver failure.
SpectralDecomposition sym_eig(const Matrix& a);

struct ThinQR {
  Matrix q;  // d x m, orthonormal columns
  Matrix r;  // m x m, upper triangular
};

// Economy QR of a d x m matrix with d >= m. Rank-deficient inputs are
// allowed; R then carries zero diagonal entries.
ThinQR thin_qr(const Matrix& y);

inline constexpr double kPinvRelTol = 1e-10;

// Moore-Penrose pseudo-inverse of a symmetric matrix via its spectrum.
// Eigenvalues with |lambda| <= rtol * max|lambda| are treated as zero.
Matrix pinv_sym(const Matrix& m, double rtol = kPinvRelTol);

// Eigenvalue clamp lambda -> min(max(|lambda|, omega), Omega) together with
// its entrywise reciprocal.
struct TruncatedSpectrum {
  Vector clamped;
  Vector inverse;
  Index clamped_low = 0;   // eigenvalues raised to omega
  Index clamped_high = 0;  // eigenvalues lowered to Omega
};

TruncatedSpectrum truncate_spectrum(const Vector& eigenvalues, double omega,
                                    double big_omega);

// Truncated inverse used inside the L-SR1 update: 1/l_j, except 0 when
// l_j == 0 or |1/l_j| <= omega.
Vector truncate_sr1_inner(const Vector& inner_eigenvalues, double omega);

// Validates 0 < omega <= Omega; throws ConfigError otherwise.
void check_truncation(double omega, double big_omega);

}  // namespace flecs

#endif  // FLECS_NUMERICS_H_
