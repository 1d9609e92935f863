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

#include "flecs/numerics.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace flecs {

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

SpectralDecomposition sym_eig(const Matrix& a) {
  if (a.rows() != a.cols()) throw NumericError("sym_eig needs a square matrix");
  if (!a.allFinite()) throw NumericError("sym_eig: non-finite entries");
  SpectralDecomposition out;
  if (a.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(a));
  if (solver.info() != Eigen::Success) {
    throw NumericError("sym_eig: eigensolver did not converge");
  }
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  return out;
}

ThinQR thin_qr(const Matrix& y) {
  const Index d = y.rows();
  const Index m = y.cols();
  if (d < m) throw NumericError("thin_qr needs rows >= cols");
  if (!y.allFinite()) throw NumericError("thin_qr: non-finite entries");
  Eigen::HouseholderQR<Matrix> qr(y);
  ThinQR out;
  out.q = qr.householderQ() * Matrix::Identity(d, m);
  out.r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  return out;
}

Matrix pinv_sym(const Matrix& m, double rtol) {
  SpectralDecomposition eig = sym_eig(m);
  const Index p = m.rows();
  if (p == 0) return Matrix(0, 0);
  const double radius = eig.eigenvalues.cwiseAbs().maxCoeff();
  Vector inv = Vector::Zero(p);
  for (Index i = 0; i < p; ++i) {
    double lambda = eig.eigenvalues(i);
    if (radius > 0.0 && std::abs(lambda) > rtol * radius) inv(i) = 1.0 / lambda;
  }
  Matrix out = eig.eigenvectors * inv.asDiagonal() *
               eig.eigenvectors.transpose();
  return symmetrize(out);
}

void check_truncation(double omega, double big_omega) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw ConfigError("truncation omega must be a positive finite number");
  }
  if (!(big_omega >= omega) || !std::isfinite(big_omega)) {
    throw ConfigError("truncation Omega must be finite and >= omega");
  }
}

TruncatedSpectrum truncate_spectrum(const Vector& eigenvalues, double omega,
                                    double big_omega) {
  check_truncation(omega, big_omega);
  TruncatedSpectrum out;
  out.clamped.resize(eigenvalues.size());
  out.inverse.resize(eigenvalues.size());
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    double mag = std::abs(eigenvalues(i));
    if (mag < omega) ++out.clamped_low;
    if (mag > big_omega) ++out.clamped_high;
    double v = std::min(std::max(mag, omega), big_omega);
    out.clamped(i) = v;
    out.inverse(i) = 1.0 / v;
  }
  return out;
}

Vector truncate_sr1_inner(const Vector& inner_eigenvalues, double omega) {
  Vector out = Vector::Zero(inner_eigenvalues.size());
  for (Index j = 0; j < inner_eigenvalues.size(); ++j) {
    double l = inner_eigenvalues(j);
    if (l == 0.0) continue;
    double inv = 1.0 / l;
    if (std::abs(inv) > omega) out(j) = inv;
  }
  return out;
}

}  // namespace flecs
