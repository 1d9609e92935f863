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

#include "flecs/direction.h"

#include <algorithm>
#include <array>
#include <string>

#include <spdlog/spdlog.h>

#include "flecs/numerics.h"

namespace flecs {
namespace {

struct SoniaBasis {
  Matrix w;                  // d x m, orthonormal columns
  TruncatedSpectrum spectrum;
  double rho = 0.0;
};

SoniaBasis sonia_basis(const Matrix& y_tilde, const Matrix& m, double omega,
                       double big_omega, double rho) {
  check_truncation(omega, big_omega);
  if (y_tilde.cols() == 0) throw NumericError("FedSONIA needs m >= 1");
  if (m.rows() != y_tilde.cols() || m.cols() != y_tilde.cols()) {
    throw NumericError("FedSONIA: M and Y~ dimensions disagree");
  }
  ThinQR qr = thin_qr(y_tilde);
  Matrix core = qr.r * pinv_sym(m) * qr.r.transpose();
  SpectralDecomposition eig = sym_eig(core);
  SoniaBasis out;
  out.w = qr.q * eig.eigenvectors;
  out.spectrum = truncate_spectrum(eig.eigenvalues, omega, big_omega);

  const double lo = 1.0 / big_omega;
  const double hi = std::max(
      lo, std::min(out.spectrum.clamped.minCoeff(), 1.0 / omega));
  out.rho = std::clamp(rho, lo, hi);
  if (out.rho != rho) {
    spdlog::debug("FedSONIA rho {} clamped to {} (bracket [{}, {}])", rho,
                  out.rho, lo, hi);
  }
  return out;
}

}  // namespace

DirectionRule parse_direction_rule(std::string_view name) {
  if (name == "trunc_inv") return DirectionRule::kTruncatedInverse;
  if (name == "fedsonia") return DirectionRule::kFedSonia;
  if (name == "regularized") return DirectionRule::kRegularized;
  throw ConfigError("unknown direction rule '" + std::string(name) + "'");
}

std::string_view to_string(DirectionRule rule) {
  switch (rule) {
    case DirectionRule::kTruncatedInverse:
      return "trunc_inv";
    case DirectionRule::kFedSonia:
      return "fedsonia";
    case DirectionRule::kRegularized:
      return "regularized";
  }
  return "?";
}

DirectionResult direction_truncated_inverse(const Matrix& b_agg,
                                            const Vector& grad, double omega,
                                            double big_omega) {
  check_truncation(omega, big_omega);
  if (b_agg.rows() != grad.size()) {
    throw NumericError("truncated inverse: B and gradient dimensions disagree");
  }
  SpectralDecomposition eig = sym_eig(b_agg);
  TruncatedSpectrum t = truncate_spectrum(eig.eigenvalues, omega, big_omega);
  DirectionResult out;
  Vector coeffs = eig.eigenvectors.transpose() * grad;
  out.p = -(eig.eigenvectors * t.inverse.cwiseProduct(coeffs));
  out.mu1 = 1.0 / big_omega;
  out.mu2 = 1.0 / omega;
  out.clamped_low = t.clamped_low;
  out.clamped_high = t.clamped_high;
  return out;
}

DirectionResult direction_fedsonia(const Matrix& y_tilde_agg,
                                   const Matrix& m_agg, const Vector& grad,
                                   double omega, double big_omega, double rho) {
  if (y_tilde_agg.rows() != grad.size()) {
    throw NumericError("FedSONIA: Y~ and gradient dimensions disagree");
  }
  SoniaBasis basis = sonia_basis(y_tilde_agg, m_agg, omega, big_omega, rho);
  Vector coeffs = basis.w.transpose() * grad;
  Vector in_range = basis.w * coeffs;
  Vector complement = grad - in_range;
  DirectionResult out;
  out.p = -(basis.w * basis.spectrum.inverse.cwiseProduct(coeffs)) -
          basis.rho * complement;
  out.mu1 = 1.0 / big_omega;
  out.mu2 = 2.0 / omega;
  out.clamped_low = basis.spectrum.clamped_low;
  out.clamped_high = basis.spectrum.clamped_high;
  out.rho = basis.rho;
  return out;
}

Matrix fedsonia_operator(const Matrix& y_tilde_agg, const Matrix& m_agg,
                         double omega, double big_omega, double rho) {
  SoniaBasis basis = sonia_basis(y_tilde_agg, m_agg, omega, big_omega, rho);
  const Index d = y_tilde_agg.rows();
  Matrix proj = basis.w * basis.w.transpose();
  return basis.w * basis.spectrum.inverse.asDiagonal() *
             basis.w.transpose() +
         basis.rho * (Matrix::Identity(d, d) - proj);
}

DirectionResult direction_regularized(const Matrix& b_agg, const Vector& grad,
                                      double lambda) {
  if (!(lambda >= 0.0)) {
    throw NumericError("regularized direction needs lambda >= 0");
  }
  const Index d = grad.size();
  if (b_agg.rows() != d || b_agg.cols() != d) {
    throw NumericError("regularized direction: B and gradient disagree");
  }
  DirectionResult out;
  if (grad.isZero(0.0)) {
    out.p = Vector::Zero(d);
    return out;
  }
  constexpr std::array<double, 8> kShifts = {0.0,  1e-8, 1e-7, 1e-6,
                                             1e-5, 1e-4, 1e-3, 1e-2};
  const Matrix base = symmetrize(b_agg);
  for (double eps : kShifts) {
    Matrix shifted = base;
    shifted.diagonal().array() += lambda + eps;
    Eigen::LDLT<Matrix> ldlt(shifted);
    if (ldlt.info() != Eigen::Success) continue;
    Vector p = ldlt.solve(-grad);
    if (ldlt.info() != Eigen::Success || !p.allFinite()) continue;
    if (p.dot(grad) < 0.0) {
      out.p = std::move(p);
      out.epsilon = eps;
      return out;
    }
  }
  spdlog::warn("regularized direction: all shifts failed, using -grad");
  out.p = -grad;
  out.fallback = true;
  return out;
}

}  // namespace flecs
