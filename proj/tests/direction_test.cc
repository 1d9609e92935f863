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

#include <cmath>

#include <gtest/gtest.h>

#include "flecs/direction.h"
#include "test_util.h"

namespace flecs {
namespace {

Matrix svd_pinv(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vector s = svd.singularValues();
  for (Index i = 0; i < s.size(); ++i) {
    s[i] = s[i] > 1e-10 * svd.singularValues()[0] ? 1.0 / s[i] : 0.0;
  }
  return svd.matrixV() * s.asDiagonal() * svd.matrixU().transpose();
}

double clamp_mag(double l, double lo, double hi) {
  return std::min(std::max(std::abs(l), lo), hi);
}

TEST(TruncatedInverse, IdentityAndZero) {
  testing::TestRng t(1);
  Vector g = t.gaussian_vector(5);
  DirectionResult id =
      direction_truncated_inverse(Matrix::Identity(5, 5), g, 1e-3, 1e8);
  EXPECT_LE((id.p + g).norm(), 1e-14);
  DirectionResult zero =
      direction_truncated_inverse(Matrix::Zero(5, 5), g, 1e-3, 1e8);
  EXPECT_LE((zero.p + g / 1e-3).norm(), 1e-9);
  EXPECT_EQ(zero.clamped_low, 5);
  EXPECT_EQ(zero.mu1, 1e-8);
  EXPECT_EQ(zero.mu2, 1e3);
}

TEST(TruncatedInverse, MatchesDenseSpectralFormula) {
  testing::TestRng t(2);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix b = t.symmetric(10);
    Vector g = t.gaussian_vector(10);
    const double omega = 0.2, big = 3.0;
    DirectionResult r = direction_truncated_inverse(b, g, omega, big);
    Eigen::SelfAdjointEigenSolver<Matrix> es(b);
    Vector inv(10);
    for (int i = 0; i < 10; ++i) {
      inv[i] = 1.0 / clamp_mag(es.eigenvalues()[i], omega, big);
    }
    Vector oracle = -es.eigenvectors() * inv.asDiagonal() *
                    es.eigenvectors().transpose() * g;
    EXPECT_LE((r.p - oracle).norm(), 1e-10 * oracle.norm());
    EXPECT_LE(g.dot(r.p), -(1.0 / big) * g.squaredNorm() * (1 - 1e-12));
  }
}

TEST(FedSonia, OrthogonalGradientScalesByRho) {
  testing::TestRng t(3);
  Matrix y = Matrix::Zero(5, 2);
  y(0, 0) = 2.0;
  y(1, 1) = 3.0;
  Matrix m{{2.0, 0.0}, {0.0, 1.0}};
  Vector g = Vector::Zero(5);
  g.tail(3) = t.gaussian_vector(3);
  DirectionResult r = direction_fedsonia(y, m, g, 1e-3, 1e8, 0.5);
  EXPECT_LE((r.p + r.rho * g).norm(), 1e-14);
  EXPECT_EQ(r.rho, 0.5);
}

TEST(FedSonia, FullSubspaceIsTruncatedNewton) {
  testing::TestRng t(4);
  Matrix h = t.spd(6);
  Matrix s = Matrix::Identity(6, 6);
  Vector g = t.gaussian_vector(6);
  DirectionResult r = direction_fedsonia(h * s, s.transpose() * h * s, g,
                                         1e-3, 1e8, 1e-3);
  Vector newton = -h.ldlt().solve(g);
  EXPECT_LE((r.p - newton).norm(), 1e-9 * newton.norm());
}

TEST(FedSonia, MatchesExplicitProjectorFormula) {
  testing::TestRng t(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 6, m = 2;
    Matrix s = t.gaussian(d, m);
    Matrix h = t.symmetric(d);
    Matrix y = h * s;
    Matrix mm = s.transpose() * h * s;
    mm = 0.5 * (mm + mm.transpose());
    Vector g = t.gaussian_vector(d);
    const double omega = 0.1, big = 10.0, rho = 0.3;
    DirectionResult r = direction_fedsonia(y, mm, g, omega, big, rho);

    // Oracle: B~ = Y M^+ Y' restricted to range(Y) via an SVD basis.
    Eigen::JacobiSVD<Matrix> ysvd(y, Eigen::ComputeThinU);
    Matrix q = ysvd.matrixU();  // orthonormal basis of range(Y)
    Matrix core = q.transpose() * y * svd_pinv(mm) * y.transpose() * q;
    core = 0.5 * (core + core.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(core);
    Matrix wb = q * es.eigenvectors();
    Vector inv(m);
    double min_clamped = big;
    for (int i = 0; i < m; ++i) {
      const double c = clamp_mag(es.eigenvalues()[i], omega, big);
      inv[i] = 1.0 / c;
      min_clamped = std::min(min_clamped, c);
    }
    const double rho_used =
        std::clamp(rho, 1.0 / big,
                   std::max(1.0 / big, std::min(min_clamped, 1.0 / omega)));
    Matrix proj = wb * wb.transpose();
    Vector oracle = -wb * inv.asDiagonal() * wb.transpose() * g -
                    rho_used * (Matrix::Identity(d, d) - proj) * g;
    EXPECT_NEAR(r.rho, rho_used, 1e-12);
    EXPECT_LE((r.p - oracle).norm(), 1e-9 * std::max(1.0, oracle.norm()));
    EXPECT_LE(g.dot(r.p), -(1.0 / big) * g.squaredNorm() * (1 - 1e-12));

    Matrix a = fedsonia_operator(y, mm, omega, big, rho);
    EXPECT_LE((-a * g - r.p).norm(), 1e-10 * std::max(1.0, r.p.norm()));
  }
}

TEST(FedSonia, DecompositionIdentity) {
  testing::TestRng t(6);
  Matrix s = t.gaussian(8, 3);
  Matrix h = t.spd(8);
  Matrix y = h * s, m = s.transpose() * h * s;
  Vector g = t.gaussian_vector(8);
  Eigen::JacobiSVD<Matrix> ysvd(y, Eigen::ComputeThinU);
  Matrix proj = ysvd.matrixU() * ysvd.matrixU().transpose();
  Vector gpar = proj * g;
  Vector gperp = g - gpar;
  EXPECT_LE((gpar + gperp - g).norm(), 1e-15);
  // The complement is an eigenspace of A with eigenvalue rho, and range(Y)
  // is invariant.
  const double rho = 1e-2;
  Matrix a = fedsonia_operator(y, m, 1e-3, 1e8, rho);
  EXPECT_LE((a * gperp - rho * gperp).norm(), 1e-10 * gperp.norm());
  Vector ag = a * gpar;
  EXPECT_LE((ag - proj * ag).norm(), 1e-10 * std::max(1.0, ag.norm()));
}

TEST(FedSonia, RhoIsClampedIntoBracket) {
  Matrix y = Matrix::Identity(4, 2);
  Matrix m = 4.0 * Matrix::Identity(2, 2);  // range curvature 1/4
  Vector g = Vector::Ones(4);
  EXPECT_EQ(direction_fedsonia(y, m, g, 1e-3, 1e8, 100.0).rho, 0.25);
  EXPECT_EQ(direction_fedsonia(y, m, g, 1e-3, 1e8, 1e-12).rho, 1e-8);
  EXPECT_EQ(direction_fedsonia(y, m, g, 1e-3, 1e8, 0.1).rho, 0.1);
}

TEST(FedSonia, Errors) {
  EXPECT_THROW(direction_fedsonia(Matrix::Zero(4, 0), Matrix::Zero(0, 0),
                                  Vector::Ones(4), 1e-3, 1e8, 1e-3),
               NumericError);
  EXPECT_THROW(direction_fedsonia(Matrix::Ones(4, 2), Matrix::Ones(3, 3),
                                  Vector::Ones(4), 1e-3, 1e8, 1e-3),
               NumericError);
  EXPECT_THROW(direction_fedsonia(Matrix::Ones(4, 2), Matrix::Ones(2, 2),
                                  Vector::Ones(4), 0.0, 1e8, 1e-3),
               ConfigError);
}

TEST(FedSonia, RankDeficientSketchIsHandled) {
  testing::TestRng t(7);
  Matrix y(6, 3);
  y.col(0) = t.gaussian_vector(6);
  y.col(1) = y.col(0);
  y.col(2) = t.gaussian_vector(6);
  Matrix m = y.transpose() * y;
  Vector g = t.gaussian_vector(6);
  DirectionResult r = direction_fedsonia(y, m, g, 1e-3, 1e8, 1e-2);
  EXPECT_TRUE(r.p.allFinite());
  EXPECT_LT(r.p.dot(g), 0.0);
}

TEST(Regularized, ClosedForms) {
  testing::TestRng t(8);
  Vector g = t.gaussian_vector(4);
  EXPECT_LE((direction_regularized(Matrix::Identity(4, 4), g, 0.0).p + g).norm(),
            1e-15);
  EXPECT_LE((direction_regularized(Matrix::Zero(4, 4), g, 2.0).p + g / 2).norm(),
            1e-15);
  EXPECT_EQ(direction_regularized(Matrix::Identity(4, 4), Vector::Zero(4), 0.0)
                .p.norm(), 0.0);
}

TEST(Regularized, SolveResidual) {
  testing::TestRng t(9);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix b = t.spd(12);
    Vector g = t.gaussian_vector(12);
    const double lambda = t.uniform(0, 2);
    DirectionResult r = direction_regularized(b, g, lambda);
    EXPECT_EQ(r.epsilon, 0.0);
    EXPECT_FALSE(r.fallback);
    Matrix shifted = b + lambda * Matrix::Identity(12, 12);
    EXPECT_LE((shifted * r.p + g).norm(), 1e-8);
  }
}

TEST(Regularized, EscalatesThenFallsBack) {
  // Slightly indefinite B: eps = 0 gives ascent, a positive eps succeeds.
  Matrix b = Matrix::Zero(2, 2);
  b(0, 0) = 1.0;
  b(1, 1) = -1e-3;
  Vector g{{1.0, 1.0}};
  DirectionResult r = direction_regularized(b, g, 0.0);
  EXPECT_FALSE(r.fallback);
  EXPECT_GT(r.epsilon, 0.0);
  EXPECT_LT(r.p.dot(g), 0.0);
  // Strongly negative definite: every shift yields ascent, so -grad is used.
  DirectionResult f = direction_regularized(-Matrix::Identity(2, 2), g, 0.0);
  EXPECT_TRUE(f.fallback);
  EXPECT_EQ(f.p, -g);
  EXPECT_THROW(direction_regularized(b, g, -1.0), NumericError);
}

TEST(DirectionRule, Names) {
  for (DirectionRule r : {DirectionRule::kTruncatedInverse, DirectionRule::kFedSonia,
                          DirectionRule::kRegularized}) {
    EXPECT_EQ(parse_direction_rule(to_string(r)), r);
  }
  EXPECT_THROW(parse_direction_rule("newton"), ConfigError);
}

}  // namespace
}  // namespace flecs
