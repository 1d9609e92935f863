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
#include <limits>

#include <gtest/gtest.h>

#include "flecs/objective.h"
#include "test_util.h"

namespace flecs {
namespace {

SparseDataset random_data(int rows, int d, std::uint32_t seed) {
  testing::TestRng rng(seed);
  std::vector<SparseRow> data;
  for (int r = 0; r < rows; ++r) {
    SparseRow row;
    row.label = rng.uniform(0, 1) < 0.5 ? -1.0 : 1.0;
    for (int j = 0; j < d; ++j) {
      if (rng.uniform(0, 1) < 0.5) row.features.emplace_back(j, rng.uniform(-2, 2));
    }
    data.push_back(row);
  }
  return SparseDataset(data, d);
}

// Central differences, step scaled by |w|_inf.
double fd_directional(const LocalObjective& f, const Vector& w,
                      const Vector& v) {
  const double h = 1e-6 * std::max(1.0, w.lpNorm<Eigen::Infinity>());
  return (f.value(w + h * v) - f.value(w - h * v)) / (2 * h);
}

TEST(Objective, StableLogistic) {
  EXPECT_NEAR(log1p_exp(0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(log1p_exp(700.0), 700.0, 1e-12);
  EXPECT_NEAR(log1p_exp(-700.0), std::exp(-700.0), 1e-300);
  EXPECT_TRUE(std::isfinite(log1p_exp(1e5)));
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(-800.0), 0.0, 1e-300);
  EXPECT_EQ(sigmoid(800.0), 1.0);
}

TEST(Objective, ValuesAtOrigin) {
  SparseDataset ds = random_data(20, 5, 1);
  for (bool nonconvex : {false, true}) {
    LocalObjective f = LocalObjective::logistic(ds, 0.3, nonconvex);
    EXPECT_NEAR(f.value(Vector::Zero(5)), std::log(2.0), 1e-15);
  }
  LocalObjective q = LocalObjective::quadratic(Matrix::Identity(2, 2),
                                               Vector::Zero(2));
  EXPECT_DOUBLE_EQ(q.value(Vector{{3.0, 4.0}}), 12.5);
}

TEST(Objective, NoOverflowForLargeMargins) {
  std::vector<SparseRow> rows = {SparseRow{1.0, {{0, 1.0}}},
                                 SparseRow{-1.0, {{0, 1.0}}}};
  LocalObjective f = LocalObjective::logistic(SparseDataset(rows, 1), 0.0, false);
  Vector w{{700.0}};
  EXPECT_NEAR(f.value(w), 350.0, 1e-9);
  EXPECT_TRUE(f.gradient(w).allFinite());
  EXPECT_TRUE(f.hessian_dense(w).allFinite());
}

TEST(Objective, RejectsNonFinitePoints) {
  LocalObjective q = LocalObjective::quadratic(Matrix::Identity(2, 2),
                                               Vector::Zero(2));
  Vector bad{{std::numeric_limits<double>::quiet_NaN(), 0.0}};
  EXPECT_THROW(q.value(bad), NumericError);
  EXPECT_THROW(q.gradient(Vector::Zero(3)), NumericError);
}

TEST(Objective, GradientClosedForms) {
  Matrix h{{2.0, 1.0}, {1.0, 3.0}};
  Vector b{{1.0, -1.0}};
  LocalObjective q = LocalObjective::quadratic(h, b);
  EXPECT_LE((q.gradient(Vector::Zero(2)) + b).norm(), 1e-15);

  SparseDataset ds = random_data(15, 4, 2);
  LocalObjective f = LocalObjective::logistic(ds, 0.7, false);
  Vector expected = Vector::Zero(4);
  for (const SparseRow& row : ds.rows()) {
    for (const auto& [j, v] : row.features) expected[j] += -row.label * v / 2;
  }
  expected /= 15.0;
  EXPECT_LE((f.gradient(Vector::Zero(4)) - expected).norm(), 1e-14);
}

TEST(Objective, GradientMatchesFiniteDifferences) {
  testing::TestRng rng(5);
  SparseDataset ds = random_data(30, 6, 3);
  for (bool nonconvex : {false, true}) {
    LocalObjective f = LocalObjective::logistic(ds, 0.2, nonconvex);
    for (int trial = 0; trial < 10; ++trial) {
      Vector w = rng.gaussian_vector(6);
      Vector g = f.gradient(w);
      for (int t = 0; t < 6; ++t) {
        Vector e = Vector::Unit(6, t);
        const double fd = fd_directional(f, w, e);
        EXPECT_NEAR(fd, g[t], 1e-5 * std::max(1.0, std::abs(g[t])));
      }
    }
  }
}

TEST(Objective, SketchMatchesGradientDifferences) {
  testing::TestRng rng(6);
  SparseDataset ds = random_data(25, 7, 4);
  for (bool nonconvex : {false, true}) {
    LocalObjective f = LocalObjective::logistic(ds, 0.1, nonconvex);
    Vector w = rng.gaussian_vector(7);
    Matrix s = rng.gaussian(7, 3);
    std::uint64_t counter = 5;
    Matrix y = f.hessian_sketch(w, s, &counter);
    EXPECT_EQ(counter, 8u);
    const double eps = 1e-5;
    for (int t = 0; t < 3; ++t) {
      Vector fd = (f.gradient(w + eps * s.col(t)) -
                   f.gradient(w - eps * s.col(t))) / (2 * eps);
      EXPECT_LE((fd - y.col(t)).lpNorm<Eigen::Infinity>(), 1e-4);
    }
  }
}

TEST(Objective, SketchEdgeCases) {
  testing::TestRng rng(8);
  Matrix h = rng.spd(5);
  LocalObjective q = LocalObjective::quadratic(h, Vector::Zero(5));
  EXPECT_LE((q.hessian_sketch(Vector::Zero(5), Matrix::Identity(5, 5)) - h)
                .norm(), 1e-15);
  SparseDataset ds = random_data(10, 5, 9);
  LocalObjective f = LocalObjective::logistic(ds, 0.1, false);
  EXPECT_EQ(f.hessian_sketch(rng.gaussian_vector(5), Matrix::Zero(5, 2)).norm(),
            0.0);
  EXPECT_THROW(f.hessian_sketch(Vector::Zero(5), Matrix::Zero(4, 2)),
               NumericError);
  EXPECT_THROW(f.hessian_sketch(Vector::Zero(5), Matrix::Zero(5, 6)),
               NumericError);
}

TEST(Objective, DenseHessianEqualsIdentitySketch) {
  testing::TestRng rng(10);
  SparseDataset ds = random_data(40, 8, 11);
  for (bool nonconvex : {false, true}) {
    LocalObjective f = LocalObjective::logistic(ds, 0.05, nonconvex);
    Vector w = rng.gaussian_vector(8);
    Matrix dense = f.hessian_dense(w);
    EXPECT_EQ((dense - dense.transpose()).norm(), 0.0);
    EXPECT_LE((dense - f.hessian_sketch(w, Matrix::Identity(8, 8))).norm(),
              1e-13);
  }
}

TEST(Objective, SingleRowHessianAtOrigin) {
  std::vector<SparseRow> rows = {SparseRow{1.0, {{0, 1.0}, {2, -2.0}}}};
  const double mu = 0.3;
  LocalObjective f =
      LocalObjective::logistic(SparseDataset(rows, 3), mu, false);
  Vector a{{1.0, 0.0, -2.0}};
  Matrix expected = 0.25 * a * a.transpose() + 2 * mu * Matrix::Identity(3, 3);
  EXPECT_LE((f.hessian_dense(Vector::Zero(3)) - expected).norm(), 1e-15);
}

TEST(Objective, DenseCapIsEnforced) {
  SparseDataset ds = random_data(5, 6, 12);
  LocalObjective f = LocalObjective::logistic(ds, 0.1, false);
  EXPECT_THROW(f.hessian_dense(Vector::Zero(6), 5), ConfigError);
}

TEST(Objective, StrongConvexityWitness) {
  testing::TestRng rng(13);
  SparseDataset ds = random_data(60, 10, 14);
  const double mu = 0.05;
  Partition p = partition_rows(ds, 3, PartitionMode::kContiguous);
  GlobalObjective f = make_logistic_objective(ds, p, ObjectiveKind::kLogregL2, mu);
  for (int trial = 0; trial < 10; ++trial) {
    Vector w = 3.0 * rng.gaussian_vector(10);
    Eigen::SelfAdjointEigenSolver<Matrix> es(f.hessian_dense(w));
    EXPECT_GE(es.eigenvalues().minCoeff(), 2 * mu - 1e-12);
  }
}

TEST(Objective, NonconvexIsBoundedBelowAndNonconvex) {
  testing::TestRng rng(15);
  SparseDataset ds = random_data(30, 4, 16);
  LocalObjective f = LocalObjective::logistic(ds, 1.0, true);
  for (int trial = 0; trial < 50; ++trial) {
    EXPECT_GE(f.value(10.0 * rng.gaussian_vector(4)), 0.0);
  }
  // The regularizer alone has negative curvature for |w_t| > 1/sqrt(3).
  std::vector<SparseRow> none = {SparseRow{1.0, {}}};
  LocalObjective reg = LocalObjective::logistic(SparseDataset(none, 1), 1.0, true);
  EXPECT_LT(reg.hessian_dense(Vector{{2.0}})(0, 0), 0.0);
}

TEST(Objective, GlobalAveragesLocals) {
  SparseDataset ds = random_data(21, 5, 17);
  Partition p = partition_rows(ds, 4, PartitionMode::kContiguous);
  GlobalObjective g = make_logistic_objective(ds, p, ObjectiveKind::kLogregL2, 0.1);
  Vector w = Vector::LinSpaced(5, -1, 1);
  double v = 0;
  Vector grad = Vector::Zero(5);
  for (const LocalObjective& f : g.locals()) {
    v += f.value(w);
    grad += f.gradient(w);
  }
  EXPECT_NEAR(g.value(w), v / 4, 1e-15);
  EXPECT_LE((g.gradient(w) - grad / 4).norm(), 1e-15);
}

TEST(Objective, KindNames) {
  for (ObjectiveKind k : {ObjectiveKind::kLogregL2, ObjectiveKind::kLogregNonconvex,
                          ObjectiveKind::kQuadratic}) {
    EXPECT_EQ(parse_objective_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_objective_kind("hinge"), ConfigError);
}

TEST(Objective, SmoothnessEstimateBoundsHessian) {
  testing::TestRng rng(18);
  SparseDataset ds = random_data(50, 6, 19);
  Partition p = partition_rows(ds, 2, PartitionMode::kContiguous);
  GlobalObjective g = make_logistic_objective(ds, p, ObjectiveKind::kLogregL2, 0.01);
  const double lip = estimate_smoothness(g);
  // Oracle: exact Hessian at the origin, where sigma' peaks at 1/4.
  Eigen::SelfAdjointEigenSolver<Matrix> es(g.hessian_dense(Vector::Zero(6)));
  EXPECT_NEAR(lip, es.eigenvalues().maxCoeff(), 1e-6 * lip);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::SelfAdjointEigenSolver<Matrix> at(g.hessian_dense(rng.gaussian_vector(6)));
    EXPECT_LE(at.eigenvalues().maxCoeff(), lip * (1 + 1e-9));
  }
  QuadraticProblem q = synthetic_quadratic(10, 0.1, 4.0, 3, 2);
  EXPECT_NEAR(estimate_smoothness(make_quadratic_objective(q)), 4.0, 1e-6);
}

}  // namespace
}  // namespace flecs
