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

#ifndef FLECS_OBJECTIVE_H_
#define FLECS_OBJECTIVE_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/SparseCore>

#include "flecs/common.h"
#include "flecs/dataset.h"

namespace flecs {

enum class ObjectiveKind { kLogregL2, kLogregNonconvex, kQuadratic };

ObjectiveKind parse_objective_kind(std::string_view name);
std::string_view to_string(ObjectiveKind kind);

// Largest d for which a dense d x d local Hessian may be materialized.
inline constexpr Index kDefaultDenseHessianCap = 25000;

// Numerically stable log(1 + exp(x)) and logistic sigmoid.
double log1p_exp(double x);
double sigmoid(double x);

// Loss of a single worker. Logistic kinds:
//   (1/r) sum_j log(1 + exp(-b_j a_j'w)) + reg(w)
// with reg(w) = mu |w|^2 (kLogregL2) or mu sum_t w_t^2 / (1 + w_t^2)
// (kLogregNonconvex). Quadratic: 1/2 w'Hw - b'w.
//
// All oracles are pure; Hessian sketches are formed from Hessian-vector
// products and never materialize the d x d Hessian.
class LocalObjective {
 public:
  using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  static LocalObjective logistic(const SparseDataset& data, double reg_mu,
                                 bool nonconvex);
  static LocalObjective quadratic(Matrix hessian, Vector linear_term);

  ObjectiveKind kind() const { return kind_; }
  Index dim() const { return dim_; }
  double reg_mu() const { return reg_mu_; }
  Index num_rows() const { return features_.rows(); }

  double value(const Vector& w) const;
  Vector gradient(const Vector& w) const;

  // Y = hess(w) * S computed column-wise as HVPs. Adds S.cols() to
  // *hvp_counter when one is supplied.
  Matrix hessian_sketch(const Vector& w, const Matrix& sketch,
                        std::uint64_t* hvp_counter = nullptr) const;
  Vector hessian_vector(const Vector& w, const Vector& v) const;

  // Exact symmetric local Hessian. Throws ConfigError when dim() > cap.
  Matrix hessian_dense(const Vector& w,
                       Index cap = kDefaultDenseHessianCap) const;

 private:
  LocalObjective() = default;

  void check_point(const Vector& w) const;
  // Per-row sigma'(a_j'w) weights, already divided by r.
  Vector curvature_weights(const Vector& w) const;

  ObjectiveKind kind_ = ObjectiveKind::kQuadratic;
  Index dim_ = 0;
  double reg_mu_ = 0.0;
  RowMatrix features_;
  Vector labels_;
  Matrix quad_hessian_;
  Vector quad_linear_;
};

// F(w) = (1/n) sum_i f_i(w).
class GlobalObjective {
 public:
  explicit GlobalObjective(std::vector<LocalObjective> locals);

  Index dim() const { return dim_; }
  std::size_t num_workers() const { return locals_.size(); }
  const LocalObjective& local(std::size_t i) const { return locals_[i]; }
  const std::vector<LocalObjective>& locals() const { return locals_; }

  double value(const Vector& w) const;
  Vector gradient(const Vector& w) const;
  Matrix hessian_dense(const Vector& w,
                       Index cap = kDefaultDenseHessianCap) const;

 private:
  std::vector<LocalObjective> locals_;
  Index dim_ = 0;
};

GlobalObjective make_logistic_objective(const SparseDataset& data,
                                        const Partition& partition,
                                        ObjectiveKind kind, double reg_mu);
GlobalObjective make_quadratic_objective(const QuadraticProblem& problem);

// Upper estimate of the gradient Lipschitz constant of F, valid for every w.
// Logistic kinds: 1/4 lambda_max((1/n) sum_i A_i'A_i / r_i) + 2 mu, the
// data term found by power iteration. Quadratic: lambda_max of the mean
// Hessian by power iteration.
double estimate_smoothness(const GlobalObjective& objective,
                           int iterations = 500, std::uint64_t seed = 0);

}  // namespace flecs

#endif  // FLECS_OBJECTIVE_H_
