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

#include "flecs/objective.h"

#include <cmath>
#include <random>
#include <string>

#include "flecs/rng.h"

namespace flecs {

ObjectiveKind parse_objective_kind(std::string_view name) {
  if (name == "logreg_l2") return ObjectiveKind::kLogregL2;
  if (name == "logreg_nonconvex") return ObjectiveKind::kLogregNonconvex;
  if (name == "quadratic") return ObjectiveKind::kQuadratic;
  throw ConfigError("unknown objective kind '" + std::string(name) + "'");
}

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kLogregL2:
      return "logreg_l2";
    case ObjectiveKind::kLogregNonconvex:
      return "logreg_nonconvex";
    case ObjectiveKind::kQuadratic:
      return "quadratic";
  }
  return "?";
}

double log1p_exp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

LocalObjective LocalObjective::logistic(const SparseDataset& data,
                                        double reg_mu, bool nonconvex) {
  if (!(reg_mu >= 0.0)) throw ConfigError("regularization mu must be >= 0");
  if (data.num_rows() == 0) throw ConfigError("worker holds no rows");
  LocalObjective f;
  f.kind_ = nonconvex ? ObjectiveKind::kLogregNonconvex
                      : ObjectiveKind::kLogregL2;
  f.dim_ = data.num_features();
  f.reg_mu_ = reg_mu;
  std::vector<Eigen::Triplet<double>> trips;
  f.labels_.resize(static_cast<Index>(data.num_rows()));
  for (std::size_t r = 0; r < data.num_rows(); ++r) {
    const SparseRow& row = data.row(r);
    f.labels_(static_cast<Index>(r)) = row.label;
    for (const auto& [idx, val] : row.features) {
      trips.emplace_back(static_cast<Index>(r), idx, val);
    }
  }
  f.features_.resize(static_cast<Index>(data.num_rows()), f.dim_);
  f.features_.setFromTriplets(trips.begin(), trips.end());
  f.features_.makeCompressed();
  return f;
}

LocalObjective LocalObjective::quadratic(Matrix hessian, Vector linear_term) {
  if (hessian.rows() != hessian.cols() ||
      hessian.rows() != linear_term.size()) {
    throw ConfigError("quadratic objective dimensions disagree");
  }
  LocalObjective f;
  f.kind_ = ObjectiveKind::kQuadratic;
  f.dim_ = hessian.rows();
  f.quad_hessian_ = std::move(hessian);
  f.quad_linear_ = std::move(linear_term);
  return f;
}

void LocalObjective::check_point(const Vector& w) const {
  if (w.size() != dim_) {
    throw NumericError("point has dimension " + std::to_string(w.size()) +
                       ", objective expects " + std::to_string(dim_));
  }
  if (!w.allFinite()) throw NumericError("objective evaluated at non-finite w");
}

double LocalObjective::value(const Vector& w) const {
  check_point(w);
  if (kind_ == ObjectiveKind::kQuadratic) {
    return 0.5 * w.dot(quad_hessian_ * w) - quad_linear_.dot(w);
  }
  Vector margins = features_ * w;
  double loss = 0.0;
  for (Index j = 0; j < margins.size(); ++j) {
    loss += log1p_exp(-labels_(j) * margins(j));
  }
  loss /= static_cast<double>(margins.size());
  if (kind_ == ObjectiveKind::kLogregL2) return loss + reg_mu_ * w.squaredNorm();
  double reg = 0.0;
  for (Index t = 0; t < w.size(); ++t) {
    double sq = w(t) * w(t);
    reg += sq / (1.0 + sq);
  }
  return loss + reg_mu_ * reg;
}

Vector LocalObjective::gradient(const Vector& w) const {
  check_point(w);
  if (kind_ == ObjectiveKind::kQuadratic) return quad_hessian_ * w - quad_linear_;
  Vector margins = features_ * w;
  const double inv_r = 1.0 / static_cast<double>(margins.size());
  Vector coef(margins.size());
  for (Index j = 0; j < margins.size(); ++j) {
    coef(j) = -labels_(j) * sigmoid(-labels_(j) * margins(j)) * inv_r;
  }
  Vector g = features_.transpose() * coef;
  if (kind_ == ObjectiveKind::kLogregL2) {
    g += 2.0 * reg_mu_ * w;
  } else {
    for (Index t = 0; t < w.size(); ++t) {
      double q = 1.0 + w(t) * w(t);
      g(t) += reg_mu_ * 2.0 * w(t) / (q * q);
    }
  }
  return g;
}

Vector LocalObjective::curvature_weights(const Vector& w) const {
  Vector margins = features_ * w;
  const double inv_r = 1.0 / static_cast<double>(margins.size());
  Vector weights(margins.size());
  for (Index j = 0; j < margins.size(); ++j) {
    weights(j) = sigmoid(margins(j)) * sigmoid(-margins(j)) * inv_r;
  }
  return weights;
}

Matrix LocalObjective::hessian_sketch(const Vector& w, const Matrix& sketch,
                                      std::uint64_t* hvp_counter) const {
  check_point(w);
  if (sketch.rows() != dim_) {
    throw NumericError("sketch has " + std::to_string(sketch.rows()) +
                       " rows, objective dimension is " +
                       std::to_string(dim_));
  }
  if (sketch.cols() > dim_) {
    throw NumericError("sketch has more columns than the dimension");
  }
  Matrix y;
  if (kind_ == ObjectiveKind::kQuadratic) {
    y = quad_hessian_ * sketch;
  } else {
    Vector weights = curvature_weights(w);
    Matrix projected = features_ * sketch;  // r x m
    projected = weights.asDiagonal() * projected;
    y = features_.transpose() * projected;
    if (kind_ == ObjectiveKind::kLogregL2) {
      y += 2.0 * reg_mu_ * sketch;
    } else {
      for (Index t = 0; t < dim_; ++t) {
        double sq = w(t) * w(t);
        double q = 1.0 + sq;
        y.row(t) += reg_mu_ * (2.0 - 6.0 * sq) / (q * q * q) * sketch.row(t);
      }
    }
  }
  if (hvp_counter != nullptr) {
    *hvp_counter += static_cast<std::uint64_t>(sketch.cols());
  }
  return y;
}

Vector LocalObjective::hessian_vector(const Vector& w, const Vector& v) const {
  return hessian_sketch(w, v);
}

Matrix LocalObjective::hessian_dense(const Vector& w, Index cap) const {
  check_point(w);
  if (dim_ > cap) {
    throw ConfigError("dense Hessian of dimension " + std::to_string(dim_) +
                      " exceeds the cap of " + std::to_string(cap) +
                      "; use the sketched (FedSONIA) path instead");
  }
  if (kind_ == ObjectiveKind::kQuadratic) return quad_hessian_;
  Vector weights = curvature_weights(w);
  RowMatrix weighted = weights.asDiagonal() * features_;
  Matrix h = Matrix(RowMatrix(features_.transpose() * weighted));
  if (kind_ == ObjectiveKind::kLogregL2) {
    h.diagonal().array() += 2.0 * reg_mu_;
  } else {
    for (Index t = 0; t < dim_; ++t) {
      double sq = w(t) * w(t);
      double q = 1.0 + sq;
      h(t, t) += reg_mu_ * (2.0 - 6.0 * sq) / (q * q * q);
    }
  }
  return 0.5 * (h + h.transpose());
}

GlobalObjective::GlobalObjective(std::vector<LocalObjective> locals)
    : locals_(std::move(locals)) {
  if (locals_.empty()) throw ConfigError("objective needs at least one worker");
  dim_ = locals_.front().dim();
  for (const LocalObjective& f : locals_) {
    if (f.dim() != dim_ || f.kind() != locals_.front().kind() ||
        f.reg_mu() != locals_.front().reg_mu()) {
      throw ConfigError("local objectives disagree on kind, dimension or mu");
    }
  }
}

double GlobalObjective::value(const Vector& w) const {
  double total = 0.0;
  for (const LocalObjective& f : locals_) total += f.value(w);
  return total / static_cast<double>(locals_.size());
}

Vector GlobalObjective::gradient(const Vector& w) const {
  Vector g = Vector::Zero(dim_);
  for (const LocalObjective& f : locals_) g += f.gradient(w);
  return g / static_cast<double>(locals_.size());
}

Matrix GlobalObjective::hessian_dense(const Vector& w, Index cap) const {
  Matrix h = Matrix::Zero(dim_, dim_);
  for (const LocalObjective& f : locals_) h += f.hessian_dense(w, cap);
  return h / static_cast<double>(locals_.size());
}

GlobalObjective make_logistic_objective(const SparseDataset& data,
                                        const Partition& partition,
                                        ObjectiveKind kind, double reg_mu) {
  if (kind == ObjectiveKind::kQuadratic) {
    throw ConfigError("quadratic objectives are built from a QuadraticProblem");
  }
  std::vector<LocalObjective> locals;
  locals.reserve(partition.num_workers());
  for (const auto& rows : partition.assignments) {
    locals.push_back(LocalObjective::logistic(
        data.subset(rows), reg_mu, kind == ObjectiveKind::kLogregNonconvex));
  }
  return GlobalObjective(std::move(locals));
}

GlobalObjective make_quadratic_objective(const QuadraticProblem& problem) {
  std::vector<LocalObjective> locals;
  for (std::size_t i = 0; i < problem.num_workers(); ++i) {
    locals.push_back(LocalObjective::quadratic(problem.hessians[i],
                                               problem.linear_terms[i]));
  }
  return GlobalObjective(std::move(locals));
}

double estimate_smoothness(const GlobalObjective& objective, int iterations,
                           std::uint64_t seed) {
  const Index d = objective.dim();
  const bool logistic =
      objective.local(0).kind() != ObjectiveKind::kQuadratic;
  // The Gram operator of the data, or the mean quadratic Hessian. Both are
  // symmetric PSD, so power iteration converges to lambda_max.
  const Vector zero = Vector::Zero(d);
  auto apply = [&](const Vector& v) {
    Vector out = Vector::Zero(d);
    for (const LocalObjective& f : objective.locals()) {
      if (logistic) {
        // At w = 0 every sigma' weight is exactly 1/4 and both regularizers
        // have Hessian 2 mu I, which is stripped here.
        Vector hv = f.hessian_vector(zero, v) - 2.0 * f.reg_mu() * v;
        out += 4.0 * hv;
      } else {
        out += f.hessian_vector(zero, v);
      }
    }
    return Vector(out / static_cast<double>(objective.num_workers()));
  };

  Rng rng = keyed_stream({seed, 0x706f776572});  // "power"
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(d);
  for (Index i = 0; i < d; ++i) v(i) = normal(rng);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector av = apply(v);
    lambda = v.dot(av);
    double norm = av.norm();
    if (norm == 0.0) break;
    v = av / norm;
  }
  if (!logistic) return lambda;
  return 0.25 * lambda + 2.0 * objective.local(0).reg_mu();
}

}  // namespace flecs
