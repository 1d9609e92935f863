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

#include "flecs/sketch.h"

#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "flecs/rng.h"

namespace flecs {

SketchFamily parse_sketch_family(std::string_view name) {
  if (name == "gaussian") return SketchFamily::kGaussian;
  if (name == "coordinate") return SketchFamily::kCoordinate;
  throw ConfigError("unknown sketch family '" + std::string(name) + "'");
}

std::string_view to_string(SketchFamily family) {
  return family == SketchFamily::kGaussian ? "gaussian" : "coordinate";
}

Matrix sketch_at(const SketchSpec& spec, std::uint64_t k, Index d,
                 std::uint64_t salt) {
  if (spec.m < 1) throw ConfigError("sketch size m must be >= 1");
  if (spec.m > d) {
    throw ConfigError("sketch size m=" + std::to_string(spec.m) +
                      " exceeds dimension d=" + std::to_string(d));
  }
  Rng rng = keyed_stream({spec.run_seed,
                          static_cast<std::uint64_t>(StreamDomain::kSketch), k,
                          salt});
  Matrix s = Matrix::Zero(d, spec.m);
  if (spec.family == SketchFamily::kGaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index j = 0; j < spec.m; ++j)
      for (Index i = 0; i < d; ++i) s(i, j) = normal(rng);
    return s;
  }
  // m distinct coordinates by a partial Fisher-Yates shuffle.
  std::vector<Index> coords(static_cast<std::size_t>(d));
  std::iota(coords.begin(), coords.end(), Index{0});
  for (Index j = 0; j < spec.m; ++j) {
    std::uniform_int_distribution<Index> pick(j, d - 1);
    std::swap(coords[static_cast<std::size_t>(j)],
              coords[static_cast<std::size_t>(pick(rng))]);
    s(coords[static_cast<std::size_t>(j)], j) = 1.0;
  }
  return s;
}

bool rank_check(const Matrix& sketch) {
  if (sketch.cols() == 0 || sketch.rows() < sketch.cols()) return false;
  Eigen::JacobiSVD<Matrix> svd(sketch);
  const Vector& sv = svd.singularValues();
  const double largest = sv(0);
  const double smallest = sv(sv.size() - 1);
  return largest > 0.0 && smallest > 1e-10 * largest;
}

Matrix shared_sketch(const SketchSpec& spec, std::uint64_t k, Index d) {
  constexpr std::uint64_t kMaxAttempts = 16;
  for (std::uint64_t salt = 0; salt < kMaxAttempts; ++salt) {
    Matrix s = sketch_at(spec, k, d, salt);
    if (rank_check(s)) return s;
    spdlog::warn("sketch at iteration {} is rank deficient; resampling "
                 "with salt {}",
                 k, salt + 1);
  }
  throw NumericError("could not draw a full-rank sketch at iteration " +
                     std::to_string(k));
}

}  // namespace flecs
