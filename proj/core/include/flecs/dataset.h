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

#ifndef FLECS_DATASET_H_
#define FLECS_DATASET_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flecs/common.h"

namespace flecs {

struct SparseRow {
  double label = 1.0;  // always -1 or +1
  // (0-based feature index, value), strictly ascending by index.
  std::vector<std::pair<std::int32_t, double>> features;

  bool operator==(const SparseRow&) const = default;
};

// Labelled sparse rows. Read-only once built.
class SparseDataset {
 public:
  SparseDataset() = default;
  // Validates the invariants: labels in {-1,+1}, indices in [0, d),
  // strictly ascending within each row.
  SparseDataset(std::vector<SparseRow> rows, std::int32_t num_features);

  std::size_t num_rows() const { return rows_.size(); }
  std::int32_t num_features() const { return num_features_; }
  const std::vector<SparseRow>& rows() const { return rows_; }
  const SparseRow& row(std::size_t i) const { return rows_[i]; }

  // Keeps the first `count` rows (all rows if count >= num_rows()).
  SparseDataset head(std::size_t count) const;
  SparseDataset subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<SparseRow> rows_;
  std::int32_t num_features_ = 0;
};

// Parses LIBSVM text: `label idx:val idx:val ...`, 1-based ascending
// indices. Labels are mapped by sign (> 0 -> +1, otherwise -1) so 0/1 coded
// files work. d is the largest observed index, or d_hint if larger.
SparseDataset parse_libsvm(std::string_view text,
                           std::optional<std::int32_t> d_hint = std::nullopt);

// Reads a LIBSVM file from disk; gzip-compressed files are detected by their
// magic bytes and decompressed transparently.
SparseDataset load_libsvm(const std::string& path,
                          std::optional<std::int32_t> d_hint = std::nullopt);

// Inverse of parse_libsvm (values printed with round-trip precision).
std::string to_libsvm(const SparseDataset& ds);

enum class PartitionMode { kContiguous, kSortedByLabel, kShuffled };

PartitionMode parse_partition_mode(std::string_view name);
std::string_view to_string(PartitionMode mode);

struct Partition {
  std::vector<std::vector<std::size_t>> assignments;

  std::size_t num_workers() const { return assignments.size(); }
};

// Splits rows over n workers. Blocks are consecutive with the remainder
// going to the earliest workers. `seed` is only used by kShuffled.
Partition partition_rows(const SparseDataset& ds, std::size_t n,
                         PartitionMode mode, std::uint64_t seed = 0);

// Quadratic federation: f_i(w) = 1/2 w'H_i w - b_i'w. The average Hessian
// has its spectrum in [mu, L] with both ends attained.
struct QuadraticProblem {
  std::vector<Matrix> hessians;
  std::vector<Vector> linear_terms;
  Matrix mean_hessian;
  Vector mean_linear_term;
  Vector minimizer;  // solves mean_hessian * w = mean_linear_term
  double mu = 0.0;
  double lipschitz = 0.0;

  Index dim() const { return mean_hessian.rows(); }
  std::size_t num_workers() const { return hessians.size(); }
};

QuadraticProblem synthetic_quadratic(Index d, double mu, double lipschitz,
                                     std::size_t n, std::uint64_t seed);

// Deterministic stand-in with the layout of the LIBSVM "a9a" set: the 14
// one-hot encoded attribute groups of the UCI Adult census data (123 binary
// features) with noisy logistic labels. Used when the real file is absent.
SparseDataset adult_like(std::size_t num_rows, std::uint64_t seed);

inline constexpr std::size_t kAdultRows = 32561;
inline constexpr std::int32_t kAdultFeatures = 123;

}  // namespace flecs

#endif  // FLECS_DATASET_H_
