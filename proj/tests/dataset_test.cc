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

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include <gtest/gtest.h>
#include <zlib.h>

#include "flecs/dataset.h"
#include "test_util.h"

namespace flecs {
namespace {

TEST(ParseLibsvm, SingleRow) {
  SparseDataset ds = parse_libsvm("+1 1:0.5 3:2\n");
  ASSERT_EQ(ds.num_rows(), 1u);
  EXPECT_EQ(ds.num_features(), 3);
  EXPECT_EQ(ds.row(0).label, 1.0);
  ASSERT_EQ(ds.row(0).features.size(), 2u);
  EXPECT_EQ(ds.row(0).features[0], (std::pair<std::int32_t, double>{0, 0.5}));
  EXPECT_EQ(ds.row(0).features[1], (std::pair<std::int32_t, double>{2, 2.0}));
}

TEST(ParseLibsvm, EmptyFeatureList) {
  SparseDataset ds = parse_libsvm("-1");
  ASSERT_EQ(ds.num_rows(), 1u);
  EXPECT_EQ(ds.row(0).label, -1.0);
  EXPECT_TRUE(ds.row(0).features.empty());
}

TEST(ParseLibsvm, DimensionIsMaxIndex) {
  SparseDataset ds = parse_libsvm("+1 2:1\n-1 1:3\n");
  EXPECT_EQ(ds.num_rows(), 2u);
  EXPECT_EQ(ds.num_features(), 2);
}

TEST(ParseLibsvm, DimensionHintOnlyGrows) {
  EXPECT_EQ(parse_libsvm("+1 2:1\n", 123).num_features(), 123);
  EXPECT_EQ(parse_libsvm("+1 7:1\n", 3).num_features(), 7);
}

TEST(ParseLibsvm, ZeroOneLabelsMapToSigns) {
  SparseDataset ds = parse_libsvm("1 1:1\n0 1:1\n");
  EXPECT_EQ(ds.row(0).label, 1.0);
  EXPECT_EQ(ds.row(1).label, -1.0);
}

TEST(ParseLibsvm, ToleratesBlankLinesAndCrlf) {
  SparseDataset ds = parse_libsvm("+1 1:1\r\n\n-1 2:1\r\n");
  EXPECT_EQ(ds.num_rows(), 2u);
}

TEST(ParseLibsvm, ErrorsCarryLineNumbers) {
  struct Case {
    const char* text;
    std::size_t line;
  };
  const Case cases[] = {
      {"+1 1:1\n+1 0:1\n", 2},     // zero index
      {"+1 3:1 2:1\n", 1},         // descending
      {"+1 1:1\n\n+1 2:x\n", 3},   // bad value
      {"abc 1:1\n", 1},            // bad label
      {"+1 1:1 1:2\n", 1},         // duplicate index
      {"+1 5\n", 1},               // missing colon
  };
  for (const Case& c : cases) {
    try {
      parse_libsvm(c.text);
      ADD_FAILURE() << "no error for: " << c.text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), c.line) << c.text;
    }
  }
}

TEST(ParseLibsvm, EmptyInputIsAnError) {
  EXPECT_THROW(parse_libsvm(""), ParseError);
  EXPECT_THROW(parse_libsvm("\n\n"), ParseError);
}

TEST(ParseLibsvm, RoundTripProperty) {
  testing::TestRng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = rng.integer(1, 40);
    const int rows = rng.integer(1, 30);
    std::vector<SparseRow> data;
    for (int r = 0; r < rows; ++r) {
      SparseRow row;
      row.label = rng.uniform(0, 1) < 0.5 ? -1.0 : 1.0;
      for (int j = 0; j < d; ++j) {
        if (rng.uniform(0, 1) < 0.3) {
          row.features.emplace_back(j, rng.uniform(-1e3, 1e3));
        }
      }
      data.push_back(row);
    }
    SparseDataset ds(data, d);
    SparseDataset back = parse_libsvm(to_libsvm(ds), d);
    ASSERT_EQ(back.num_rows(), ds.num_rows());
    EXPECT_EQ(back.num_features(), ds.num_features());
    for (std::size_t r = 0; r < ds.num_rows(); ++r) {
      EXPECT_EQ(back.row(r), ds.row(r));
    }
  }
}

TEST(SparseDataset, RejectsBrokenInvariants) {
  EXPECT_THROW(SparseDataset({SparseRow{0.5, {}}}, 2), ParseError);
  EXPECT_THROW(SparseDataset({SparseRow{1.0, {{2, 1.0}}}}, 2), ParseError);
  EXPECT_THROW(SparseDataset({SparseRow{1.0, {{1, 1.0}, {0, 1.0}}}}, 2),
               ParseError);
}

TEST(LoadLibsvm, ReadsPlainAndGzip) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "flecs_dataset_test";
  fs::create_directories(dir);
  const std::string text = "+1 1:1 4:0.25\n-1 2:3\n";
  const fs::path plain = dir / "plain.txt";
  std::ofstream(plain) << text;
  const fs::path gz = dir / "data.gz";
  gzFile f = gzopen(gz.c_str(), "wb");
  ASSERT_NE(f, nullptr);
  gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
  gzclose(f);

  SparseDataset a = load_libsvm(plain.string());
  SparseDataset b = load_libsvm(gz.string());
  ASSERT_EQ(a.num_rows(), 2u);
  EXPECT_EQ(a.num_features(), 4);
  for (std::size_t r = 0; r < a.num_rows(); ++r) EXPECT_EQ(a.row(r), b.row(r));
  EXPECT_THROW(load_libsvm((dir / "missing.txt").string()), std::runtime_error);
  fs::remove_all(dir);
}

SparseDataset labelled(const std::vector<double>& labels) {
  std::vector<SparseRow> rows;
  for (double l : labels) rows.push_back(SparseRow{l, {}});
  return SparseDataset(rows, 1);
}

TEST(PartitionRows, ContiguousBlocks) {
  SparseDataset ds = labelled(std::vector<double>(10, 1.0));
  Partition p = partition_rows(ds, 2, PartitionMode::kContiguous);
  ASSERT_EQ(p.num_workers(), 2u);
  EXPECT_EQ(p.assignments[0], (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(p.assignments[1], (std::vector<std::size_t>{5, 6, 7, 8, 9}));
}

TEST(PartitionRows, RemainderGoesToEarliestWorkers) {
  SparseDataset ds = labelled(std::vector<double>(11, 1.0));
  Partition p = partition_rows(ds, 3, PartitionMode::kContiguous);
  EXPECT_EQ(p.assignments[0].size(), 4u);
  EXPECT_EQ(p.assignments[1].size(), 4u);
  EXPECT_EQ(p.assignments[2].size(), 3u);
}

TEST(PartitionRows, SortedByLabel) {
  SparseDataset ds = labelled({1, -1, 1, -1});
  Partition p = partition_rows(ds, 2, PartitionMode::kSortedByLabel);
  for (std::size_t r : p.assignments[0]) EXPECT_EQ(ds.row(r).label, -1.0);
  for (std::size_t r : p.assignments[1]) EXPECT_EQ(ds.row(r).label, 1.0);
}

TEST(PartitionRows, SingleWorkerHoldsEverything) {
  SparseDataset ds = labelled({1, -1, 1, -1, 1});
  for (PartitionMode mode :
       {PartitionMode::kContiguous, PartitionMode::kSortedByLabel,
        PartitionMode::kShuffled}) {
    Partition p = partition_rows(ds, 1, mode, 3);
    ASSERT_EQ(p.num_workers(), 1u);
    std::vector<std::size_t> all = p.assignments[0];
    std::sort(all.begin(), all.end());
    EXPECT_EQ(all, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  }
}

TEST(PartitionRows, TooManyWorkers) {
  SparseDataset ds = labelled({1, -1});
  EXPECT_THROW(partition_rows(ds, 3, PartitionMode::kContiguous), ConfigError);
  EXPECT_THROW(partition_rows(ds, 0, PartitionMode::kContiguous), ConfigError);
}

TEST(PartitionRows, ShuffledIsSeeded) {
  SparseDataset ds = labelled(std::vector<double>(50, 1.0));
  Partition a = partition_rows(ds, 4, PartitionMode::kShuffled, 11);
  Partition b = partition_rows(ds, 4, PartitionMode::kShuffled, 11);
  Partition c = partition_rows(ds, 4, PartitionMode::kShuffled, 12);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_NE(a.assignments, c.assignments);
}

TEST(PartitionRows, DisjointCoverProperty) {
  testing::TestRng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = rng.integer(1, 120);
    const int n = rng.integer(1, rows);
    std::vector<double> labels;
    for (int r = 0; r < rows; ++r) labels.push_back(rng.integer(0, 1) ? 1 : -1);
    SparseDataset ds = labelled(labels);
    for (PartitionMode mode :
         {PartitionMode::kContiguous, PartitionMode::kSortedByLabel,
          PartitionMode::kShuffled}) {
      Partition p = partition_rows(ds, n, mode, trial);
      ASSERT_EQ(p.num_workers(), static_cast<std::size_t>(n));
      std::vector<int> seen(rows, 0);
      std::size_t smallest = rows, largest = 0;
      for (const auto& a : p.assignments) {
        smallest = std::min(smallest, a.size());
        largest = std::max(largest, a.size());
        for (std::size_t r : a) {
          ASSERT_LT(r, static_cast<std::size_t>(rows));
          ++seen[r];
        }
      }
      EXPECT_TRUE(std::all_of(seen.begin(), seen.end(),
                              [](int c) { return c == 1; }));
      EXPECT_LE(largest - smallest, 1u);
    }
  }
}

TEST(PartitionMode, NamesRoundTrip) {
  for (PartitionMode mode :
       {PartitionMode::kContiguous, PartitionMode::kSortedByLabel,
        PartitionMode::kShuffled}) {
    EXPECT_EQ(parse_partition_mode(to_string(mode)), mode);
  }
  EXPECT_THROW(parse_partition_mode("random"), ConfigError);
}

TEST(SyntheticQuadratic, IsotropicCase) {
  QuadraticProblem q = synthetic_quadratic(2, 1.0, 1.0, 1, 5);
  EXPECT_LE((q.mean_hessian - Matrix::Identity(2, 2)).norm(), 1e-12);
  EXPECT_LE((q.minimizer - q.mean_linear_term).norm(), 1e-12);
}

TEST(SyntheticQuadratic, SpectrumAttainsBothEnds) {
  for (std::uint64_t seed : {0u, 1u, 2u, 99u}) {
    QuadraticProblem q = synthetic_quadratic(12, 0.01, 3.0, 5, seed);
    Eigen::SelfAdjointEigenSolver<Matrix> es(q.mean_hessian);
    EXPECT_NEAR(es.eigenvalues().minCoeff(), 0.01, 1e-12);
    EXPECT_NEAR(es.eigenvalues().maxCoeff(), 3.0, 1e-12);
    for (const Matrix& h : q.hessians) {
      EXPECT_LE((h - h.transpose()).norm(), 1e-14);
      EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(h).eigenvalues()
                    .minCoeff(), -1e-12);
    }
  }
}

TEST(SyntheticQuadratic, MinimizerHasZeroGradient) {
  QuadraticProblem q = synthetic_quadratic(20, 0.1, 10.0, 3, 4);
  // Independent solve: full-pivot LU of the mean Hessian.
  Vector w = q.mean_hessian.fullPivLu().solve(q.mean_linear_term);
  EXPECT_LE((q.mean_hessian * q.minimizer - q.mean_linear_term).norm(), 1e-10);
  EXPECT_LE((w - q.minimizer).norm(), 1e-9);
}

TEST(SyntheticQuadratic, RejectsBadParameters) {
  EXPECT_THROW(synthetic_quadratic(4, 2.0, 1.0, 1, 0), ConfigError);
  EXPECT_THROW(synthetic_quadratic(4, 0.0, 1.0, 1, 0), ConfigError);
  EXPECT_THROW(synthetic_quadratic(4, 1.0, 2.0, 0, 0), ConfigError);
}

TEST(AdultLike, ShapeAndDeterminism) {
  SparseDataset a = adult_like(500, 1);
  SparseDataset b = adult_like(500, 1);
  EXPECT_EQ(a.num_rows(), 500u);
  EXPECT_EQ(a.num_features(), kAdultFeatures);
  std::set<double> labels;
  for (std::size_t r = 0; r < a.num_rows(); ++r) {
    EXPECT_EQ(a.row(r), b.row(r));
    labels.insert(a.row(r).label);
    EXPECT_LE(a.row(r).features.size(), 14u);
    for (const auto& [j, v] : a.row(r).features) EXPECT_EQ(v, 1.0);
  }
  EXPECT_EQ(labels.size(), 2u);
}

}  // namespace
}  // namespace flecs
