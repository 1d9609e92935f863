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

#include "flecs/dataset.h"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>

#include "flecs/rng.h"

namespace flecs {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
         c == '\f';
}

std::string_view next_token(std::string_view line, std::size_t& pos) {
  while (pos < line.size() && is_space(line[pos])) ++pos;
  std::size_t start = pos;
  while (pos < line.size() && !is_space(line[pos])) ++pos;
  return line.substr(start, pos - start);
}

double parse_double(std::string_view tok, std::size_t line_no,
                    const char* what) {
  // from_chars rejects a leading '+', which LIBSVM labels commonly carry.
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
    throw ParseError("line " + std::to_string(line_no) + ": malformed " +
                         what + " '" + std::string(tok) + "'",
                     line_no);
  }
  return value;
}

SparseRow parse_line(std::string_view line, std::size_t line_no,
                     std::int32_t& max_index) {
  std::size_t pos = 0;
  SparseRow row;
  std::string_view label_tok = next_token(line, pos);
  double raw_label = parse_double(label_tok, line_no, "label");
  if (!std::isfinite(raw_label)) {
    throw ParseError("line " + std::to_string(line_no) + ": non-finite label",
                     line_no);
  }
  row.label = raw_label > 0.0 ? 1.0 : -1.0;

  std::int64_t prev = 0;
  for (std::string_view tok = next_token(line, pos); !tok.empty();
       tok = next_token(line, pos)) {
    std::size_t colon = tok.find(':');
    if (colon == std::string_view::npos || colon == 0 ||
        colon + 1 == tok.size()) {
      throw ParseError("line " + std::to_string(line_no) +
                           ": malformed feature token '" + std::string(tok) +
                           "'",
                       line_no);
    }
    std::string_view idx_tok = tok.substr(0, colon);
    std::int64_t idx = 0;
    auto [ptr, ec] =
        std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), idx);
    if (ec != std::errc() || ptr != idx_tok.data() + idx_tok.size() ||
        idx < 1 || idx > std::numeric_limits<std::int32_t>::max()) {
      throw ParseError("line " + std::to_string(line_no) +
                           ": malformed feature index '" +
                           std::string(idx_tok) + "'",
                       line_no);
    }
    if (idx <= prev) {
      throw ParseError("line " + std::to_string(line_no) +
                           ": feature indices must be strictly ascending",
                       line_no);
    }
    prev = idx;
    double value = parse_double(tok.substr(colon + 1), line_no, "value");
    if (!std::isfinite(value)) {
      throw ParseError(
          "line " + std::to_string(line_no) + ": non-finite feature value",
          line_no);
    }
    row.features.emplace_back(static_cast<std::int32_t>(idx - 1), value);
    max_index = std::max(max_index, static_cast<std::int32_t>(idx));
  }
  return row;
}

}  // namespace

SparseDataset::SparseDataset(std::vector<SparseRow> rows,
                             std::int32_t num_features)
    : rows_(std::move(rows)), num_features_(num_features) {
  if (num_features_ <= 0) {
    throw ParseError("dataset must have a positive number of features");
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const SparseRow& r = rows_[i];
    if (r.label != 1.0 && r.label != -1.0) {
      throw ParseError("row " + std::to_string(i) + ": label must be +1 or -1");
    }
    std::int32_t prev = -1;
    for (const auto& [idx, val] : r.features) {
      if (idx <= prev || idx >= num_features_) {
        throw ParseError("row " + std::to_string(i) +
                         ": feature index out of range or not ascending");
      }
      prev = idx;
    }
  }
}

SparseDataset SparseDataset::head(std::size_t count) const {
  count = std::min(count, rows_.size());
  return SparseDataset(
      std::vector<SparseRow>(rows_.begin(), rows_.begin() + count),
      num_features_);
}

SparseDataset SparseDataset::subset(std::span<const std::size_t> indices) const {
  std::vector<SparseRow> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(rows_.at(i));
  return SparseDataset(std::move(out), num_features_);
}

SparseDataset parse_libsvm(std::string_view text,
                           std::optional<std::int32_t> d_hint) {
  std::vector<SparseRow> rows;
  std::int32_t max_index = 0;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    std::size_t probe = 0;
    if (next_token(line, probe).empty()) continue;
    rows.push_back(parse_line(line, line_no, max_index));
  }
  if (rows.empty()) throw ParseError("empty LIBSVM input");
  std::int32_t d = std::max(max_index, d_hint.value_or(0));
  if (d == 0) d = 1;  // rows without any features still need a dimension
  return SparseDataset(std::move(rows), d);
}

SparseDataset load_libsvm(const std::string& path,
                          std::optional<std::int32_t> d_hint) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) {
    throw std::runtime_error("cannot open dataset file '" + path + "'");
  }
  std::string text;
  std::array<char, 1 << 16> buf;
  int got = 0;
  while ((got = gzread(file, buf.data(), static_cast<unsigned>(buf.size()))) >
         0) {
    text.append(buf.data(), static_cast<std::size_t>(got));
  }
  int err = 0;
  const char* msg = gzerror(file, &err);
  std::string err_msg = (got < 0 && msg != nullptr) ? msg : "";
  gzclose(file);
  if (got < 0) {
    throw std::runtime_error("failed reading '" + path + "': " + err_msg);
  }
  return parse_libsvm(text, d_hint);
}

std::string to_libsvm(const SparseDataset& ds) {
  std::string out;
  std::array<char, 64> buf;
  for (const SparseRow& r : ds.rows()) {
    out += r.label > 0 ? "+1" : "-1";
    for (const auto& [idx, val] : r.features) {
      out += ' ';
      out += std::to_string(idx + 1);
      out += ':';
      auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), val);
      out.append(buf.data(), ptr);
    }
    out += '\n';
  }
  return out;
}

PartitionMode parse_partition_mode(std::string_view name) {
  if (name == "contiguous") return PartitionMode::kContiguous;
  if (name == "sorted_by_label") return PartitionMode::kSortedByLabel;
  if (name == "shuffled") return PartitionMode::kShuffled;
  throw ConfigError("unknown partition mode '" + std::string(name) + "'");
}

std::string_view to_string(PartitionMode mode) {
  switch (mode) {
    case PartitionMode::kContiguous:
      return "contiguous";
    case PartitionMode::kSortedByLabel:
      return "sorted_by_label";
    case PartitionMode::kShuffled:
      return "shuffled";
  }
  return "?";
}

Partition partition_rows(const SparseDataset& ds, std::size_t n,
                         PartitionMode mode, std::uint64_t seed) {
  const std::size_t rows = ds.num_rows();
  if (n == 0) throw ConfigError("number of workers must be positive");
  if (n > rows) {
    throw ConfigError("cannot split " + std::to_string(rows) + " rows over " +
                      std::to_string(n) + " workers");
  }
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  switch (mode) {
    case PartitionMode::kContiguous:
      break;
    case PartitionMode::kSortedByLabel:
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) {
                         return ds.row(a).label < ds.row(b).label;
                       });
      break;
    case PartitionMode::kShuffled: {
      Rng rng = keyed_stream(
          {seed, static_cast<std::uint64_t>(StreamDomain::kPartition)});
      std::shuffle(order.begin(), order.end(), rng);
      break;
    }
  }
  Partition part;
  part.assignments.resize(n);
  const std::size_t base = rows / n;
  const std::size_t extra = rows % n;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t len = base + (i < extra ? 1 : 0);
    part.assignments[i].assign(order.begin() + cursor,
                               order.begin() + cursor + len);
    cursor += len;
  }
  return part;
}

QuadraticProblem synthetic_quadratic(Index d, double mu, double lipschitz,
                                     std::size_t n, std::uint64_t seed) {
  if (d <= 0) throw ConfigError("quadratic dimension must be positive");
  if (n == 0) throw ConfigError("number of workers must be positive");
  if (!(mu > 0.0) || !(lipschitz > 0.0)) {
    throw ConfigError("quadratic mu and L must be positive");
  }
  if (mu > lipschitz) throw ConfigError("quadratic requires mu <= L");
  if (d == 1 && mu != lipschitz) {
    throw ConfigError("a 1-dimensional quadratic cannot attain both mu and L");
  }

  Rng rng = keyed_stream(
      {seed, static_cast<std::uint64_t>(StreamDomain::kSynthetic), 1});
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Matrix gauss(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) gauss(i, j) = normal(rng);
  Matrix basis = Eigen::HouseholderQR<Matrix>(gauss).householderQ();

  Vector eig(d);
  eig(0) = mu;
  eig(d - 1) = lipschitz;
  for (Index i = 1; i + 1 < d; ++i) eig(i) = mu + (lipschitz - mu) * unit(rng);
  std::sort(eig.data(), eig.data() + d);

  // Per-worker eigenvalue weights with mean exactly one across workers.
  Matrix weights(d, static_cast<Index>(n));
  for (Index w = 0; w < weights.cols(); ++w)
    for (Index j = 0; j < d; ++j) weights(j, w) = 0.2 + 1.6 * unit(rng);
  for (Index j = 0; j < d; ++j) {
    double mean = weights.row(j).sum() / static_cast<double>(n);
    weights.row(j) /= mean;
  }

  QuadraticProblem prob;
  prob.mu = mu;
  prob.lipschitz = lipschitz;
  prob.mean_hessian = Matrix::Zero(d, d);
  prob.mean_linear_term = Vector::Zero(d);
  for (std::size_t i = 0; i < n; ++i) {
    Vector local_eig = eig.cwiseProduct(weights.col(static_cast<Index>(i)));
    Matrix h = basis * local_eig.asDiagonal() * basis.transpose();
    h = 0.5 * (h + h.transpose()).eval();
    Vector b(d);
    for (Index j = 0; j < d; ++j) b(j) = normal(rng);
    prob.mean_hessian += h;
    prob.mean_linear_term += b;
    prob.hessians.push_back(std::move(h));
    prob.linear_terms.push_back(std::move(b));
  }
  prob.mean_hessian /= static_cast<double>(n);
  prob.mean_linear_term /= static_cast<double>(n);
  prob.minimizer = prob.mean_hessian.ldlt().solve(prob.mean_linear_term);
  return prob;
}

SparseDataset adult_like(std::size_t num_rows, std::uint64_t seed) {
  // Attribute groups of the Adult census data after a9a's one-hot encoding:
  // age, workclass, fnlwgt, education, education-num, marital-status,
  // occupation, relationship, race, sex, capital-gain, capital-loss,
  // hours-per-week, native-country.
  constexpr std::array<int, 14> kGroupSizes = {5, 8, 5,  16, 5, 7, 14,
                                               6, 5, 2, 2, 2, 5, 41};
  // Probability that the attribute is unknown (no feature emitted).
  constexpr std::array<double, 14> kMissing = {0,     0.056, 0, 0, 0, 0, 0.057,
                                               0,     0,     0, 0, 0, 0, 0.018};

  Rng rng = keyed_stream(
      {seed, static_cast<std::uint64_t>(StreamDomain::kSynthetic), 2});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<std::discrete_distribution<int>> category;
  std::vector<double> theta;
  for (int g : kGroupSizes) {
    std::vector<double> w(static_cast<std::size_t>(g));
    for (int c = 0; c < g; ++c) {
      w[static_cast<std::size_t>(c)] = std::exp(-0.45 * c) * (0.5 + unit(rng));
    }
    category.emplace_back(w.begin(), w.end());
    for (int c = 0; c < g; ++c) theta.push_back(1.1 * normal(rng));
  }
  const double bias = -1.6;

  std::vector<SparseRow> rows;
  rows.reserve(num_rows);
  for (std::size_t r = 0; r < num_rows; ++r) {
    SparseRow row;
    int offset = 0;
    double margin = bias;
    for (std::size_t g = 0; g < kGroupSizes.size(); ++g) {
      bool missing = unit(rng) < kMissing[g];
      int c = category[g](rng);
      if (!missing) {
        row.features.emplace_back(offset + c, 1.0);
        margin += theta[static_cast<std::size_t>(offset + c)];
      }
      offset += kGroupSizes[g];
    }
    double p = 1.0 / (1.0 + std::exp(-margin));
    row.label = unit(rng) < p ? 1.0 : -1.0;
    rows.push_back(std::move(row));
  }
  return SparseDataset(std::move(rows), kAdultFeatures);
}

}  // namespace flecs
