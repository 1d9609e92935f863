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

#include "flecs/compress.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <spdlog/spdlog.h>

namespace flecs {
namespace {

std::uint64_t clamp_k(const CompressorSpec& spec, Index rows, Index cols) {
  const auto total = static_cast<std::uint64_t>(rows * cols);
  if (spec.k > total) {
    spdlog::warn("compressor K={} exceeds the {} entries of a {}x{} matrix; "
                 "clamping",
                 spec.k, total, rows, cols);
    return total;
  }
  return spec.k;
}

void check_spec(const CompressorSpec& spec) {
  if ((spec.kind == CompressorKind::kTopK ||
       spec.kind == CompressorKind::kRandK) &&
      spec.k < 1) {
    throw ConfigError("compressor K must be >= 1");
  }
  if (spec.kind == CompressorKind::kDither && spec.levels < 1) {
    throw ConfigError("dithering needs s >= 1 levels");
  }
}

}  // namespace

CompressorKind parse_compressor_kind(std::string_view name) {
  if (name == "identity" || name == "none") return CompressorKind::kIdentity;
  if (name == "top_k") return CompressorKind::kTopK;
  if (name == "rand_k") return CompressorKind::kRandK;
  if (name == "dither") return CompressorKind::kDither;
  throw ConfigError("unknown compressor '" + std::string(name) + "'");
}

std::string_view to_string(CompressorKind kind) {
  switch (kind) {
    case CompressorKind::kIdentity:
      return "identity";
    case CompressorKind::kTopK:
      return "top_k";
    case CompressorKind::kRandK:
      return "rand_k";
    case CompressorKind::kDither:
      return "dither";
  }
  return "?";
}

std::uint64_t ceil_log2(std::uint64_t x) {
  std::uint64_t bits = 0;
  while ((std::uint64_t{1} << bits) < x) ++bits;
  return bits;
}

std::uint64_t compressed_bits(const CompressorSpec& spec, Index rows,
                              Index cols) {
  const auto r = static_cast<std::uint64_t>(rows);
  const auto c = static_cast<std::uint64_t>(cols);
  switch (spec.kind) {
    case CompressorKind::kIdentity:
      return kFloatBits * r * c;
    case CompressorKind::kTopK:
    case CompressorKind::kRandK: {
      std::uint64_t k = std::min<std::uint64_t>(spec.k, r * c);
      return k * (kFloatBits + ceil_log2(r * c));
    }
    case CompressorKind::kDither:
      return c * (kFloatBits + r * (1 + ceil_log2(spec.levels + 1ULL)));
  }
  return 0;
}

CompressedBlock compress(const CompressorSpec& spec, const Matrix& x,
                         Rng& rng) {
  check_spec(spec);
  if (!x.allFinite()) throw NumericError("compress: non-finite input");
  CompressedBlock block;
  block.kind = spec.kind;
  block.rows = x.rows();
  block.cols = x.cols();
  const Index total = x.size();
  const double* flat = x.data();  // column-major

  switch (spec.kind) {
    case CompressorKind::kIdentity:
      block.dense.assign(flat, flat + total);
      break;

    case CompressorKind::kTopK: {
      const std::uint64_t k = clamp_k(spec, x.rows(), x.cols());
      std::vector<std::uint64_t> order(static_cast<std::size_t>(total));
      std::iota(order.begin(), order.end(), std::uint64_t{0});
      auto before = [flat](std::uint64_t a, std::uint64_t b) {
        double fa = std::abs(flat[a]);
        double fb = std::abs(flat[b]);
        return fa > fb || (fa == fb && a < b);
      };
      std::nth_element(order.begin(), order.begin() + static_cast<long>(k),
                       order.end(), before);
      order.resize(static_cast<std::size_t>(k));
      std::sort(order.begin(), order.end());
      block.indices = order;
      for (std::uint64_t idx : order) block.values.push_back(flat[idx]);
      break;
    }

    case CompressorKind::kRandK: {
      const std::uint64_t k = clamp_k(spec, x.rows(), x.cols());
      std::vector<std::uint64_t> pool(static_cast<std::size_t>(total));
      std::iota(pool.begin(), pool.end(), std::uint64_t{0});
      for (std::uint64_t j = 0; j < k; ++j) {
        std::uniform_int_distribution<std::uint64_t> pick(
            j, static_cast<std::uint64_t>(total) - 1);
        std::swap(pool[j], pool[pick(rng)]);
      }
      pool.resize(static_cast<std::size_t>(k));
      std::sort(pool.begin(), pool.end());
      const double scale = static_cast<double>(total) / static_cast<double>(k);
      block.indices = pool;
      for (std::uint64_t idx : pool) block.values.push_back(flat[idx] * scale);
      break;
    }

    case CompressorKind::kDither: {
      const double s = static_cast<double>(spec.levels);
      block.levels = spec.levels;
      block.column_norms.resize(static_cast<std::size_t>(x.cols()));
      block.negative.assign(static_cast<std::size_t>(total), 0);
      block.level_codes.assign(static_cast<std::size_t>(total), 0);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (Index c = 0; c < x.cols(); ++c) {
        const double norm = x.col(c).cwiseAbs().maxCoeff();
        block.column_norms[static_cast<std::size_t>(c)] = norm;
        if (norm == 0.0) continue;
        for (Index r = 0; r < x.rows(); ++r) {
          const auto flat_idx = static_cast<std::size_t>(c * x.rows() + r);
          const double v = x(r, c);
          const double scaled = s * (std::abs(v) / norm);
          double lower = std::floor(scaled);
          const double frac = scaled - lower;
          // Stochastic rounding; frac == 0 never rounds up.
          if (frac > 0.0 && unit(rng) < frac) lower += 1.0;
          block.level_codes[flat_idx] =
              static_cast<std::uint32_t>(std::min(lower, s));
          block.negative[flat_idx] = v < 0.0 ? 1 : 0;
        }
      }
      break;
    }
  }
  block.bit_cost = compressed_bits(spec, x.rows(), x.cols());
  return block;
}

Matrix decompress(const CompressedBlock& block) {
  if (block.rows < 0 || block.cols < 0) {
    throw ParseError("compressed block has negative dimensions");
  }
  const Index total = block.rows * block.cols;
  Matrix out = Matrix::Zero(block.rows, block.cols);
  double* flat = out.data();
  switch (block.kind) {
    case CompressorKind::kIdentity:
      if (static_cast<Index>(block.dense.size()) != total) {
        throw ParseError("identity payload size does not match its shape");
      }
      std::copy(block.dense.begin(), block.dense.end(), flat);
      break;
    case CompressorKind::kTopK:
    case CompressorKind::kRandK:
      if (block.indices.size() != block.values.size()) {
        throw ParseError("sparse payload has mismatched index/value counts");
      }
      for (std::size_t i = 0; i < block.indices.size(); ++i) {
        if (block.indices[i] >= static_cast<std::uint64_t>(total)) {
          throw ParseError("sparse payload index out of range");
        }
        flat[block.indices[i]] = block.values[i];
      }
      break;
    case CompressorKind::kDither: {
      if (block.levels < 1 ||
          static_cast<Index>(block.column_norms.size()) != block.cols ||
          static_cast<Index>(block.negative.size()) != total ||
          static_cast<Index>(block.level_codes.size()) != total) {
        throw ParseError("dither payload does not match its shape");
      }
      const double s = static_cast<double>(block.levels);
      for (Index c = 0; c < block.cols; ++c) {
        const double norm = block.column_norms[static_cast<std::size_t>(c)];
        if (!(norm >= 0.0) || !std::isfinite(norm)) {
          throw ParseError("dither payload has an invalid column norm");
        }
        for (Index r = 0; r < block.rows; ++r) {
          const auto idx = static_cast<std::size_t>(c * block.rows + r);
          if (block.level_codes[idx] > block.levels) {
            throw ParseError("dither level exceeds s");
          }
          double v = norm * static_cast<double>(block.level_codes[idx]) / s;
          flat[idx] = block.negative[idx] ? -v : v;
        }
      }
      break;
    }
  }
  return out;
}

std::optional<double> contraction_delta(const CompressorSpec& spec, Index rows,
                                        Index cols) {
  const auto total = static_cast<double>(rows * cols);
  switch (spec.kind) {
    case CompressorKind::kIdentity:
      return 1.0;
    case CompressorKind::kTopK:
      return std::min(static_cast<double>(spec.k), total) / total;
    default:
      return std::nullopt;
  }
}

Rng compression_stream(std::uint64_t run_seed, std::uint64_t k,
                       std::uint64_t worker) {
  return keyed_stream({run_seed,
                       static_cast<std::uint64_t>(StreamDomain::kCompress), k,
                       worker});
}

}  // namespace flecs
