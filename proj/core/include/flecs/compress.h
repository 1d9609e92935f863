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

#ifndef FLECS_COMPRESS_H_
#define FLECS_COMPRESS_H_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "flecs/common.h"
#include "flecs/rng.h"

namespace flecs {

enum class CompressorKind { kIdentity, kTopK, kRandK, kDither };

CompressorKind parse_compressor_kind(std::string_view name);
std::string_view to_string(CompressorKind kind);

struct CompressorSpec {
  CompressorKind kind = CompressorKind::kIdentity;
  std::uint64_t k = 1;       // kept entries (top_k / rand_k)
  std::uint32_t levels = 128;  // s (dither); the norm is always infinity

  static CompressorSpec identity() { return {}; }
  static CompressorSpec top_k(std::uint64_t k) {
    return {CompressorKind::kTopK, k, 128};
  }
  static CompressorSpec rand_k(std::uint64_t k) {
    return {CompressorKind::kRandK, k, 128};
  }
  static CompressorSpec dither(std::uint32_t s) {
    return {CompressorKind::kDither, 1, s};
  }
};

// Bits of one dense float on the wire.
inline constexpr std::uint64_t kFloatBits = 64;

// ceil(log2(x)) for x >= 1.
std::uint64_t ceil_log2(std::uint64_t x);

// Encoded form of a compressed rows x cols matrix.
struct CompressedBlock {
  CompressorKind kind = CompressorKind::kIdentity;
  Index rows = 0;
  Index cols = 0;

  // identity: column-major values.
  std::vector<double> dense;
  // top_k / rand_k: flat column-major indices and (already scaled) values.
  std::vector<std::uint64_t> indices;
  std::vector<double> values;
  // dither: one inf-norm per column, a sign bit and a level per entry.
  std::uint32_t levels = 0;
  std::vector<double> column_norms;
  std::vector<std::uint8_t> negative;
  std::vector<std::uint32_t> level_codes;

  std::uint64_t bit_cost = 0;
};

// Analytic wire size of a compressed rows x cols matrix:
//   identity      64 * rows * cols
//   top_k/rand_k  K * (64 + ceil(log2(rows * cols)))
//   dither        cols * (64 + rows * (1 + ceil(log2(s + 1))))
std::uint64_t compressed_bits(const CompressorSpec& spec, Index rows,
                              Index cols);

// Clamps K to rows * cols (with a warning). Randomized kinds draw from rng.
CompressedBlock compress(const CompressorSpec& spec, const Matrix& x, Rng& rng);

// Deterministic inverse of the payload encoding. Throws ParseError on a
// corrupt payload.
Matrix decompress(const CompressedBlock& block);

// delta of the contractive bound E|C(X) - X|^2 <= (1 - delta)|X|^2:
// K/(rows*cols) for top_k, 1 for identity, nullopt for unbiased kinds.
std::optional<double> contraction_delta(const CompressorSpec& spec, Index rows,
                                        Index cols);

// Compression noise stream of one worker at one iteration.
Rng compression_stream(std::uint64_t run_seed, std::uint64_t k,
                       std::uint64_t worker);

}  // namespace flecs

#endif  // FLECS_COMPRESS_H_
