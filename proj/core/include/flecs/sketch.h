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

#ifndef FLECS_SKETCH_H_
#define FLECS_SKETCH_H_

#include <cstdint>
#include <string_view>

#include "flecs/common.h"

namespace flecs {

enum class SketchFamily { kGaussian, kCoordinate };

SketchFamily parse_sketch_family(std::string_view name);
std::string_view to_string(SketchFamily family);

struct SketchSpec {
  Index m = 16;
  SketchFamily family = SketchFamily::kGaussian;
  std::uint64_t run_seed = 0;
};

// The d x m sketching matrix of iteration k. A pure function of
// (run_seed, k, d, m, family, salt): every node that calls it with the same
// arguments gets a bit-identical matrix, so S_k is never transmitted. The
// stream is never keyed by node identity.
Matrix sketch_at(const SketchSpec& spec, std::uint64_t k, Index d,
                 std::uint64_t salt = 0);

// True iff the numerical rank of S equals its column count
// (sigma_min > 1e-10 * sigma_max).
bool rank_check(const Matrix& sketch);

// sketch_at followed by rank_check; a rank-deficient draw is replaced by a
// salted redraw (salt 1, 2, ...) and a warning is logged. Still a pure
// function of its arguments.
Matrix shared_sketch(const SketchSpec& spec, std::uint64_t k, Index d);

}  // namespace flecs

#endif  // FLECS_SKETCH_H_
