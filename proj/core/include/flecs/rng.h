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

#ifndef FLECS_RNG_H_
#define FLECS_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace flecs {

using Rng = std::mt19937_64;

// Stream domains. Every random consumer in the library draws from a stream
// keyed by (run seed, domain, ...) so that streams never overlap.
enum class StreamDomain : std::uint64_t {
  kSketch = 0x736b6574,     // "sket"
  kCompress = 0x636f6d70,   // "comp"
  kPartition = 0x70617274,  // "part"
  kSynthetic = 0x73796e74,  // "synt"
};

// Deterministic generator keyed by a tuple of 64-bit words. std::seed_seq
// and mt19937_64 are fully specified by the standard, so the produced bit
// stream is identical on every node and platform.
inline Rng keyed_stream(std::initializer_list<std::uint64_t> key) {
  std::vector<std::uint32_t> words;
  words.reserve(key.size() * 2);
  for (std::uint64_t k : key) {
    words.push_back(static_cast<std::uint32_t>(k & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace flecs

#endif  // FLECS_RNG_H_
