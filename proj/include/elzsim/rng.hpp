// Copyright 2026 The elzsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace elzsim {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to turn structured seed tuples into
/// well-mixed 64-bit seeds.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for work unit `index` of a stream identified by `tag`.
/// Depends only on its arguments, so results never depend on scheduling.
inline constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index, std::uint64_t tag = 0) {
    return splitmix64(splitmix64(splitmix64(base_seed) ^ tag) + index);
}

inline Rng make_rng(std::uint64_t base_seed, std::uint64_t index, std::uint64_t tag = 0) {
    return Rng(derive_seed(base_seed, index, tag));
}

/// Stream tags so unrelated experiments sharing a base seed never collide.
namespace stream {
inline constexpr std::uint64_t kShots = 0x53484f54;       // "SHOT"
inline constexpr std::uint64_t kQubit = 0x51554249;       // "QUBI"
inline constexpr std::uint64_t kSequences = 0x53455153;   // "SEQS"
inline constexpr std::uint64_t kBootstrap = 0x424f4f54;   // "BOOT"
inline constexpr std::uint64_t kReadout = 0x52454144;     // "READ"
inline constexpr std::uint64_t kSynthetic = 0x53594e54;   // "SYNT"
}  // namespace stream

}  // namespace elzsim
