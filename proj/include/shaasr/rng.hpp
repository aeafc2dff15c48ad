// shaasr/rng.hpp

// Copyright 2026  The shaasr authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SHAASR_RNG_HPP_
#define SHAASR_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace shaasr {

// All randomness in the workbench flows from one global seed.  Sub-seeds are
// derived by name so that adding a consumer never perturbs the streams of the
// existing ones:  sub = splitmix64(global ^ fnv1a64(name)).

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view name) {
  return splitmix64(global_seed ^ fnv1a64(name));
}

/// Additionally mix in an index (per-utterance, per-epoch, ... streams).
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view name,
                                 std::uint64_t index) {
  return splitmix64(derive_seed(global_seed, name) ^ splitmix64(index + 1));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace shaasr

#endif  // SHAASR_RNG_HPP_
