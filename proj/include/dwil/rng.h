// Copyright 2026 The dwil Authors
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

#ifndef DWIL_RNG_H_
#define DWIL_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace dwil {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent child seeds.
inline uint64_t MixSeed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t DeriveSeed(uint64_t parent, uint64_t stream) {
  return MixSeed(parent ^ MixSeed(stream));
}

// 64-bit FNV-1a.
inline uint64_t Fnv1a(std::string_view bytes,
                      uint64_t h = 0xcbf29ce484222325ULL) {
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t DeriveSeed(uint64_t parent, std::string_view label) {
  return DeriveSeed(parent, Fnv1a(label));
}

inline double Uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double Gaussian(Rng& rng, double stddev) {
  return std::normal_distribution<double>(0.0, stddev)(rng);
}

}  // namespace dwil

#endif  // DWIL_RNG_H_
