// Copyright 2026 The normconflict Authors.
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

// Portable seeded randomness. Every random decision in the library (token
// subsampling, shuffles, splits, fold assignment, synthetic data) goes
// through SplitMix64 and the helpers below, never through <random>
// distributions, whose outputs differ between standard library vendors.
//
// SplitMix64, state s (64-bit, wrapping):
//   s += 0x9E3779B97F4A7C15
//   z  = s
//   z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
//
// Uniform01: (next() >> 11) * 2^-53, a double in [0, 1).
// UniformBelow(n): rejection sampling; draw r = next() until
//   r >= (2^64 - n) mod n, then return r mod n.
// Shuffle: Fisher-Yates from the back; for i = n-1 down to 1 swap
//   element i with element UniformBelow(i + 1).

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace normconflict {

class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr std::uint64_t Mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t Next() {
    state_ += kGamma;
    return Mix(state_);
  }

  double Uniform01() {
    return static_cast<double>(Next() >> 11) * 0x1.0p-53;
  }

  std::uint64_t UniformBelow(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = Next();
      if (r >= threshold) return r % n;
    }
  }

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(UniformBelow(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    Shuffle(std::span<T>(items));
  }

  // Chooses `count` distinct positions of [0, n) and returns them sorted.
  std::vector<std::size_t> SampleIndices(std::size_t n, std::size_t count) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    Shuffle(all);
    all.resize(count < n ? count : n);
    std::sort(all.begin(), all.end());
    return all;
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// Derives an independent stream seed from a base seed and a salt, so that
// e.g. fold f trains with DeriveSeed(seed, f).
inline std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t salt) {
  return SplitMix64::Mix(seed ^ SplitMix64::Mix(salt + SplitMix64::kGamma));
}

// FNV-1a 64-bit hash, used to key per-word synthetic vectors.
inline std::uint64_t Fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace normconflict
