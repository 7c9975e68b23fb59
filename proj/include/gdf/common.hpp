/*
 * Copyright 2026 The GDF Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GDF_COMMON_HPP_
#define GDF_COMMON_HPP_

#include <compare>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace gdf {

using NodeId = std::uint32_t;
using ModalityId = std::uint32_t;

// Raised for malformed or inconsistent input data (files, labels, bundles).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One modality column of one node.
struct FeatureId {
  NodeId node = 0;
  ModalityId modality = 0;

  friend auto operator<=>(const FeatureId&, const FeatureId&) = default;
};

// Unordered node pair, stored with a < b.
struct Edge {
  NodeId a = 0;
  NodeId b = 0;

  Edge() = default;
  Edge(NodeId u, NodeId v) : a(u < v ? u : v), b(u < v ? v : u) {}

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Named random substreams. All randomness in a run is derived from one root
// seed through these tags so the draw order never depends on scheduling.
enum class Stream : std::uint64_t {
  kInitWalk = 1,
  kSlot = 2,
  kResample = 3,
  kSplit = 4,
  kGraph = 5,
  kScenario = 6,
  kRepetition = 7,
  kBaseline = 8,
  kForest = 9,
};

constexpr std::uint64_t derive_seed(std::uint64_t root, Stream stream,
                                    std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = mix64(root ^ mix64(static_cast<std::uint64_t>(stream)));
  h = mix64(h ^ mix64(a + 0x100000001b3ULL));
  h = mix64(h ^ mix64(b + 0xcbf29ce484222325ULL));
  return h;
}

inline Rng make_rng(std::uint64_t root, Stream stream, std::uint64_t a = 0,
                    std::uint64_t b = 0) {
  return Rng(derive_seed(root, stream, a, b));
}

}  // namespace gdf

#endif  // GDF_COMMON_HPP_
