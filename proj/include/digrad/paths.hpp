// Copyright 2026 The digrad Authors.
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

// Interpolation paths from a baseline word vector to an input word vector.
//
// A path is the point sequence x^0 = baseline, ..., x^m = input. Besides the
// straight line, paths can be built by walking the nearest-neighbor graph of
// the vocabulary: from the current word, pick an anchor among its neighbors,
// project the anchor onto the region that is monotonic between the current
// point and the baseline, and repeat from the anchor. Every path satisfies,
// per dimension, baseline <= x^j <= x^k <= input for j < k (or the mirrored
// order when the input lies below the baseline).

#ifndef DIGRAD_PATHS_HPP_
#define DIGRAD_PATHS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "digrad/matrix.hpp"
#include "digrad/vocab_embed.hpp"
#include "json.hpp"

namespace digrad {

enum class Strategy {
  kLinear,
  kGreedy,
  kMaxCount,
  kRandomAnchor,
  kRandomNeighbor,
};

std::string_view to_string(Strategy strategy);

// Accepts ig/linear, dig-greedy, dig-maxcount, dig-random-anchor,
// dig-random-neighbor.
Strategy parse_strategy(std::string_view name);

enum class PointKind { kBaseline, kInput, kLinear, kAnchor, kUpsampled };

std::string_view to_string(PointKind kind);

struct PathConfig {
  std::size_t steps = 30;  // m
  Strategy strategy = Strategy::kGreedy;
  std::size_t upsample = 0;  // f
  std::uint64_t seed = 0;
  // Distance used by the greedy anchor search.
  Metric metric = Metric::kEuclidean;
};

struct InterpolationPath {
  TokenId word = kPadId;
  Strategy strategy = Strategy::kLinear;
  std::size_t steps = 0;
  std::size_t upsample = 0;
  std::vector<Vector> points;  // points.front() is the baseline
  std::vector<PointKind> kinds;
  // Anchor token behind each point, when there is one.
  std::vector<std::optional<TokenId>> anchors;
  // Dimension entries moved by the final ordering clamp.
  std::size_t clamps = 0;
  // Iteration at which the anchor walk stopped moving, if it did.
  std::optional<std::size_t> stalled_at;

  std::size_t size() const { return points.size(); }
  const Vector& baseline() const { return points.front(); }
  const Vector& input() const { return points.back(); }
};

// Dimensions i where a_i lies in the closed interval between baseline_i and
// input_i.
std::vector<std::size_t> monotonic_dims(std::span<const double> a,
                                        std::span<const double> input,
                                        std::span<const double> baseline);

// Keeps a on its monotonic dimensions and sets every other dimension to
// input - (input - baseline) / steps.
Vector monotonize(std::span<const double> a, std::span<const double> input,
                  std::span<const double> baseline, std::size_t steps);

struct Candidate {
  TokenId id = kPadId;
  std::span<const double> vector;
};

struct GreedyChoice {
  TokenId id = kPadId;
  Vector monotonized;
  double distance = 0.0;  // between the anchor and its monotonized point
};

// The candidate closest to its own monotonized point; ties go to the smaller
// token id. Throws EmptyNeighborhood.
GreedyChoice anchor_greedy(std::span<const Candidate> candidates,
                           std::span<const double> input,
                           std::span<const double> baseline, std::size_t steps,
                           Metric metric = Metric::kEuclidean);

// The candidate with the most monotonic dimensions; ties go to the smaller
// token id. Throws EmptyNeighborhood.
TokenId anchor_maxcount(std::span<const Candidate> candidates,
                        std::span<const double> input,
                        std::span<const double> baseline);

// Seed for the random strategies, derived from the run seed and the word's
// position so results do not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::size_t sentence,
                          std::size_t word);

// Builds the path for `word` (without upsampling). `index` may be null for
// the linear and random-anchor strategies. `stream_seed` drives the random
// strategies; see derive_seed().
InterpolationPath build_path(TokenId word, const EmbeddingTable& table,
                             const NeighborIndex* index,
                             std::span<const double> baseline,
                             const PathConfig& config,
                             std::uint64_t stream_seed = 0);

// Inserts the midpoint of every consecutive pair, `factor` times.
InterpolationPath upsample(const InterpolationPath& path, std::size_t factor);

struct PathViolation {
  std::size_t dim = 0;
  std::size_t from = 0;  // point index k-1
  std::size_t to = 0;    // point index k

  bool operator==(const PathViolation&) const = default;
};

// Checks the monotonic ordering over consecutive points, with the first and
// last point taken as baseline and input. Empty result means valid.
std::vector<PathViolation> validate_path(std::span<const Vector> points);
inline std::vector<PathViolation> validate_path(const InterpolationPath& p) {
  return validate_path(p.points);
}

// {word, strategy, m, f, points, clamps} record for path dumps.
nlohmann::json path_to_json(const InterpolationPath& path,
                            const Vocabulary* vocab = nullptr);

}  // namespace digrad

#endif  // DIGRAD_PATHS_HPP_
