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

#include "digrad/paths.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "digrad/errors.hpp"

namespace digrad {

namespace {

// Walk is considered stalled when consecutive points are this close.
constexpr double kStallDistance = 1e-12;

bool within(double v, double bound_a, double bound_b) {
  return bound_a <= bound_b ? (bound_a <= v && v <= bound_b)
                            : (bound_b <= v && v <= bound_a);
}

void check_same_dim(std::span<const double> a, std::span<const double> b,
                    std::span<const double> c) {
  if (a.size() != b.size() || a.size() != c.size()) {
    throw ShapeError("vectors differ in dimension");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<Candidate> neighborhood(TokenId word, const EmbeddingTable& table,
                                    const NeighborIndex& index) {
  std::vector<Candidate> out;
  for (const auto& nb : index.neighbors(word)) {
    out.push_back({nb.id, table.row(nb.id)});
  }
  return out;
}

}  // namespace

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kLinear:
      return "ig";
    case Strategy::kGreedy:
      return "dig-greedy";
    case Strategy::kMaxCount:
      return "dig-maxcount";
    case Strategy::kRandomAnchor:
      return "dig-random-anchor";
    case Strategy::kRandomNeighbor:
      return "dig-random-neighbor";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "ig" || name == "linear") return Strategy::kLinear;
  if (name == "dig-greedy") return Strategy::kGreedy;
  if (name == "dig-maxcount") return Strategy::kMaxCount;
  if (name == "dig-random-anchor") return Strategy::kRandomAnchor;
  if (name == "dig-random-neighbor") return Strategy::kRandomNeighbor;
  throw ConfigError("unknown path strategy '" + std::string(name) + "'");
}

std::string_view to_string(PointKind kind) {
  switch (kind) {
    case PointKind::kBaseline:
      return "baseline";
    case PointKind::kInput:
      return "input";
    case PointKind::kLinear:
      return "linear";
    case PointKind::kAnchor:
      return "monotonized-anchor";
    case PointKind::kUpsampled:
      return "upsampled";
  }
  return "?";
}

std::vector<std::size_t> monotonic_dims(std::span<const double> a,
                                        std::span<const double> input,
                                        std::span<const double> baseline) {
  check_same_dim(a, input, baseline);
  std::vector<std::size_t> dims;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (within(a[i], baseline[i], input[i])) dims.push_back(i);
  }
  return dims;
}

Vector monotonize(std::span<const double> a, std::span<const double> input,
                  std::span<const double> baseline, std::size_t steps) {
  check_same_dim(a, input, baseline);
  if (steps == 0) throw ConfigError("steps must be >= 1");
  const double inv_m = 1.0 / static_cast<double>(steps);
  Vector c(a.begin(), a.end());
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!within(a[i], baseline[i], input[i])) {
      c[i] = input[i] - inv_m * (input[i] - baseline[i]);
    }
  }
  return c;
}

GreedyChoice anchor_greedy(std::span<const Candidate> candidates,
                           std::span<const double> input,
                           std::span<const double> baseline, std::size_t steps,
                           Metric metric) {
  if (candidates.empty()) throw EmptyNeighborhood("no anchor candidates");
  std::optional<GreedyChoice> best;
  for (const auto& cand : candidates) {
    Vector c = monotonize(cand.vector, input, baseline, steps);
    const double d = distance(cand.vector, c, metric);
    if (!best || d < best->distance ||
        (d == best->distance && cand.id < best->id)) {
      best = GreedyChoice{cand.id, std::move(c), d};
    }
  }
  return std::move(*best);
}

TokenId anchor_maxcount(std::span<const Candidate> candidates,
                        std::span<const double> input,
                        std::span<const double> baseline) {
  if (candidates.empty()) throw EmptyNeighborhood("no anchor candidates");
  TokenId best = candidates.front().id;
  std::size_t best_count = 0;
  bool first = true;
  for (const auto& cand : candidates) {
    const std::size_t count =
        monotonic_dims(cand.vector, input, baseline).size();
    if (first || count > best_count ||
        (count == best_count && cand.id < best)) {
      best = cand.id;
      best_count = count;
      first = false;
    }
  }
  return best;
}

std::uint64_t derive_seed(std::uint64_t seed, std::size_t sentence,
                          std::size_t word) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(sentence));
  return splitmix64(h ^ static_cast<std::uint64_t>(word));
}

InterpolationPath build_path(TokenId word, const EmbeddingTable& table,
                             const NeighborIndex* index,
                             std::span<const double> baseline,
                             const PathConfig& config,
                             std::uint64_t stream_seed) {
  if (config.steps == 0) throw ConfigError("steps must be >= 1");
  if (word >= table.size()) {
    throw UnknownToken("token id " + std::to_string(word) +
                       " is not in the vocabulary");
  }
  const auto w = table.row(word);
  if (baseline.size() != w.size()) {
    throw ShapeError("baseline dimension differs from the embedding table");
  }

  const std::size_t m = config.steps;
  InterpolationPath path;
  path.word = word;
  path.strategy = config.strategy;
  path.steps = m;
  path.points.reserve(m + 1);

  if (config.strategy == Strategy::kLinear) {
    for (std::size_t k = 0; k <= m; ++k) {
      const double alpha = static_cast<double>(k) / static_cast<double>(m);
      Vector x(w.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = baseline[i] + alpha * (w[i] - baseline[i]);
      }
      path.points.push_back(std::move(x));
      path.kinds.push_back(PointKind::kLinear);
      path.anchors.emplace_back();
    }
    path.points.front().assign(baseline.begin(), baseline.end());
    path.points.back().assign(w.begin(), w.end());
    path.kinds.front() = PointKind::kBaseline;
    path.kinds.back() = PointKind::kInput;
    path.anchors.back() = word;
    return path;
  }

  const bool needs_index = config.strategy != Strategy::kRandomAnchor;
  if (needs_index && index == nullptr) {
    throw EmptyNeighborhood("strategy " +
                            std::string(to_string(config.strategy)) +
                            " needs a neighbor index");
  }
  if (index != nullptr && index->vocab_size() != table.size()) {
    throw IncompatibleArtifact("neighbor index does not match the table");
  }

  // Walk from the input towards the baseline, collecting m - 1 points.
  std::vector<Vector> walked;
  std::vector<std::optional<TokenId>> walked_anchors;
  walked.reserve(m);
  Vector current(w.begin(), w.end());
  TokenId current_word = word;
  std::mt19937_64 rng(stream_seed);
  const bool at_baseline = std::equal(w.begin(), w.end(), baseline.begin());

  for (std::size_t it = 0; it + 1 < m; ++it) {
    if (at_baseline) {
      path.stalled_at = 0;
      break;
    }
    TokenId anchor = kPadId;
    Vector c;
    switch (config.strategy) {
      case Strategy::kGreedy: {
        const auto cands = neighborhood(current_word, table, *index);
        auto choice =
            anchor_greedy(cands, current, baseline, m, config.metric);
        anchor = choice.id;
        c = std::move(choice.monotonized);
        break;
      }
      case Strategy::kMaxCount: {
        const auto cands = neighborhood(current_word, table, *index);
        anchor = anchor_maxcount(cands, current, baseline);
        c = monotonize(table.row(anchor), current, baseline, m);
        break;
      }
      case Strategy::kRandomNeighbor: {
        const auto nbrs = index->neighbors(current_word);
        if (nbrs.empty()) {
          throw EmptyNeighborhood("token " + std::to_string(current_word) +
                                  " has no neighbors");
        }
        std::uniform_int_distribution<std::size_t> pick(0, nbrs.size() - 1);
        anchor = nbrs[pick(rng)].id;
        c = monotonize(table.row(anchor), current, baseline, m);
        break;
      }
      case Strategy::kRandomAnchor: {
        // Any token except <pad> and the current word.
        if (table.size() < 3) throw EmptyNeighborhood("vocabulary too small");
        std::uniform_int_distribution<std::size_t> pick(0, table.size() - 3);
        auto id = static_cast<TokenId>(pick(rng) + 1);
        if (id >= current_word && current_word != kPadId) ++id;
        anchor = id;
        c = monotonize(table.row(anchor), current, baseline, m);
        break;
      }
      case Strategy::kLinear:
        break;
    }

    double moved = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      moved += (c[i] - current[i]) * (c[i] - current[i]);
    }
    if (std::sqrt(moved) < kStallDistance) {
      path.stalled_at = it;
      break;
    }
    walked.push_back(c);
    walked_anchors.emplace_back(anchor);
    current = std::move(c);
    current_word = anchor;
  }
  // A stalled walk holds its last point for the remaining steps.
  while (walked.size() + 1 < m) {
    walked.push_back(current);
    walked_anchors.emplace_back();
  }

  // Enforce the global ordering: each point lies between its predecessor
  // (closer to the input) and the baseline.
  std::span<const double> prev = w;
  for (auto& c : walked) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double lo = std::min(prev[i], baseline[i]);
      const double hi = std::max(prev[i], baseline[i]);
      const double clamped = std::clamp(c[i], lo, hi);
      if (clamped != c[i]) {
        c[i] = clamped;
        ++path.clamps;
      }
    }
    prev = c;
  }

  path.points.emplace_back(baseline.begin(), baseline.end());
  path.kinds.push_back(PointKind::kBaseline);
  path.anchors.emplace_back();
  for (std::size_t j = walked.size(); j-- > 0;) {
    path.points.push_back(std::move(walked[j]));
    path.kinds.push_back(PointKind::kAnchor);
    path.anchors.push_back(walked_anchors[j]);
  }
  path.points.emplace_back(w.begin(), w.end());
  path.kinds.push_back(PointKind::kInput);
  path.anchors.emplace_back(word);
  return path;
}

InterpolationPath upsample(const InterpolationPath& path, std::size_t factor) {
  InterpolationPath out = path;
  for (std::size_t pass = 0; pass < factor && out.points.size() > 1; ++pass) {
    InterpolationPath next = out;
    next.points.clear();
    next.kinds.clear();
    next.anchors.clear();
    for (std::size_t k = 0; k < out.points.size(); ++k) {
      if (k > 0) {
        const auto& a = out.points[k - 1];
        const auto& b = out.points[k];
        Vector mid(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) mid[i] = 0.5 * (a[i] + b[i]);
        next.points.push_back(std::move(mid));
        next.kinds.push_back(PointKind::kUpsampled);
        next.anchors.emplace_back();
      }
      next.points.push_back(out.points[k]);
      next.kinds.push_back(out.kinds[k]);
      next.anchors.push_back(out.anchors[k]);
    }
    out = std::move(next);
  }
  out.upsample = path.upsample + factor;
  return out;
}

std::vector<PathViolation> validate_path(std::span<const Vector> points) {
  std::vector<PathViolation> violations;
  if (points.size() < 2) return violations;
  const Vector& base = points.front();
  const Vector& input = points.back();
  for (const auto& p : points) {
    if (p.size() != base.size()) throw ShapeError("path points differ in size");
  }
  for (std::size_t k = 1; k < points.size(); ++k) {
    const Vector& a = points[k - 1];
    const Vector& b = points[k];
    for (std::size_t i = 0; i < base.size(); ++i) {
      const bool ok = base[i] <= input[i]
                          ? (base[i] <= a[i] && a[i] <= b[i] && b[i] <= input[i])
                          : (base[i] >= a[i] && a[i] >= b[i] && b[i] >= input[i]);
      if (!ok) violations.push_back({i, k - 1, k});
    }
  }
  return violations;
}

nlohmann::json path_to_json(const InterpolationPath& path,
                            const Vocabulary* vocab) {
  nlohmann::json record;
  record["word_id"] = path.word;
  if (vocab != nullptr) record["word"] = vocab->surface(path.word);
  record["strategy"] = std::string(to_string(path.strategy));
  record["m"] = path.steps;
  record["f"] = path.upsample;
  record["points"] = path.points;
  auto kinds = nlohmann::json::array();
  for (const auto kind : path.kinds) kinds.push_back(std::string(to_string(kind)));
  record["kinds"] = std::move(kinds);
  record["clamps"] = path.clamps;
  if (path.stalled_at) record["stalled_at"] = *path.stalled_at;
  return record;
}

}  // namespace digrad
