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

#include "digrad/errors.hpp"
#include "digrad/paths.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace digrad;

namespace {

const Vector kW = {1.0, 0.0};
const Vector kBase = {0.0, 1.0};

EmbeddingTable line_table() {
  // pad, unk (far away), w=2.0, u=1.5, v=3.0
  Matrix m(5, 1);
  m(1, 0) = 100.0;
  m(2, 0) = 2.0;
  m(3, 0) = 1.5;
  m(4, 0) = 3.0;
  return EmbeddingTable(Vocabulary({"<pad>", "<unk>", "w", "u", "v"}), m);
}

constexpr Strategy kAll[] = {Strategy::kLinear, Strategy::kGreedy,
                             Strategy::kMaxCount, Strategy::kRandomAnchor,
                             Strategy::kRandomNeighbor};

}  // namespace

TEST_CASE("monotonic_dims is inclusive at both ends") {
  CHECK(monotonic_dims(Vector{0.5, 0.5}, kW, kBase) ==
        std::vector<std::size_t>{0, 1});
  CHECK(monotonic_dims(Vector{1.5, 0.5}, kW, kBase) ==
        std::vector<std::size_t>{1});
  CHECK(monotonic_dims(kW, kW, kBase).size() == 2);
  CHECK_THROWS_AS(monotonic_dims(Vector{1.0}, kW, kBase), ShapeError);
}

TEST_CASE("monotonize") {
  CHECK(monotonize(Vector{0.5, 0.5}, kW, kBase, 10) == Vector{0.5, 0.5});
  const auto c = monotonize(Vector{1.5, 0.5}, kW, kBase, 10);
  CHECK(c[0] == doctest::Approx(0.9));
  CHECK(c[1] == 0.5);
  const auto d = monotonize(Vector{-0.2, 1.3}, kW, kBase, 10);
  CHECK(d[0] == doctest::Approx(0.9));
  CHECK(d[1] == doctest::Approx(0.1));
  CHECK(monotonic_dims(d, kW, kBase).size() == 2);
}

TEST_CASE("anchor_greedy") {
  const Vector a = {0.9, 0.2};
  const Vector b = {1.5, 0.5};
  std::vector<Candidate> cands = {{7, b}, {9, a}};
  const auto choice = anchor_greedy(cands, kW, kBase, 10);
  CHECK(choice.id == 9);
  CHECK(choice.distance == 0.0);
  CHECK(choice.monotonized == a);

  std::vector<Candidate> same = {{4, b}, {3, b}};
  CHECK(anchor_greedy(same, kW, kBase, 10).id == 3);
  CHECK_THROWS_AS(anchor_greedy({}, kW, kBase, 10), EmptyNeighborhood);
}

TEST_CASE("anchor_maxcount") {
  const Vector two = {0.5, 0.5};
  const Vector one_a = {1.5, 0.5};
  const Vector one_b = {0.5, -1.0};
  std::vector<Candidate> cands = {{2, one_a}, {3, two}, {4, one_b}};
  CHECK(anchor_maxcount(cands, kW, kBase) == 3);
  std::vector<Candidate> full = {{6, two}, {5, two}};
  CHECK(anchor_maxcount(full, kW, kBase) == 5);
  std::vector<Candidate> single = {{8, one_a}};
  CHECK(anchor_maxcount(single, kW, kBase) == 8);
  CHECK_THROWS_AS(anchor_maxcount({}, kW, kBase), EmptyNeighborhood);
}

TEST_CASE("linear path") {
  Matrix m(3, 2);
  m(2, 0) = 1.0;
  const EmbeddingTable t(Vocabulary({"<pad>", "<unk>", "x"}), m);
  PathConfig cfg;
  cfg.strategy = Strategy::kLinear;
  cfg.steps = 2;
  const auto p = build_path(2, t, nullptr, t.row(kPadId), cfg);
  REQUIRE(p.size() == 3);
  CHECK(p.points[0] == Vector{0.0, 0.0});
  CHECK(p.points[1] == Vector{0.5, 0.0});
  CHECK(p.points[2] == Vector{1.0, 0.0});
  CHECK(p.kinds[1] == PointKind::kLinear);
}

TEST_CASE("maxcount hand trace on a line") {
  const auto t = line_table();
  const auto idx = build_knn_index(t, 2);
  PathConfig cfg;
  cfg.strategy = Strategy::kMaxCount;
  cfg.steps = 3;
  const auto p = build_path(2, t, &idx, t.row(kPadId), cfg);
  REQUIRE(p.size() == 4);
  CHECK(p.points[0][0] == 0.0);
  CHECK(p.points[1][0] == doctest::Approx(1.0));
  CHECK(p.points[2][0] == 1.5);
  CHECK(p.points[3][0] == 2.0);
  CHECK(p.anchors[2] == std::optional<TokenId>(3));
  CHECK(validate_path(p).empty());
}

TEST_CASE("any strategy with one step has no interior points") {
  const auto t = oracle::random_table(1, 12, 3);
  const auto idx = build_knn_index(t, 4);
  for (const Strategy s : kAll) {
    PathConfig cfg;
    cfg.strategy = s;
    cfg.steps = 1;
    const auto p = build_path(5, t, &idx, t.row(kPadId), cfg);
    REQUIRE(p.size() == 2);
    CHECK(p.baseline() == Vector(3, 0.0));
    CHECK(std::equal(p.input().begin(), p.input().end(), t.row(5).begin()));
  }
}

TEST_CASE("neighbor strategies need an index") {
  const auto t = oracle::random_table(1, 5, 2);
  PathConfig cfg;
  cfg.strategy = Strategy::kGreedy;
  CHECK_THROWS(build_path(2, t, nullptr, t.row(kPadId), cfg));
  CHECK_THROWS_AS(build_path(99, t, nullptr, t.row(kPadId), PathConfig{}),
                  UnknownToken);
}

TEST_CASE("upsample inserts midpoints") {
  InterpolationPath p;
  p.points = {{0.0}, {1.0}};
  p.kinds = {PointKind::kBaseline, PointKind::kInput};
  p.anchors = {std::nullopt, std::nullopt};
  CHECK(upsample(p, 0).points == p.points);
  const auto one = upsample(p, 1);
  CHECK(one.points == std::vector<Vector>{{0.0}, {0.5}, {1.0}});
  CHECK(one.kinds[1] == PointKind::kUpsampled);

  const auto t = oracle::random_table(2, 8, 2);
  PathConfig cfg;
  cfg.strategy = Strategy::kLinear;
  cfg.steps = 30;
  const auto lin = build_path(3, t, nullptr, t.row(kPadId), cfg);
  CHECK(upsample(lin, 2).size() == 121);
}

TEST_CASE("validate_path flags an overshoot") {
  const std::vector<Vector> bad = {{0.0}, {2.0}, {1.0}};
  const auto v = validate_path(bad);
  REQUIRE_FALSE(v.empty());
  CHECK(v.front().dim == 0);
}

TEST_CASE("random strategies are reproducible per seed") {
  const auto t = oracle::random_table(3, 30, 4);
  const auto idx = build_knn_index(t, 6);
  for (const Strategy s : {Strategy::kRandomAnchor, Strategy::kRandomNeighbor}) {
    PathConfig cfg;
    cfg.strategy = s;
    cfg.steps = 12;
    const auto a = build_path(4, t, &idx, t.row(kPadId), cfg, 77);
    const auto b = build_path(4, t, &idx, t.row(kPadId), cfg, 77);
    CHECK(a.points == b.points);
    CHECK(a.anchors == b.anchors);
  }
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
}

TEST_CASE("greedy anchors are locally optimal") {
  const auto t = oracle::random_table(4, 40, 3);
  const auto idx = build_knn_index(t, 8);
  PathConfig cfg;
  cfg.strategy = Strategy::kGreedy;
  cfg.steps = 10;
  const auto p = build_path(6, t, &idx, t.row(kPadId), cfg);
  // Re-enumerate the first step from the input word.
  std::vector<Candidate> cands;
  for (const auto& n : idx.neighbors(6)) cands.push_back({n.id, t.row(n.id)});
  const auto choice = anchor_greedy(cands, t.row(6), t.row(kPadId), 10);
  for (const auto& c : cands) {
    const auto m = monotonize(c.vector, t.row(6), t.row(kPadId), 10);
    CHECK(choice.distance <= distance(c.vector, m, Metric::kEuclidean));
  }
  CHECK(p.anchors[p.size() - 2] == std::optional<TokenId>(choice.id));
}

TEST_CASE("every generated path is monotonic") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const auto t = oracle::random_table(trial, 10 + trial % 20, 1 + trial % 5);
    const auto idx = build_knn_index(t, 1 + trial % 7);
    for (const Strategy s : kAll) {
      PathConfig cfg;
      cfg.strategy = s;
      cfg.steps = 1 + trial % 12;
      const TokenId word = 1 + static_cast<TokenId>(trial % (t.size() - 1));
      const auto p = upsample(
          build_path(word, t, &idx, t.row(kPadId), cfg, trial), trial % 3);
      CHECK(validate_path(p).empty());
      CHECK(p.size() == ((cfg.steps) << (trial % 3)) + 1);
    }
  }
}

TEST_CASE("path JSON carries metadata") {
  const auto t = line_table();
  const auto idx = build_knn_index(t, 2);
  PathConfig cfg;
  cfg.strategy = Strategy::kMaxCount;
  cfg.steps = 3;
  const auto j = path_to_json(build_path(2, t, &idx, t.row(kPadId), cfg),
                              &t.vocab());
  CHECK(j["word"] == "w");
  CHECK(j["strategy"] == "dig-maxcount");
  CHECK(j["points"].size() == 4);
}
