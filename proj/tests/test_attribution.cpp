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

#include <numeric>

#include "digrad/attribution.hpp"
#include "digrad/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace digrad;

namespace {

constexpr Method kPathMethods[] = {Method::kIg, Method::kDigGreedy,
                                   Method::kDigMaxCount,
                                   Method::kDigRandomAnchor,
                                   Method::kDigRandomNeighbor};

double sum(const Vector& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::vector<Vector> linear_points(double from, double to, std::size_t m) {
  std::vector<Vector> p;
  for (std::size_t k = 0; k <= m; ++k) {
    p.push_back({from + (static_cast<double>(k) / static_cast<double>(m)) *
                            (to - from)});
  }
  return p;
}

}  // namespace

TEST_CASE("riemann sum of a quadratic on the straight line") {
  const auto pts = linear_points(0.0, 1.0, 30);
  std::vector<Vector> grads;
  for (const auto& p : pts) grads.push_back({2.0 * p[0]});
  const auto a = riemann_attribution(pts, grads);
  CHECK(std::abs(a[0] - 31.0 / 30.0) < 1e-12);
}

TEST_CASE("riemann sum telescopes for a constant gradient") {
  const std::vector<Vector> pts = {{0.0}, {0.1}, {0.7}, {0.75}, {2.0}};
  const std::vector<Vector> grads(pts.size(), Vector{3.0});
  CHECK(riemann_attribution(pts, grads)[0] == doctest::Approx(6.0));
  const std::vector<Vector> still(4, Vector{0.4, -1.0});
  const std::vector<Vector> g(4, Vector{5.0, 5.0});
  CHECK(riemann_attribution(still, g) == Vector{0.0, 0.0});
  CHECK_THROWS_AS(riemann_attribution(still, std::span(g).first(3)),
                  LengthMismatch);
}

TEST_CASE("quadratic oracle through the sentence API") {
  Matrix m(3, 1);
  m(2, 0) = 1.0;
  const EmbeddingTable t(Vocabulary({"<pad>", "<unk>", "x"}), m);
  const oracle::Quadratic model(1);
  const Matrix x = t.embed(std::vector<TokenId>{2});
  const auto ig = integrated_gradients(model, x, Matrix(1, 1), 0,
                                       OutputHead::kLogit, 30);
  CHECK(std::abs(ig(0, 0) - 31.0 / 30.0) < 1e-12);
}

TEST_CASE("ig closed form equals linear-path DIG and the naive sum") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto t = oracle::random_table(seed, 20, 4);
    const auto model =
        Classifier::random(t, {3, 6, Activation::kTanh}, seed + 50);
    std::mt19937_64 rng(seed);
    const auto s = oracle::random_sentence(rng, t.size(), 1, 6);
    const Matrix x = t.embed(s);
    const Matrix base = baseline_sentence(t, s.size());
    AttributionOptions o;
    o.path.steps = 1 + seed * 3;
    const auto paths = build_sentence_paths(s, Method::kIg, t, nullptr, o);
    const auto via_paths =
        attribute_along_paths(model, x, paths, 1, OutputHead::kProbability);
    const auto closed = integrated_gradients(model, x, base, 1,
                                             OutputHead::kProbability,
                                             o.path.steps);
    const auto naive = oracle::naive_ig(model, x, base, 1,
                                        OutputHead::kProbability, o.path.steps);
    for (std::size_t i = 0; i < x.data().size(); ++i) {
      CHECK(std::abs(via_paths.data()[i] - closed.data()[i]) < 1e-9);
      CHECK(std::abs(naive.data()[i] - closed.data()[i]) < 1e-12);
    }
  }
}

TEST_CASE("completeness is exact for a linear logit model") {
  const auto t = oracle::random_table(3, 30, 4);
  const auto idx = build_knn_index(t, 6);
  const auto model = Classifier::random(t, {2, 0, Activation::kTanh}, 8);
  std::mt19937_64 rng(3);
  for (const PathMode mode : {PathMode::kJoint, PathMode::kIsolated}) {
    for (const Method m : kPathMethods) {
      for (const std::size_t steps : {1, 5, 30}) {
        const auto s = oracle::random_sentence(rng, t.size(), 1, 7);
        AttributionOptions o;
        o.head = OutputHead::kLogit;
        o.path.steps = steps;
        o.path.upsample = steps % 2;
        o.mode = mode;
        const auto r = attribute_sentence(s, m, model, t, &idx, o);
        CHECK(r.delta_percent < 1e-7);
        const std::size_t y = r.target;
        for (std::size_t j = 0; j < s.size(); ++j) {
          double expect = 0.0;
          for (std::size_t c = 0; c < t.dim(); ++c) {
            expect += model.w2()(y, c) * t.row(s[j])[c] /
                      static_cast<double>(s.size());
          }
          CHECK(r.per_word[j] == doctest::Approx(expect).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("an all-pad sentence gets zero attribution") {
  const auto t = oracle::random_table(4, 10, 3);
  const auto idx = build_knn_index(t, 3);
  const auto model = Classifier::random(t, {2, 4, Activation::kTanh}, 4);
  const std::vector<TokenId> pads(3, kPadId);
  for (const Method m : kPathMethods) {
    const auto r = attribute_sentence(pads, m, model, t, &idx, {});
    for (const double v : r.per_word) CHECK(v == 0.0);
    CHECK(r.f_input == r.f_baseline);
    CHECK(r.delta_percent == 0.0);
  }
}

TEST_CASE("dimensions the model ignores get exactly zero") {
  const auto t = oracle::random_table(5, 25, 4);
  const auto idx = build_knn_index(t, 5);
  const auto inner = Classifier::random(t, {2, 5, Activation::kTanh}, 5);
  const oracle::Masked model(inner, {1, 3});
  const std::vector<TokenId> s = {4, 9, 13};
  for (const Method m : kPathMethods) {
    const auto r = attribute_sentence(s, m, model, t, &idx, {});
    for (std::size_t j = 0; j < s.size(); ++j) {
      CHECK(r.per_dim(j, 1) == 0.0);
      CHECK(r.per_dim(j, 3) == 0.0);
    }
  }
}

TEST_CASE("ig error shrinks as steps grow") {
  const auto t = oracle::random_table(6, 20, 4);
  const auto model = Classifier::random(t, {2, 8, Activation::kTanh}, 6, 2.0);
  std::mt19937_64 rng(6);
  double prev = 1e300;
  for (const std::size_t m : {4, 16, 64, 256}) {
    std::mt19937_64 local(6);
    double total = 0.0;
    for (int i = 0; i < 20; ++i) {
      const auto s = oracle::random_sentence(local, t.size(), 1, 5);
      AttributionOptions o;
      o.path.steps = m;
      total += attribute_sentence(s, Method::kIg, model, t, nullptr, o)
                   .delta_percent;
    }
    CHECK(total <= prev);
    prev = total;
  }
}

TEST_CASE("delta_percent formula") {
  CHECK(delta_percent(0.95, 1.0, 0.0) == doctest::Approx(5.0));
  CHECK(delta_percent(0.0, 0.3, 0.3) == 0.0);
  CHECK(delta_percent(1.0, 0.0, 0.0) == doctest::Approx(1e10));
}

TEST_CASE("wae examples") {
  Matrix m(3, 2);
  m(1, 0) = m(1, 1) = 1.0;
  m(2, 0) = m(2, 1) = 1.0;
  const EmbeddingTable t(Vocabulary({"<pad>", "<unk>", "a"}), m);
  InterpolationPath p;
  p.points = {{0.0, 0.0}, {0.5, 0.5}, {1.0, 1.0}};
  std::vector<InterpolationPath> paths = {p};
  CHECK(wae(paths, t) == doctest::Approx(std::sqrt(0.5)));

  Matrix far(4, 2);
  far(1, 0) = far(1, 1) = 1.0;
  far(2, 0) = far(2, 1) = 1.0;
  far(3, 0) = 90.0;
  const EmbeddingTable t2(Vocabulary({"<pad>", "<unk>", "a", "b"}), far);
  CHECK(wae(paths, t2) <= wae(paths, t));

  InterpolationPath on;
  on.points = {{0.0, 0.0}, {1.0, 1.0}, {1.0, 1.0}};
  paths = {on};
  CHECK(wae(paths, t) == 0.0);
}

TEST_CASE("grad-x-input has no path") {
  const auto t = oracle::random_table(7, 10, 3);
  const auto model = Classifier::random(t, {2, 4, Activation::kTanh}, 7);
  const std::vector<TokenId> s = {2, 3};
  const auto r = attribute_sentence(s, Method::kGradInput, model, t, nullptr, {});
  CHECK_FALSE(r.wae.has_value());
  const auto g = model.gradient({t.embed(s), r.target, OutputHead::kProbability});
  CHECK(r.per_dim(1, 2) == g.grads(1, 2) * t.row(3)[2]);
}

TEST_CASE("attribution reports are reproducible and serializable") {
  const auto t = oracle::random_table(8, 30, 4);
  const auto idx = build_knn_index(t, 5);
  const auto model = Classifier::random(t, {2, 4, Activation::kTanh}, 8);
  const std::vector<TokenId> s = {5, 7, 11, 2};
  AttributionOptions o;
  o.path.seed = 9;
  o.jobs = 3;
  const auto a = attribute_sentence(s, Method::kDigRandomNeighbor, model, t, &idx, o);
  o.jobs = 1;
  const auto b = attribute_sentence(s, Method::kDigRandomNeighbor, model, t, &idx, o);
  CHECK(a.per_dim == b.per_dim);
  const auto j = report_to_json(a, t.vocab());
  CHECK(j["tokens"].size() == 4);
  CHECK(j["method"] == "dig-random-neighbor");
  CHECK(j["attributions"].size() == 4);
  CHECK(j["wae"].is_number());
  CHECK(sum(a.per_word) == doctest::Approx(sum(b.per_word)));
}

TEST_CASE("bad requests") {
  const auto t = oracle::random_table(9, 5, 3);
  const auto model = Classifier::random(t, {2, 4, Activation::kTanh}, 9);
  CHECK_THROWS_AS(attribute_sentence({}, Method::kIg, model, t, nullptr, {}),
                  Error);
  const std::vector<TokenId> oov = {42};
  CHECK_THROWS_AS(attribute_sentence(oov, Method::kIg, model, t, nullptr, {}),
                  UnknownToken);
  const auto other = oracle::random_table(9, 5, 2);
  const std::vector<TokenId> s = {2};
  CHECK_THROWS_AS(attribute_sentence(s, Method::kIg, model, other, nullptr, {}),
                  ShapeError);
}
