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

#include <sstream>

#include "digrad/errors.hpp"
#include "digrad/eval.hpp"
#include "digrad/toy_data.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace digrad;

namespace {

// One informative word: "good" moves the single dimension, everything else
// sits at 0.
struct Lexicon {
  EmbeddingTable table;
  Classifier model;
};

Lexicon lexicon_model() {
  Matrix m(6, 1);
  m(3, 0) = 1.0;
  EmbeddingTable t(Vocabulary({"<pad>", "<unk>", "the", "good", "film", "a"}),
                   m);
  Matrix w2(2, 1);
  w2(0, 0) = -6.0;
  w2(1, 0) = 6.0;
  Classifier model(t, {2, 0, Activation::kTanh}, Matrix(0, 1), {}, w2,
                   {0.0, 0.0});
  return {std::move(t), std::move(model)};
}

}  // namespace

TEST_CASE("select_topk") {
  const std::vector<TokenId> toks = {2, 3, 4};
  const Vector scores = {0.3, 0.9, 0.1};
  CHECK(select_topk(scores, toks, 34.0).selected ==
        std::vector<std::size_t>{1});
  CHECK(select_topk(scores, toks, 100.0).selected ==
        std::vector<std::size_t>{1, 0, 2});
  const std::vector<TokenId> two = {2, 3};
  CHECK(select_topk(Vector{0.5, 0.5}, two, 50.0).selected ==
        std::vector<std::size_t>{0});
  CHECK(select_topk(scores, toks, 1.0).selected.size() == 1);
  CHECK(select_topk(Vector{0.1, 0.2, 0.3, 0.4}, std::vector<TokenId>{2, 3, 4, 5},
                    62.5)
            .selected.size() == 3);  // 2.5 rounds up
  CHECK_THROWS_AS(select_topk(scores, toks, 0.0), ConfigError);
  CHECK_THROWS_AS(select_topk(scores, toks, 101.0), ConfigError);
}

TEST_CASE("special tokens are never selected") {
  const std::vector<TokenId> toks = {kPadId, 4, kUnkId, 5};
  const auto sel = select_topk(Vector{9.0, 1.0, 8.0, 2.0}, toks, 100.0);
  CHECK(sel.selected == std::vector<std::size_t>{3, 1});
}

TEST_CASE("perturbations keep or change length as specified") {
  const std::vector<TokenId> toks = {2, 3, 4, 5};
  TopKSelection sel{50.0, {1, 3}};
  CHECK(mask_selected(toks, sel) == std::vector<TokenId>{2, kPadId, 4, kPadId});
  CHECK(delete_selected(toks, sel) == std::vector<TokenId>{2, 4});
  CHECK(keep_selected(toks, sel) == std::vector<TokenId>{3, 5});
}

TEST_CASE("metric boundary cases") {
  const auto lex = lexicon_model();
  const std::vector<TokenId> s = {2, 3, 4};
  const auto all = select_topk(Vector{0.0, 1.0, 0.5}, s, 100.0);
  const Matrix x = lex.table.embed(s);
  const std::size_t y = lex.model.predict(x);
  CHECK(y == 1);
  CHECK(sufficiency(lex.model, lex.table, s, all) == 0.0);
  const double p = lex.model.forward(x)[y];
  const double p_pad = lex.model.forward(baseline_sentence(lex.table, 3))[y];
  CHECK(comprehensiveness(lex.model, lex.table, s, all) ==
        doctest::Approx(p - p_pad));
}

TEST_CASE("log-odds") {
  const auto lex = lexicon_model();
  const std::vector<TokenId> s = {2, 3, 4};
  const TopKSelection neutral{34.0, {0}};
  CHECK(log_odds(lex.model, lex.table, s, neutral) == doctest::Approx(0.0));
  const TopKSelection decisive{34.0, {1}};
  CHECK(log_odds(lex.model, lex.table, s, decisive) < 0.0);
}

TEST_CASE("comprehensiveness and sufficiency on a lexicon model") {
  const auto lex = lexicon_model();
  const std::vector<TokenId> s = {2, 3, 4, 5};
  const TopKSelection good{25.0, {1}};
  const TopKSelection other{25.0, {2}};
  CHECK(comprehensiveness(lex.model, lex.table, s, good) > 0.0);
  CHECK(sufficiency(lex.model, lex.table, s, good) <= 1e-12);
  CHECK(sufficiency(lex.model, lex.table, s, other) > 0.0);
}

TEST_CASE("evaluate_dataset on one sentence") {
  const auto lex = lexicon_model();
  const std::vector<std::vector<TokenId>> data = {{2, 3, 4, 5}};
  const std::vector<RankingMethod> methods = {{Method::kIg}};
  EvalConfig cfg;
  cfg.k_percents = {25.0, 50.0};
  const auto r = evaluate_dataset(lex.model, lex.table, nullptr, data, methods,
                                  cfg);
  REQUIRE(r.rows.size() == 2);
  REQUIRE(r.raw.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(r.rows[i].log_odds == r.raw[i].log_odds);
    CHECK(r.rows[i].comprehensiveness == r.raw[i].comprehensiveness);
    CHECK(r.rows[i].sufficiency == r.raw[i].sufficiency);
    CHECK(r.rows[i].n_sentences == 1);
  }
  CHECK(r.raw[0].selected == std::vector<std::size_t>{1});
}

TEST_CASE("evaluate_dataset rows, CSV and determinism") {
  const auto table = oracle::random_table(3, 30, 4);
  const auto model = Classifier::random(table, {2, 0, Activation::kTanh}, 3);
  std::mt19937_64 rng(3);
  std::vector<std::vector<TokenId>> data;
  for (int i = 0; i < 12; ++i) {
    data.push_back(oracle::random_sentence(rng, table.size(), 2, 7));
  }
  data.push_back({});
  const std::vector<RankingMethod> methods = {
      {Method::kIg}, {Method::kGradInput}, parse_ranking_method("random")};
  EvalConfig cfg;
  cfg.k_percents = {10.0, 20.0, 50.0};
  cfg.attribution.head = OutputHead::kLogit;
  cfg.jobs = 3;
  const auto r = evaluate_dataset(model, table, nullptr, data, methods, cfg);
  REQUIRE(r.rows.size() == 9);
  CHECK(r.rows[0].n_sentences == 12);
  // Linear logit model with a zero baseline: grad x input equals IG.
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(r.rows[k].comprehensiveness ==
          doctest::Approx(r.rows[3 + k].comprehensiveness));
  }
  CHECK(r.rows[0].wae.has_value());
  CHECK_FALSE(r.rows[3].wae.has_value());
  CHECK_FALSE(r.rows[6].delta_percent.has_value());

  cfg.jobs = 1;
  const auto again = evaluate_dataset(model, table, nullptr, data, methods, cfg);
  std::ostringstream a, b;
  const std::vector<std::string> pre = {"seed=0"};
  write_metrics_csv(a, r.rows, pre);
  write_metrics_csv(b, again.rows, pre);
  CHECK(a.str() == b.str());

  std::istringstream lines(a.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "# seed=0");
  std::getline(lines, line);
  CHECK(line == "method,k,log_odds,comp,suff,wae,delta_percent,n");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 9);
  CHECK(a.str().find("grad-x-input,10,") != std::string::npos);
  CHECK(raw_row_to_json(r.raw.front())["method"] == "ig");
}

TEST_CASE("comprehensiveness grows with k on the toy model") {
  const auto data = generate_toy_corpus(300, 5);
  TrainConfig tc;
  tc.seed = 5;
  const auto trained = train(generate_toy_embeddings(16, 5), data, tc);
  const auto& table = trained.model.table();
  std::vector<std::vector<TokenId>> sentences;
  for (const auto& ex : generate_toy_corpus(60, 6)) {
    sentences.push_back(tokenize(ex.text, table.vocab()));
  }
  const std::vector<RankingMethod> methods = {{Method::kIg}};
  EvalConfig cfg;
  cfg.k_percents = {5.0, 10.0, 20.0, 50.0};
  const auto r = evaluate_dataset(trained.model, table, nullptr, sentences,
                                  methods, cfg);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    CHECK(r.rows[i].comprehensiveness >= r.rows[i - 1].comprehensiveness);
  }
}

TEST_CASE("evaluate_dataset rejects empty input") {
  const auto lex = lexicon_model();
  const std::vector<std::vector<TokenId>> empty = {{}};
  const std::vector<RankingMethod> methods = {{Method::kIg}};
  CHECK_THROWS_AS(
      evaluate_dataset(lex.model, lex.table, nullptr, empty, methods, {}),
      Error);
  const std::vector<std::vector<TokenId>> one = {{2}};
  CHECK_THROWS_AS(evaluate_dataset(lex.model, lex.table, nullptr, one, {}, {}),
                  Error);
}
