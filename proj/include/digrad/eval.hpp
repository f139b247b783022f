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

// Perturbation metrics for attributions: log-odds, comprehensiveness and
// sufficiency of the top-k% words, averaged over a dataset.

#ifndef DIGRAD_EVAL_HPP_
#define DIGRAD_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "digrad/attribution.hpp"
#include "digrad/model.hpp"
#include "digrad/vocab_embed.hpp"
#include "json.hpp"

namespace digrad {

struct TopKSelection {
  double k_percent = 0.0;
  std::vector<std::size_t> selected;  // by descending score
};

// max(1, round-half-up(k/100 * n)) words by descending score, ties to the
// smaller index, clamped to the number of non-special tokens. Special tokens
// are never selected. Throws ConfigError unless 0 < k <= 100.
TopKSelection select_topk(std::span<const double> scores,
                          std::span<const TokenId> tokens, double k_percent);
TopKSelection select_topk(const AttributionReport& report, double k_percent);

// Sentences derived from a selection. An empty result stands for the all-pad
// sentence of the original length.
std::vector<TokenId> mask_selected(std::span<const TokenId> tokens,
                                   const TopKSelection& selection);
std::vector<TokenId> delete_selected(std::span<const TokenId> tokens,
                                     const TopKSelection& selection);
std::vector<TokenId> keep_selected(std::span<const TokenId> tokens,
                                   const TopKSelection& selection);

// p(target | tokens); an empty sentence is evaluated as `pad_length` pads.
double class_probability(const GradientOracle& model,
                         const EmbeddingTable& table,
                         std::span<const TokenId> tokens, std::size_t target,
                         std::size_t pad_length);

// ln(p(y | selected words replaced by pad) / p(y | sentence)), y predicted on
// the original sentence.
double log_odds(const GradientOracle& model, const EmbeddingTable& table,
                std::span<const TokenId> tokens,
                const TopKSelection& selection);

// p(y | sentence) - p(y | sentence with the selected words deleted).
double comprehensiveness(const GradientOracle& model,
                         const EmbeddingTable& table,
                         std::span<const TokenId> tokens,
                         const TopKSelection& selection);

// p(y | sentence) - p(y | only the selected words, original order).
double sufficiency(const GradientOracle& model, const EmbeddingTable& table,
                   std::span<const TokenId> tokens,
                   const TopKSelection& selection);

// "random" ranks words by seeded uniform scores; every other name is an
// attribution Method.
struct RankingMethod {
  std::optional<Method> method;  // empty for random

  std::string name() const;
  bool operator==(const RankingMethod&) const = default;
};

RankingMethod parse_ranking_method(std::string_view name);

struct EvalConfig {
  AttributionOptions attribution;  // sentence_index and jobs are overridden
  std::vector<double> k_percents = {20.0};
  std::uint64_t seed = 0;  // for the random ranking
  unsigned jobs = 1;       // sentences evaluated concurrently
};

struct MetricRow {
  std::string method;
  double k_percent = 0.0;
  double log_odds = 0.0;
  double comprehensiveness = 0.0;
  double sufficiency = 0.0;
  std::optional<double> wae;            // path methods only
  std::optional<double> delta_percent;  // attribution methods only
  std::size_t n_sentences = 0;
};

struct RawRow {
  std::size_t sentence = 0;
  std::string method;
  double k_percent = 0.0;
  std::size_t predicted = 0;
  double log_odds = 0.0;
  double comprehensiveness = 0.0;
  double sufficiency = 0.0;
  std::optional<double> wae;
  std::optional<double> delta_percent;
  std::vector<std::size_t> selected;
};

struct EvalResult {
  std::vector<MetricRow> rows;  // method-major, then k in config order
  std::vector<RawRow> raw;      // sentence-major, then method, then k
};

// Empty sentences are skipped; throws Error if none remain or if no method
// is given. Model failures are rethrown with the sentence index attached.
EvalResult evaluate_dataset(const GradientOracle& model,
                            const EmbeddingTable& table,
                            const NeighborIndex* index,
                            std::span<const std::vector<TokenId>> sentences,
                            std::span<const RankingMethod> methods,
                            const EvalConfig& config);

// Header method,k,log_odds,comp,suff,wae,delta_percent,n after one "# "
// comment line per entry of `preamble`. Absent values are empty fields.
void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows,
                       std::span<const std::string> preamble = {});

nlohmann::json raw_row_to_json(const RawRow& row);

}  // namespace digrad

#endif  // DIGRAD_EVAL_HPP_
