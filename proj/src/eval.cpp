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

#include "digrad/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

#include "digrad/errors.hpp"
#include "digrad/parallel.hpp"

namespace digrad {
namespace {

bool is_selected(const TopKSelection& selection, std::size_t j) {
  return std::find(selection.selected.begin(), selection.selected.end(), j) !=
         selection.selected.end();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json();
}

struct SentenceOutcome {
  std::size_t predicted = 0;
  std::vector<RawRow> rows;  // method-major, then k
};

}  // namespace

TopKSelection select_topk(std::span<const double> scores,
                          std::span<const TokenId> tokens, double k_percent) {
  if (!(k_percent > 0.0 && k_percent <= 100.0)) {
    throw ConfigError("k must be in (0, 100], got " +
                      format_double(k_percent));
  }
  if (scores.size() != tokens.size()) {
    throw LengthMismatch(std::to_string(scores.size()) + " scores for " +
                         std::to_string(tokens.size()) + " tokens");
  }
  std::vector<std::size_t> candidates;
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    if (!is_special(tokens[j])) candidates.push_back(j);
  }
  const double exact = k_percent * static_cast<double>(tokens.size()) / 100.0;
  std::size_t count = static_cast<std::size_t>(std::floor(exact + 0.5));
  count = std::min(std::max<std::size_t>(count, 1), candidates.size());

  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  candidates.resize(count);
  return {k_percent, std::move(candidates)};
}

TopKSelection select_topk(const AttributionReport& report, double k_percent) {
  return select_topk(report.per_word, report.tokens, k_percent);
}

std::vector<TokenId> mask_selected(std::span<const TokenId> tokens,
                                   const TopKSelection& selection) {
  std::vector<TokenId> out(tokens.begin(), tokens.end());
  for (const std::size_t j : selection.selected) out.at(j) = kPadId;
  return out;
}

std::vector<TokenId> delete_selected(std::span<const TokenId> tokens,
                                     const TopKSelection& selection) {
  std::vector<TokenId> out;
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    if (!is_selected(selection, j)) out.push_back(tokens[j]);
  }
  return out;
}

std::vector<TokenId> keep_selected(std::span<const TokenId> tokens,
                                   const TopKSelection& selection) {
  std::vector<TokenId> out;
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    if (is_selected(selection, j)) out.push_back(tokens[j]);
  }
  return out;
}

double class_probability(const GradientOracle& model,
                         const EmbeddingTable& table,
                         std::span<const TokenId> tokens, std::size_t target,
                         std::size_t pad_length) {
  if (tokens.empty()) {
    const std::vector<TokenId> pads(std::max<std::size_t>(pad_length, 1),
                                    kPadId);
    return model.forward(table.embed(pads)).at(target);
  }
  return model.forward(table.embed(tokens)).at(target);
}

double log_odds(const GradientOracle& model, const EmbeddingTable& table,
                std::span<const TokenId> tokens,
                const TopKSelection& selection) {
  const Matrix x = table.embed(tokens);
  const Vector p = model.forward(x);
  const std::size_t y = model.predict(x);
  const auto masked = mask_selected(tokens, selection);
  const double after =
      class_probability(model, table, masked, y, tokens.size());
  const double tiny = std::numeric_limits<double>::min();
  return std::log(std::max(after, tiny)) - std::log(std::max(p[y], tiny));
}

double comprehensiveness(const GradientOracle& model,
                         const EmbeddingTable& table,
                         std::span<const TokenId> tokens,
                         const TopKSelection& selection) {
  const Matrix x = table.embed(tokens);
  const std::size_t y = model.predict(x);
  const auto rest = delete_selected(tokens, selection);
  return model.forward(x)[y] -
         class_probability(model, table, rest, y, tokens.size());
}

double sufficiency(const GradientOracle& model, const EmbeddingTable& table,
                   std::span<const TokenId> tokens,
                   const TopKSelection& selection) {
  const Matrix x = table.embed(tokens);
  const std::size_t y = model.predict(x);
  const auto kept = keep_selected(tokens, selection);
  return model.forward(x)[y] -
         class_probability(model, table, kept, y, tokens.size());
}

std::string RankingMethod::name() const {
  return method ? std::string(to_string(*method)) : std::string("random");
}

RankingMethod parse_ranking_method(std::string_view name) {
  if (name == "random") return {};
  return {parse_method(name)};
}

EvalResult evaluate_dataset(const GradientOracle& model,
                            const EmbeddingTable& table,
                            const NeighborIndex* index,
                            std::span<const std::vector<TokenId>> sentences,
                            std::span<const RankingMethod> methods,
                            const EvalConfig& config) {
  if (methods.empty()) throw Error("no evaluation methods given");
  if (config.k_percents.empty()) throw ConfigError("no k values given");
  for (const double k : config.k_percents) {
    if (!(k > 0.0 && k <= 100.0)) {
      throw ConfigError("k must be in (0, 100], got " + format_double(k));
    }
  }
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (!sentences[i].empty()) kept.push_back(i);
  }
  if (kept.empty()) throw Error("dataset has no non-empty sentences");

  std::vector<SentenceOutcome> outcomes(kept.size());
  parallel_for(kept.size(), config.jobs, [&](std::size_t slot) {
    const std::size_t i = kept[slot];
    const auto& tokens = sentences[i];
    try {
      SentenceOutcome& out = outcomes[slot];
      out.predicted = model.predict(table.embed(tokens));
      for (const auto& rm : methods) {
        Vector scores;
        std::optional<double> wae_value;
        std::optional<double> delta;
        if (rm.method) {
          AttributionOptions options = config.attribution;
          options.sentence_index = i;
          options.jobs = 1;
          options.target = out.predicted;
          const auto report =
              attribute_sentence(tokens, *rm.method, model, table, index,
                                 options);
          scores = report.per_word;
          wae_value = report.wae;
          delta = report.delta_percent;
        } else {
          std::mt19937_64 rng(
              derive_seed(config.seed ^ 0x72616e646f6dULL, i, 0));
          std::uniform_real_distribution<double> unit(0.0, 1.0);
          scores.resize(tokens.size());
          for (double& s : scores) s = unit(rng);
        }
        for (const double k : config.k_percents) {
          const auto selection = select_topk(scores, tokens, k);
          RawRow row;
          row.sentence = i;
          row.method = rm.name();
          row.k_percent = k;
          row.predicted = out.predicted;
          row.log_odds = log_odds(model, table, tokens, selection);
          row.comprehensiveness =
              comprehensiveness(model, table, tokens, selection);
          row.sufficiency = sufficiency(model, table, tokens, selection);
          row.wae = wae_value;
          row.delta_percent = delta;
          row.selected = selection.selected;
          out.rows.push_back(std::move(row));
        }
      }
    } catch (const std::exception& e) {
      throw Error("sentence " + std::to_string(i) + ": " + e.what());
    }
  });

  EvalResult result;
  const std::size_t nk = config.k_percents.size();
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    for (std::size_t ki = 0; ki < nk; ++ki) {
      MetricRow row;
      row.method = methods[mi].name();
      row.k_percent = config.k_percents[ki];
      row.n_sentences = outcomes.size();
      double wae_sum = 0.0;
      double delta_sum = 0.0;
      bool has_wae = true;
      bool has_delta = true;
      for (const auto& out : outcomes) {
        const RawRow& r = out.rows[mi * nk + ki];
        row.log_odds += r.log_odds;
        row.comprehensiveness += r.comprehensiveness;
        row.sufficiency += r.sufficiency;
        has_wae = has_wae && r.wae.has_value();
        has_delta = has_delta && r.delta_percent.has_value();
        if (r.wae) wae_sum += *r.wae;
        if (r.delta_percent) delta_sum += *r.delta_percent;
      }
      const double n = static_cast<double>(row.n_sentences);
      row.log_odds /= n;
      row.comprehensiveness /= n;
      row.sufficiency /= n;
      if (has_wae) row.wae = wae_sum / n;
      if (has_delta) row.delta_percent = delta_sum / n;
      result.rows.push_back(std::move(row));
    }
  }
  for (auto& out : outcomes) {
    for (auto& r : out.rows) result.raw.push_back(std::move(r));
  }
  return result;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricRow> rows,
                       std::span<const std::string> preamble) {
  for (const auto& line : preamble) out << "# " << line << '\n';
  out << "method,k,log_odds,comp,suff,wae,delta_percent,n\n";
  for (const auto& r : rows) {
    out << r.method << ',' << format_double(r.k_percent) << ','
        << format_double(r.log_odds) << ','
        << format_double(r.comprehensiveness) << ','
        << format_double(r.sufficiency) << ',' << format_optional(r.wae)
        << ',' << format_optional(r.delta_percent) << ',' << r.n_sentences
        << '\n';
  }
}

nlohmann::json raw_row_to_json(const RawRow& row) {
  nlohmann::json j;
  j["sentence"] = row.sentence;
  j["method"] = row.method;
  j["k"] = row.k_percent;
  j["predicted"] = row.predicted;
  j["log_odds"] = row.log_odds;
  j["comp"] = row.comprehensiveness;
  j["suff"] = row.sufficiency;
  j["wae"] = optional_json(row.wae);
  j["delta_percent"] = optional_json(row.delta_percent);
  j["selected"] = row.selected;
  return j;
}

}  // namespace digrad
