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

#include "digrad/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "digrad/errors.hpp"
#include "digrad/parallel.hpp"

namespace digrad {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kIg:
      return "ig";
    case Method::kDigGreedy:
      return "dig-greedy";
    case Method::kDigMaxCount:
      return "dig-maxcount";
    case Method::kDigRandomAnchor:
      return "dig-random-anchor";
    case Method::kDigRandomNeighbor:
      return "dig-random-neighbor";
    case Method::kGradInput:
      return "grad-x-input";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "ig") return Method::kIg;
  if (name == "dig-greedy") return Method::kDigGreedy;
  if (name == "dig-maxcount") return Method::kDigMaxCount;
  if (name == "dig-random-anchor") return Method::kDigRandomAnchor;
  if (name == "dig-random-neighbor") return Method::kDigRandomNeighbor;
  if (name == "grad-x-input") return Method::kGradInput;
  throw ConfigError("unknown attribution method '" + std::string(name) + "'");
}

bool has_path(Method method) { return method != Method::kGradInput; }

Strategy strategy_of(Method method) {
  switch (method) {
    case Method::kDigGreedy:
      return Strategy::kGreedy;
    case Method::kDigMaxCount:
      return Strategy::kMaxCount;
    case Method::kDigRandomAnchor:
      return Strategy::kRandomAnchor;
    case Method::kDigRandomNeighbor:
      return Strategy::kRandomNeighbor;
    case Method::kIg:
    case Method::kGradInput:
      return Strategy::kLinear;
  }
  return Strategy::kLinear;
}

std::string_view to_string(PathMode mode) {
  return mode == PathMode::kIsolated ? "isolated" : "joint";
}

PathMode parse_path_mode(std::string_view name) {
  if (name == "joint") return PathMode::kJoint;
  if (name == "isolated") return PathMode::kIsolated;
  throw ConfigError("unknown path mode '" + std::string(name) +
                    "' (expected joint or isolated)");
}

Vector riemann_attribution(std::span<const Vector> points,
                           std::span<const Vector> grads) {
  if (points.empty()) throw LengthMismatch("empty path");
  if (grads.size() != points.size()) {
    throw LengthMismatch("path has " + std::to_string(points.size()) +
                         " points but " + std::to_string(grads.size()) +
                         " gradients were supplied");
  }
  const std::size_t d = points.front().size();
  Vector attr(d, 0.0);
  for (std::size_t k = 1; k < points.size(); ++k) {
    if (points[k].size() != d || grads[k].size() != d) {
      throw LengthMismatch("gradient/point dimension mismatch at step " +
                           std::to_string(k));
    }
    for (std::size_t i = 0; i < d; ++i) {
      attr[i] += grads[k][i] * (points[k][i] - points[k - 1][i]);
    }
  }
  return attr;
}

Matrix integrated_gradients(const GradientOracle& model, const Matrix& input,
                            const Matrix& baseline, std::size_t target,
                            OutputHead head, std::size_t steps, unsigned jobs) {
  if (steps == 0) throw ConfigError("steps must be >= 1");
  if (input.rows() != baseline.rows() || input.cols() != baseline.cols()) {
    throw ShapeError("input and baseline shapes differ");
  }
  const double m = static_cast<double>(steps);
  std::vector<GradientRequest> requests(steps);
  for (std::size_t k = 1; k <= steps; ++k) {
    Matrix point(input.rows(), input.cols());
    const double alpha = static_cast<double>(k) / m;
    for (std::size_t j = 0; j < input.data().size(); ++j) {
      point.data()[j] = baseline.data()[j] +
                        alpha * (input.data()[j] - baseline.data()[j]);
    }
    requests[k - 1] = {std::move(point), target, head};
  }
  const auto responses = model.gradient_batch(requests, jobs);

  Matrix grad_sum(input.rows(), input.cols());
  for (const auto& r : responses) {
    for (std::size_t j = 0; j < grad_sum.data().size(); ++j) {
      grad_sum.data()[j] += r.grads.data()[j];
    }
  }
  Matrix attr(input.rows(), input.cols());
  for (std::size_t j = 0; j < attr.data().size(); ++j) {
    attr.data()[j] = (input.data()[j] - baseline.data()[j]) *
                     grad_sum.data()[j] * (1.0 / m);
  }
  return attr;
}

Matrix attribute_along_paths(const GradientOracle& model, const Matrix& input,
                             std::span<const InterpolationPath> paths,
                             std::size_t target, OutputHead head,
                             PathMode mode, unsigned jobs) {
  const std::size_t n = input.rows();
  const std::size_t d = input.cols();
  if (paths.size() != n) {
    throw LengthMismatch(std::to_string(paths.size()) + " paths for " +
                         std::to_string(n) + " words");
  }
  const std::size_t len = n == 0 ? 0 : paths.front().size();
  for (std::size_t j = 0; j < n; ++j) {
    const auto& p = paths[j];
    if (p.size() != len || len == 0) {
      throw LengthMismatch("word paths differ in length");
    }
    const auto x = input.row(j);
    if (p.input().size() != d || !std::equal(x.begin(), x.end(),
                                             p.input().begin())) {
      throw ShapeError("path " + std::to_string(j) +
                       " does not end at the input word vector");
    }
  }

  // grads[j][k]: gradient w.r.t. word j at path point k.
  std::vector<std::vector<Vector>> grads(n,
                                         std::vector<Vector>(len, Vector(d)));
  if (mode == PathMode::kJoint) {
    std::vector<GradientRequest> requests;
    requests.reserve(len > 0 ? len - 1 : 0);
    for (std::size_t k = 1; k < len; ++k) {
      Matrix point(0, d);
      for (std::size_t j = 0; j < n; ++j) point.push_row(paths[j].points[k]);
      requests.push_back({std::move(point), target, head});
    }
    const auto responses = model.gradient_batch(requests, jobs);
    for (std::size_t k = 1; k < len; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        const auto g = responses[k - 1].grads.row(j);
        grads[j][k].assign(g.begin(), g.end());
      }
    }
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<GradientRequest> requests;
      for (std::size_t k = 1; k < len; ++k) {
        Matrix point = input;
        const auto& p = paths[j].points[k];
        std::copy(p.begin(), p.end(), point.row(j).begin());
        requests.push_back({std::move(point), target, head});
      }
      const auto responses = model.gradient_batch(requests, jobs);
      for (std::size_t k = 1; k < len; ++k) {
        const auto g = responses[k - 1].grads.row(j);
        grads[j][k].assign(g.begin(), g.end());
      }
    }
  }

  Matrix attr(n, d);
  for (std::size_t j = 0; j < n; ++j) {
    const Vector a = riemann_attribution(paths[j], grads[j]);
    std::copy(a.begin(), a.end(), attr.row(j).begin());
  }
  return attr;
}

double delta_percent(double attribution_sum, double f_input,
                     double f_baseline) {
  const double target = f_input - f_baseline;
  return 100.0 * std::abs(attribution_sum - target) /
         std::max(std::abs(target), 1e-8);
}

double delta_percent(const AttributionReport& report) {
  double sum = 0.0;
  for (const double v : report.per_word) sum += v;
  return delta_percent(sum, report.f_input, report.f_baseline);
}

double wae(std::span<const InterpolationPath> paths,
           const EmbeddingTable& table, Metric metric) {
  if (paths.empty()) return 0.0;
  double total = 0.0;
  for (const auto& path : paths) {
    if (path.size() <= 2) continue;
    double word_sum = 0.0;
    for (std::size_t k = 1; k + 1 < path.size(); ++k) {
      double best = std::numeric_limits<double>::infinity();
      for (TokenId id = 1; id < table.size(); ++id) {
        best = std::min(best, distance(path.points[k], table.row(id), metric));
      }
      word_sum += best;
    }
    total += word_sum / static_cast<double>(path.size() - 2);
  }
  return total / static_cast<double>(paths.size());
}

Matrix baseline_sentence(const EmbeddingTable& table, std::size_t n) {
  const std::vector<TokenId> pads(n, kPadId);
  return table.embed(pads);
}

std::vector<InterpolationPath> build_sentence_paths(
    std::span<const TokenId> tokens, Method method,
    const EmbeddingTable& table, const NeighborIndex* index,
    const AttributionOptions& options) {
  PathConfig config = options.path;
  config.strategy = strategy_of(method);
  const auto baseline = table.row(kPadId);
  std::vector<InterpolationPath> paths(tokens.size());
  parallel_for(tokens.size(), options.jobs, [&](std::size_t j) {
    auto path = build_path(tokens[j], table, index, baseline, config,
                           derive_seed(config.seed, options.sentence_index, j));
    paths[j] = upsample(path, config.upsample);
  });
  return paths;
}

AttributionReport attribute_sentence(std::span<const TokenId> tokens,
                                     Method method, const GradientOracle& model,
                                     const EmbeddingTable& table,
                                     const NeighborIndex* index,
                                     const AttributionOptions& options) {
  if (tokens.empty()) throw Error("cannot attribute an empty sentence");
  if (model.dim() != table.dim()) {
    throw ShapeError("model expects dimension " + std::to_string(model.dim()) +
                     " but the table has " + std::to_string(table.dim()));
  }
  for (const TokenId id : tokens) {
    if (id >= table.size()) {
      throw UnknownToken("token id " + std::to_string(id) +
                         " is not in the vocabulary");
    }
  }

  AttributionReport report;
  report.method = method;
  report.tokens.assign(tokens.begin(), tokens.end());
  report.head = options.head;
  report.mode = options.mode;
  report.steps = options.path.steps;
  report.upsample = options.path.upsample;
  report.knn = index != nullptr ? index->k() : 0;
  report.seed = options.path.seed;

  const Matrix input = table.embed(tokens);
  const Matrix base = baseline_sentence(table, tokens.size());
  report.predicted = model.predict(input);
  report.target = options.target.value_or(report.predicted);
  report.f_input = model.output(input, report.target, options.head);
  report.f_baseline = model.output(base, report.target, options.head);

  if (method == Method::kGradInput) {
    const auto g = model.gradient({input, report.target, options.head});
    report.per_dim = Matrix(input.rows(), input.cols());
    for (std::size_t j = 0; j < input.data().size(); ++j) {
      report.per_dim.data()[j] = g.grads.data()[j] * input.data()[j];
    }
  } else {
    const auto paths =
        build_sentence_paths(tokens, method, table, index, options);
    if (method == Method::kIg && options.mode == PathMode::kJoint) {
      const std::size_t steps = options.path.steps << options.path.upsample;
      report.per_dim = integrated_gradients(model, input, base, report.target,
                                            options.head, steps, options.jobs);
    } else {
      report.per_dim =
          attribute_along_paths(model, input, paths, report.target,
                                options.head, options.mode, options.jobs);
    }
    report.wae = wae(paths, table, options.path.metric);
    for (const auto& p : paths) report.clamps += p.clamps;
  }

  report.per_word.assign(tokens.size(), 0.0);
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    for (const double v : report.per_dim.row(j)) report.per_word[j] += v;
  }
  report.delta_percent = delta_percent(report);
  return report;
}

nlohmann::json report_to_json(const AttributionReport& report,
                              const Vocabulary& vocab) {
  nlohmann::json record;
  record["method"] = std::string(to_string(report.method));
  auto surfaces = nlohmann::json::array();
  for (const TokenId id : report.tokens) surfaces.push_back(vocab.surface(id));
  record["tokens"] = std::move(surfaces);
  record["token_ids"] = report.tokens;
  record["attributions"] = report.per_word;
  record["predicted"] = report.predicted;
  record["target"] = report.target;
  record["head"] = std::string(to_string(report.head));
  record["f_input"] = report.f_input;
  record["f_baseline"] = report.f_baseline;
  record["delta_percent"] = report.delta_percent;
  record["wae"] = report.wae ? nlohmann::json(*report.wae) : nlohmann::json();
  record["m"] = report.steps;
  record["f"] = report.upsample;
  record["K"] = report.knn;
  record["seed"] = report.seed;
  record["path_mode"] = std::string(to_string(report.mode));
  record["clamps"] = report.clamps;
  return record;
}

}  // namespace digrad
