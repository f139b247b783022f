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

// Path-integral attributions over word embeddings.
//
// For a path x^0 (baseline) .. x^m (input) the attribution of dimension i is
// the right-endpoint Riemann sum
//
//   sum_{k=1..m} dF(x^k)/dx_i * (x^k_i - x^{k-1}_i).
//
// On the straight line this is exactly the usual integrated-gradients sum
// (x_i - x'_i) * sum_{k=1..m} dF(x' + k/m (x - x'))/dx_i / m.

#ifndef DIGRAD_ATTRIBUTION_HPP_
#define DIGRAD_ATTRIBUTION_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "digrad/matrix.hpp"
#include "digrad/model.hpp"
#include "digrad/paths.hpp"
#include "digrad/vocab_embed.hpp"
#include "json.hpp"

namespace digrad {

enum class Method {
  kIg,
  kDigGreedy,
  kDigMaxCount,
  kDigRandomAnchor,
  kDigRandomNeighbor,
  kGradInput,
};

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

// True for every method that integrates along a path.
bool has_path(Method method);
Strategy strategy_of(Method method);

// How the per-word paths are combined into sentence-level evaluation points.
enum class PathMode {
  // Step k evaluates the sentence with every word at its own k-th point, so
  // the sum of attributions targets F(x) - F(baseline sentence).
  kJoint,
  // Word j walks its path while every other word stays at its input vector.
  kIsolated,
};

std::string_view to_string(PathMode mode);
PathMode parse_path_mode(std::string_view name);

struct AttributionOptions {
  PathConfig path;  // steps, upsample, seed, greedy metric; strategy unused
  OutputHead head = OutputHead::kProbability;
  std::optional<std::size_t> target;  // defaults to the predicted class
  std::size_t sentence_index = 0;     // for per-word random streams
  PathMode mode = PathMode::kJoint;
  unsigned jobs = 1;
};

struct AttributionReport {
  Method method = Method::kIg;
  std::vector<TokenId> tokens;
  Vector per_word;  // row sums of per_dim
  Matrix per_dim;   // n x D
  double f_input = 0.0;
  double f_baseline = 0.0;
  double delta_percent = 0.0;
  std::optional<double> wae;  // path methods only
  std::size_t predicted = 0;
  std::size_t target = 0;
  OutputHead head = OutputHead::kProbability;
  PathMode mode = PathMode::kJoint;
  std::size_t steps = 0;
  std::size_t upsample = 0;
  std::size_t knn = 0;
  std::uint64_t seed = 0;
  std::size_t clamps = 0;  // summed over all word paths
};

// Right-endpoint Riemann sum for one word. grads[k] is the gradient w.r.t.
// that word at path point k; grads[0] is never used. Throws LengthMismatch
// unless grads and path points pair up.
Vector riemann_attribution(std::span<const Vector> points,
                           std::span<const Vector> grads);
inline Vector riemann_attribution(const InterpolationPath& path,
                                  std::span<const Vector> grads) {
  return riemann_attribution(path.points, grads);
}

// The straight-line integrated-gradients sum computed directly from its
// closed form, jointly over the whole sentence.
Matrix integrated_gradients(const GradientOracle& model, const Matrix& input,
                            const Matrix& baseline, std::size_t target,
                            OutputHead head, std::size_t steps,
                            unsigned jobs = 1);

// Riemann sums along one path per word (all paths equally long). Returns
// the n x D per-dimension attributions.
Matrix attribute_along_paths(const GradientOracle& model, const Matrix& input,
                             std::span<const InterpolationPath> paths,
                             std::size_t target, OutputHead head,
                             PathMode mode = PathMode::kJoint,
                             unsigned jobs = 1);

// 100 * |sum - (f_input - f_baseline)| / max(|f_input - f_baseline|, 1e-8).
double delta_percent(double attribution_sum, double f_input,
                     double f_baseline);
double delta_percent(const AttributionReport& report);

// Mean over words of the mean distance from each interior path point to the
// nearest vocabulary row (pad excluded). Words without interior points
// contribute 0.
double wae(std::span<const InterpolationPath> paths,
           const EmbeddingTable& table, Metric metric = Metric::kEuclidean);

// The all-pad sentence of length n.
Matrix baseline_sentence(const EmbeddingTable& table, std::size_t n);

// Per-word paths for `tokens` under `method`, upsampled by the configured
// factor. `index` may be null for ig and dig-random-anchor.
std::vector<InterpolationPath> build_sentence_paths(
    std::span<const TokenId> tokens, Method method,
    const EmbeddingTable& table, const NeighborIndex* index,
    const AttributionOptions& options);

AttributionReport attribute_sentence(std::span<const TokenId> tokens,
                                     Method method, const GradientOracle& model,
                                     const EmbeddingTable& table,
                                     const NeighborIndex* index,
                                     const AttributionOptions& options);

// One JSON-lines record: tokens, per-word attributions, outputs, delta,
// WAE and method metadata.
nlohmann::json report_to_json(const AttributionReport& report,
                              const Vocabulary& vocab);

}  // namespace digrad

#endif  // DIGRAD_ATTRIBUTION_HPP_
