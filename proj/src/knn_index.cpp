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

#include <algorithm>
#include <cmath>
#include <fstream>

#include "digrad/errors.hpp"
#include "digrad/parallel.hpp"
#include "digrad/vocab_embed.hpp"
#include "internal.hpp"
#include "json.hpp"

namespace digrad {

namespace {

constexpr int kIndexFormatVersion = 1;
constexpr const char* kIndexFormat = "digrad-knn";

double norm(std::span<const double> a) {
  double s = 0.0;
  for (const double v : a) s += v * v;
  return std::sqrt(s);
}

double cosine_distance(std::span<const double> a, std::span<const double> b,
                       double norm_a, double norm_b) {
  if (norm_a == 0.0 || norm_b == 0.0) return 1.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return 1.0 - dot / (norm_a * norm_b);
}

bool closer(const Neighbor& a, const Neighbor& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.id < b.id;
}

}  // namespace

std::string_view to_string(Metric metric) {
  return metric == Metric::kCosine ? "cosine" : "euclidean";
}

Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::kEuclidean;
  if (name == "cosine") return Metric::kCosine;
  throw ConfigError("unknown metric '" + std::string(name) +
                    "' (expected euclidean or cosine)");
}

double distance(std::span<const double> a, std::span<const double> b,
                Metric metric) {
  if (a.size() != b.size()) throw ShapeError("distance: dimension mismatch");
  if (metric == Metric::kCosine) return cosine_distance(a, b, norm(a), norm(b));
  return std::sqrt(internal::squared_distance(a, b));
}

NeighborIndex::NeighborIndex(std::size_t k, Metric metric, std::size_t dim,
                             std::uint64_t table_hash,
                             std::vector<std::vector<Neighbor>> lists)
    : k_(k),
      metric_(metric),
      dim_(dim),
      table_hash_(table_hash),
      lists_(std::move(lists)) {}

std::span<const Neighbor> NeighborIndex::neighbors(TokenId id) const {
  if (id >= lists_.size()) throw UnknownToken("token id " + std::to_string(id));
  return lists_[id];
}

NeighborIndex build_knn_index(const EmbeddingTable& table, std::size_t k,
                              Metric metric, unsigned jobs) {
  if (k == 0) throw ConfigError("neighborhood size K must be >= 1");
  const std::size_t n = table.size();
  if (n < 3) throw Error("KNN index needs at least 3 vocabulary rows");
  const std::size_t keep = std::min(k, n - 2);

  Vector norms(n);
  for (TokenId id = 0; id < n; ++id) norms[id] = norm(table.row(id));

  std::vector<std::vector<Neighbor>> lists(n);
  parallel_for(n - 1, jobs, [&](std::size_t i) {
    const auto owner = static_cast<TokenId>(i + 1);  // skip pad
    const auto w = table.row(owner);
    std::vector<Neighbor> candidates;
    candidates.reserve(n - 2);
    for (TokenId u = 1; u < n; ++u) {
      if (u == owner) continue;
      const auto v = table.row(u);
      const double d =
          metric == Metric::kCosine
              ? cosine_distance(w, v, norms[owner], norms[u])
              : std::sqrt(internal::squared_distance(w, v));
      candidates.push_back({u, d});
    }
    std::partial_sort(candidates.begin(), candidates.begin() + keep,
                      candidates.end(), closer);
    candidates.resize(keep);
    lists[owner] = std::move(candidates);
  });
  return NeighborIndex(k, metric, table.dim(), table.hash(), std::move(lists));
}

void NeighborIndex::write(std::ostream& out) const {
  nlohmann::json doc;
  doc["format"] = kIndexFormat;
  doc["version"] = kIndexFormatVersion;
  doc["k"] = k_;
  doc["metric"] = std::string(to_string(metric_));
  doc["vocab_size"] = lists_.size();
  doc["dim"] = dim_;
  doc["table_hash"] = internal::hex64(table_hash_);
  auto& ids = doc["neighbors"] = nlohmann::json::array();
  auto& dists = doc["distances"] = nlohmann::json::array();
  for (const auto& list : lists_) {
    auto id_row = nlohmann::json::array();
    auto dist_row = nlohmann::json::array();
    for (const auto& nb : list) {
      id_row.push_back(nb.id);
      dist_row.push_back(nb.distance);
    }
    ids.push_back(std::move(id_row));
    dists.push_back(std::move(dist_row));
  }
  out << doc.dump() << '\n';
}

void NeighborIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write index file " + path.string());
  write(out);
}

NeighborIndex NeighborIndex::read(std::istream& in,
                                  const EmbeddingTable& table) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("index file: ") + e.what());
  }
  try {
    if (doc.at("format") != kIndexFormat) {
      throw IncompatibleArtifact("not a digrad KNN index");
    }
    if (doc.at("version").get<int>() != kIndexFormatVersion) {
      throw IncompatibleArtifact("unsupported index version " +
                                 doc.at("version").dump());
    }
    const auto vocab_size = doc.at("vocab_size").get<std::size_t>();
    const auto dim = doc.at("dim").get<std::size_t>();
    const auto hash = doc.at("table_hash").get<std::string>();
    if (vocab_size != table.size() || dim != table.dim() ||
        hash != internal::hex64(table.hash())) {
      throw IncompatibleArtifact(
          "index header {|V|=" + std::to_string(vocab_size) +
          ", D=" + std::to_string(dim) + ", hash=" + hash +
          "} does not match the embedding table {|V|=" +
          std::to_string(table.size()) + ", D=" + std::to_string(table.dim()) +
          ", hash=" + internal::hex64(table.hash()) + "}");
    }
    const auto& ids = doc.at("neighbors");
    const auto& dists = doc.at("distances");
    if (ids.size() != vocab_size || dists.size() != vocab_size) {
      throw ParseError("index file: neighbor list count mismatch");
    }
    std::vector<std::vector<Neighbor>> lists(vocab_size);
    for (std::size_t t = 0; t < vocab_size; ++t) {
      if (ids[t].size() != dists[t].size()) {
        throw ParseError("index file: ragged list for token " +
                         std::to_string(t));
      }
      for (std::size_t j = 0; j < ids[t].size(); ++j) {
        const auto id = ids[t][j].get<TokenId>();
        if (id >= vocab_size || id == kPadId || id == t) {
          throw ParseError("index file: invalid neighbor id for token " +
                           std::to_string(t));
        }
        lists[t].push_back({id, dists[t][j].get<double>()});
      }
    }
    return NeighborIndex(doc.at("k").get<std::size_t>(),
                         parse_metric(doc.at("metric").get<std::string>()),
                         dim, table.hash(), std::move(lists));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("index file: ") + e.what());
  }
}

NeighborIndex NeighborIndex::load(const std::filesystem::path& path,
                                  const EmbeddingTable& table) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open index file " + path.string());
  return read(in, table);
}

}  // namespace digrad
