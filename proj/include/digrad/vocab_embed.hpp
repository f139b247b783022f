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

// Tokenization, vocabulary, embedding table and the exact nearest-neighbor
// index over it.

#ifndef DIGRAD_VOCAB_EMBED_HPP_
#define DIGRAD_VOCAB_EMBED_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "digrad/matrix.hpp"

namespace digrad {

using TokenId = std::uint32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr std::string_view kPadSurface = "<pad>";
inline constexpr std::string_view kUnkSurface = "<unk>";

struct Token {
  TokenId id = kPadId;
  std::string surface;
};

inline bool is_special(TokenId id) { return id == kPadId || id == kUnkId; }

// Dense id <-> surface mapping. Ids 0 and 1 are always <pad> and <unk>.
class Vocabulary {
 public:
  Vocabulary();

  // `surfaces` must start with <pad>, <unk> and contain no duplicates.
  explicit Vocabulary(std::vector<std::string> surfaces);

  // Appends a surface if absent; returns its id either way.
  TokenId add(std::string_view surface);

  std::optional<TokenId> find(std::string_view surface) const;
  TokenId id_of(std::string_view surface) const {
    return find(surface).value_or(kUnkId);
  }
  const std::string& surface(TokenId id) const { return surfaces_.at(id); }
  Token token(TokenId id) const { return {id, surface(id)}; }

  std::size_t size() const { return surfaces_.size(); }
  const std::vector<std::string>& surfaces() const { return surfaces_; }

 private:
  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, TokenId> ids_;
};

// Lowercases ASCII letters and splits on whitespace; every ASCII punctuation
// character becomes a token of its own. Bytes >= 0x80 are word characters.
std::vector<std::string> split_words(std::string_view text);

std::vector<TokenId> tokenize(std::string_view text, const Vocabulary& vocab);

// Vocabulary plus one D-dimensional row per token. Rows are finite and the
// pad row is all zeros.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(Vocabulary vocab, Matrix vectors);

  std::size_t dim() const { return vectors_.cols(); }
  std::size_t size() const { return vectors_.rows(); }
  const Vocabulary& vocab() const { return vocab_; }
  const Matrix& vectors() const { return vectors_; }

  std::span<const double> row(TokenId id) const;

  // Writable access for trainers. Throws for the pad row, which is frozen.
  std::span<double> mutable_row(TokenId id);

  // n x D matrix of the rows for `ids`.
  Matrix embed(std::span<const TokenId> ids) const;

  // FNV-1a over dims, surfaces and the bit patterns of every value.
  std::uint64_t hash() const;

 private:
  Vocabulary vocab_;
  Matrix vectors_;
};

// Counts tokens over `corpus`, keeps those with count >= min_count ordered by
// descending count then surface, and draws rows from U[-0.1, 0.1].
// Throws EmptyCorpus when nothing survives the threshold.
EmbeddingTable build_vocab(std::span<const std::string> corpus,
                           std::size_t min_count, std::size_t dim,
                           std::uint64_t seed);

// GloVe-style text: "surface v1 ... vD" per line. A missing <pad> row is
// synthesized as zeros and a missing <unk> row as the mean of all rows.
EmbeddingTable parse_embeddings(std::istream& in);
EmbeddingTable load_embeddings(const std::filesystem::path& path);

// Writes rows in id order with round-trip precision, so reloading yields a
// table with the same hash().
void write_embeddings(const EmbeddingTable& table, std::ostream& out);
void save_embeddings(const EmbeddingTable& table,
                     const std::filesystem::path& path);

enum class Metric { kEuclidean, kCosine };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);

// Euclidean distance, or 1 - cosine similarity. A zero vector has cosine
// distance 1 to everything.
double distance(std::span<const double> a, std::span<const double> b,
                Metric metric);

struct Neighbor {
  TokenId id = kPadId;
  double distance = 0.0;

  bool operator==(const Neighbor&) const = default;
};

// Top-K neighbor lists per token, ascending by distance (ties by id). Lists
// never contain their owner or <pad>; the pad token has an empty list.
class NeighborIndex {
 public:
  NeighborIndex() = default;
  NeighborIndex(std::size_t k, Metric metric, std::size_t dim,
                std::uint64_t table_hash,
                std::vector<std::vector<Neighbor>> lists);

  std::size_t k() const { return k_; }
  Metric metric() const { return metric_; }
  std::size_t vocab_size() const { return lists_.size(); }
  std::size_t dim() const { return dim_; }
  std::uint64_t table_hash() const { return table_hash_; }

  std::span<const Neighbor> neighbors(TokenId id) const;

  void save(const std::filesystem::path& path) const;
  void write(std::ostream& out) const;

  // Rejects files whose header disagrees with `table`.
  static NeighborIndex load(const std::filesystem::path& path,
                            const EmbeddingTable& table);
  static NeighborIndex read(std::istream& in, const EmbeddingTable& table);

  bool operator==(const NeighborIndex&) const = default;

 private:
  std::size_t k_ = 0;
  Metric metric_ = Metric::kEuclidean;
  std::size_t dim_ = 0;
  std::uint64_t table_hash_ = 0;
  std::vector<std::vector<Neighbor>> lists_;
};

// Exact brute-force K nearest neighbors. Each list has min(k, |V| - 2)
// entries. Work is split across `jobs` threads without affecting results.
NeighborIndex build_knn_index(const EmbeddingTable& table, std::size_t k,
                              Metric metric = Metric::kEuclidean,
                              unsigned jobs = 1);

}  // namespace digrad

#endif  // DIGRAD_VOCAB_EMBED_HPP_
