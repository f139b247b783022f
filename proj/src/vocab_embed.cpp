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

#include "digrad/vocab_embed.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "digrad/errors.hpp"
#include "internal.hpp"

namespace digrad {

Vocabulary::Vocabulary() {
  add(kPadSurface);
  add(kUnkSurface);
}

Vocabulary::Vocabulary(std::vector<std::string> surfaces) {
  if (surfaces.size() < 2 || surfaces[kPadId] != kPadSurface ||
      surfaces[kUnkId] != kUnkSurface) {
    throw Error("vocabulary must start with <pad>, <unk>");
  }
  for (auto& s : surfaces) {
    if (ids_.count(s) != 0) throw Error("duplicate vocabulary entry: " + s);
    ids_.emplace(s, static_cast<TokenId>(surfaces_.size()));
    surfaces_.push_back(std::move(s));
  }
}

TokenId Vocabulary::add(std::string_view surface) {
  if (auto id = find(surface)) return *id;
  const auto id = static_cast<TokenId>(surfaces_.size());
  surfaces_.emplace_back(surface);
  ids_.emplace(surfaces_.back(), id);
  return id;
}

std::optional<TokenId> Vocabulary::find(std::string_view surface) const {
  auto it = ids_.find(std::string(surface));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

namespace {

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_ascii_punct(unsigned char c) {
  return c < 0x80 && std::ispunct(c) != 0;
}

}  // namespace

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) words.push_back(std::move(current));
    current.clear();
  };
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_ascii_space(c)) {
      flush();
    } else if (is_ascii_punct(c)) {
      flush();
      words.emplace_back(1, ch);
    } else if (c < 0x80) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      current.push_back(ch);
    }
  }
  flush();
  return words;
}

std::vector<TokenId> tokenize(std::string_view text, const Vocabulary& vocab) {
  std::vector<TokenId> ids;
  for (const auto& w : split_words(text)) ids.push_back(vocab.id_of(w));
  return ids;
}

EmbeddingTable::EmbeddingTable(Vocabulary vocab, Matrix vectors)
    : vocab_(std::move(vocab)), vectors_(std::move(vectors)) {
  if (vectors_.rows() != vocab_.size()) {
    throw ShapeError("embedding rows (" + std::to_string(vectors_.rows()) +
                     ") != vocabulary size (" + std::to_string(vocab_.size()) +
                     ")");
  }
  if (vectors_.cols() == 0) throw ShapeError("embedding dimension is zero");
  for (const double v : vectors_.data()) {
    if (!std::isfinite(v)) throw Error("embedding table has non-finite value");
  }
  for (const double v : vectors_.row(kPadId)) {
    if (v != 0.0) throw Error("pad embedding row must be all zeros");
  }
}

std::span<const double> EmbeddingTable::row(TokenId id) const {
  if (id >= size()) throw UnknownToken("token id " + std::to_string(id));
  return vectors_.row(id);
}

std::span<double> EmbeddingTable::mutable_row(TokenId id) {
  if (id == kPadId) throw Error("pad embedding row is frozen");
  if (id >= size()) throw UnknownToken("token id " + std::to_string(id));
  return vectors_.row(id);
}

Matrix EmbeddingTable::embed(std::span<const TokenId> ids) const {
  Matrix out(ids.size(), dim());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto src = row(ids[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

std::uint64_t EmbeddingTable::hash() const {
  internal::Fnv1a h;
  h.u64(size());
  h.u64(dim());
  for (const auto& s : vocab_.surfaces()) h.str(s);
  for (const double v : vectors_.data()) h.f64(v);
  return h.digest();
}

EmbeddingTable build_vocab(std::span<const std::string> corpus,
                           std::size_t min_count, std::size_t dim,
                           std::uint64_t seed) {
  if (dim == 0) throw ShapeError("embedding dimension must be positive");
  std::map<std::string, std::size_t> counts;
  for (const auto& text : corpus) {
    for (auto& w : split_words(text)) ++counts[std::move(w)];
  }

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [surface, count] : counts) {
    if (count >= std::max<std::size_t>(min_count, 1) &&
        surface != kPadSurface && surface != kUnkSurface) {
      kept.emplace_back(surface, count);
    }
  }
  if (kept.empty()) {
    throw EmptyCorpus("no token occurs at least " + std::to_string(min_count) +
                      " times");
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  for (const auto& [surface, count] : kept) vocab.add(surface);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> init(-0.1, 0.1);
  Matrix vectors(vocab.size(), dim);
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    for (std::size_t c = 0; c < dim; ++c) vectors(r, c) = init(rng);
  }
  std::fill(vectors.row(kPadId).begin(), vectors.row(kPadId).end(), 0.0);
  return EmbeddingTable(std::move(vocab), std::move(vectors));
}

EmbeddingTable parse_embeddings(std::istream& in) {
  std::vector<std::string> surfaces;
  std::vector<Vector> rows;
  std::optional<Vector> unk_row;
  std::size_t dim = 0;
  std::map<std::string, std::size_t> seen;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string surface;
    if (!(fields >> surface)) continue;  // blank line

    Vector values;
    std::string field;
    while (fields >> field) {
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (end != field.c_str() + field.size() || !std::isfinite(v)) {
        throw ParseError("malformed value '" + field + "'", line_no);
      }
      values.push_back(v);
    }
    if (values.empty()) {
      throw ParseError("no vector values for '" + surface + "'", line_no);
    }
    if (dim == 0) {
      dim = values.size();
    } else if (values.size() != dim) {
      throw DimensionMismatch("line " + std::to_string(line_no) + ": '" +
                              surface + "' has " +
                              std::to_string(values.size()) +
                              " values, expected " + std::to_string(dim));
    }
    if (!seen.emplace(surface, line_no).second) {
      throw ParseError("duplicate surface '" + surface + "'", line_no);
    }

    // A <pad> row in the file is ignored; the pad row is always zero.
    if (surface == kPadSurface) {
      continue;
    } else if (surface == kUnkSurface) {
      unk_row = std::move(values);
    } else {
      surfaces.push_back(std::move(surface));
      rows.push_back(std::move(values));
    }
  }
  if (dim == 0) throw ParseError("embedding file has no rows", line_no);

  if (!unk_row) {
    Vector mean(dim, 0.0);
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < dim; ++c) mean[c] += r[c];
    }
    if (!rows.empty()) {
      for (auto& v : mean) v /= static_cast<double>(rows.size());
    }
    unk_row = std::move(mean);
  }

  std::vector<std::string> all{std::string(kPadSurface),
                               std::string(kUnkSurface)};
  all.insert(all.end(), surfaces.begin(), surfaces.end());
  Matrix vectors(all.size(), dim);
  std::copy(unk_row->begin(), unk_row->end(), vectors.row(kUnkId).begin());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].begin(), rows[i].end(), vectors.row(i + 2).begin());
  }
  return EmbeddingTable(Vocabulary(std::move(all)), std::move(vectors));
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file " + path.string());
  return parse_embeddings(in);
}

void write_embeddings(const EmbeddingTable& table, std::ostream& out) {
  char buf[32];
  for (TokenId id = 0; id < table.size(); ++id) {
    out << table.vocab().surface(id);
    for (const double v : table.row(id)) {
      std::snprintf(buf, sizeof buf, " %.17g", v);
      out << buf;
    }
    out << '\n';
  }
}

void save_embeddings(const EmbeddingTable& table,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write embedding file " + path.string());
  write_embeddings(table, out);
}

}  // namespace digrad
