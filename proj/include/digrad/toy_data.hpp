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

// A small seeded sentiment corpus and matching clustered word vectors, so
// every command can run without downloads.

#ifndef DIGRAD_TOY_DATA_HPP_
#define DIGRAD_TOY_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "digrad/dataset.hpp"
#include "digrad/vocab_embed.hpp"

namespace digrad {

struct ToyLexicon {
  std::vector<std::string> positive;
  std::vector<std::string> negative;
  std::vector<std::string> neutral;
};

const ToyLexicon& toy_lexicon();

// Label 1 is positive, 0 negative. Each sentence has 4 to 10 words, one to
// three of them from the label's lexicon and at most one from the other.
std::vector<LabeledExample> generate_toy_corpus(std::size_t count,
                                                std::uint64_t seed);

// Vectors for every lexicon word: positive and negative words form two tight
// clusters, neutral words a handful of topic clusters, all away from the
// origin. Rows follow pad, unk, positive, negative, neutral.
EmbeddingTable generate_toy_embeddings(std::size_t dim, std::uint64_t seed);

}  // namespace digrad

#endif  // DIGRAD_TOY_DATA_HPP_
