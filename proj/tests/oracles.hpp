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

// Independent reference implementations used only by the tests.

#ifndef DIGRAD_TESTS_ORACLES_HPP_
#define DIGRAD_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "digrad/errors.hpp"
#include "digrad/matrix.hpp"
#include "digrad/model.hpp"
#include "digrad/vocab_embed.hpp"

namespace oracle {

using digrad::Matrix;
using digrad::Vector;

// Table with `words` random rows in [-1, 1]^dim after <pad> and <unk>.
inline digrad::EmbeddingTable random_table(std::uint64_t seed,
                                           std::size_t words,
                                           std::size_t dim) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::string> surfaces = {"<pad>", "<unk>"};
  Matrix m(2 + words, dim);
  for (std::size_t r = 1; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < dim; ++c) m(r, c) = u(rng);
  }
  for (std::size_t w = 0; w < words; ++w) {
    surfaces.push_back("w" + std::to_string(w));
  }
  return digrad::EmbeddingTable(digrad::Vocabulary(surfaces), std::move(m));
}

inline std::vector<digrad::TokenId> random_sentence(std::mt19937_64& rng,
                                                    std::size_t vocab,
                                                    std::size_t min_len,
                                                    std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<digrad::TokenId> id(
      2, static_cast<digrad::TokenId>(vocab - 1));
  std::vector<digrad::TokenId> s(len(rng));
  for (auto& t : s) t = id(rng);
  return s;
}

// All pairwise distances, fully sorted.
inline std::vector<std::vector<digrad::TokenId>> brute_force_knn(
    const digrad::EmbeddingTable& table, std::size_t k, digrad::Metric metric) {
  std::vector<std::vector<digrad::TokenId>> out(table.size());
  for (digrad::TokenId a = 1; a < table.size(); ++a) {
    std::vector<std::pair<double, digrad::TokenId>> all;
    for (digrad::TokenId b = 1; b < table.size(); ++b) {
      if (a == b) continue;
      double d = 0.0;
      const auto x = table.row(a);
      const auto y = table.row(b);
      if (metric == digrad::Metric::kEuclidean) {
        for (std::size_t i = 0; i < x.size(); ++i) {
          d += (x[i] - y[i]) * (x[i] - y[i]);
        }
        d = std::sqrt(d);
      } else {
        double xy = 0.0, xx = 0.0, yy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          xy += x[i] * y[i];
          xx += x[i] * x[i];
          yy += y[i] * y[i];
        }
        d = (xx == 0.0 || yy == 0.0) ? 1.0 : 1.0 - xy / std::sqrt(xx * yy);
      }
      all.emplace_back(d, b);
    }
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < std::min(k, all.size()); ++i) {
      out[a].push_back(all[i].second);
    }
  }
  return out;
}

// Central differences of the selected output, step h.
inline Matrix finite_difference(const digrad::GradientOracle& model,
                                const Matrix& points, std::size_t target,
                                digrad::OutputHead head, double h) {
  Matrix g(points.rows(), points.cols());
  for (std::size_t r = 0; r < points.rows(); ++r) {
    for (std::size_t c = 0; c < points.cols(); ++c) {
      Matrix plus = points;
      Matrix minus = points;
      plus(r, c) += h;
      minus(r, c) -= h;
      g(r, c) = (model.output(plus, target, head) -
                 model.output(minus, target, head)) /
                (2.0 * h);
    }
  }
  return g;
}

// Two classes with logits [sum of squares of all entries, 0].
class Quadratic final : public digrad::GradientOracle {
 public:
  explicit Quadratic(std::size_t dim) : dim_(dim) {}
  std::size_t dim() const override { return dim_; }
  std::size_t num_classes() const override { return 2; }
  Vector logits(const Matrix& points) const override {
    double s = 0.0;
    for (const double v : points.data()) s += v * v;
    return {s, 0.0};
  }
  digrad::GradientResponse gradient(
      const digrad::GradientRequest& req) const override {
    check_request(req.points, req.target);
    if (req.head != digrad::OutputHead::kLogit || req.target != 0) {
      throw digrad::Error("quadratic oracle supports logit 0 only");
    }
    digrad::GradientResponse r;
    r.value = logits(req.points)[0];
    r.grads = Matrix(req.points.rows(), req.points.cols());
    for (std::size_t i = 0; i < r.grads.data().size(); ++i) {
      r.grads.data()[i] = 2.0 * req.points.data()[i];
    }
    return r;
  }

 private:
  std::size_t dim_;
};

// Wraps a model and zeroes the listed dimensions of every word before
// evaluating it, so the result cannot depend on them.
class Masked final : public digrad::GradientOracle {
 public:
  Masked(const digrad::GradientOracle& inner, std::vector<std::size_t> dims)
      : inner_(inner), dims_(std::move(dims)) {}
  std::size_t dim() const override { return inner_.dim(); }
  std::size_t num_classes() const override { return inner_.num_classes(); }
  Vector logits(const Matrix& points) const override {
    return inner_.logits(mask(points));
  }
  digrad::GradientResponse gradient(
      const digrad::GradientRequest& req) const override {
    auto r = inner_.gradient({mask(req.points), req.target, req.head});
    for (std::size_t row = 0; row < r.grads.rows(); ++row) {
      for (const std::size_t d : dims_) r.grads(row, d) = 0.0;
    }
    return r;
  }

 private:
  Matrix mask(Matrix m) const {
    for (std::size_t row = 0; row < m.rows(); ++row) {
      for (const std::size_t d : dims_) m(row, d) = 0.0;
    }
    return m;
  }
  const digrad::GradientOracle& inner_;
  std::vector<std::size_t> dims_;
};

// Straight-line integrated gradients written out term by term.
inline Matrix naive_ig(const digrad::GradientOracle& model, const Matrix& x,
                       const Matrix& base, std::size_t target,
                       digrad::OutputHead head, std::size_t m) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t k = 1; k <= m; ++k) {
    Matrix p(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) {
        p(r, c) = base(r, c) + (static_cast<double>(k) /
                                static_cast<double>(m)) *
                                   (x(r, c) - base(r, c));
      }
    }
    const auto g = model.gradient({p, target, head}).grads;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) {
        out(r, c) += (x(r, c) - base(r, c)) * g(r, c) /
                     static_cast<double>(m);
      }
    }
  }
  return out;
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

}  // namespace oracle

#endif  // DIGRAD_TESTS_ORACLES_HPP_
