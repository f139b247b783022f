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

#include "digrad/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "digrad/parallel.hpp"

namespace digrad {

std::string_view to_string(OutputHead head) {
  return head == OutputHead::kLogit ? "logit" : "probability";
}

OutputHead parse_output_head(std::string_view name) {
  if (name == "probability") return OutputHead::kProbability;
  if (name == "logit") return OutputHead::kLogit;
  throw ConfigError("unknown output head '" + std::string(name) +
                    "' (expected probability or logit)");
}

std::string_view to_string(Activation activation) {
  return activation == Activation::kIdentity ? "identity" : "tanh";
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

Vector softmax(std::span<const double> logits) {
  Vector p(logits.begin(), logits.end());
  const double top = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (auto& v : p) {
    v = std::exp(v - top);
    sum += v;
  }
  for (auto& v : p) v /= sum;
  return p;
}

Vector GradientOracle::forward(const Matrix& points) const {
  return softmax(logits(points));
}

double GradientOracle::output(const Matrix& points, std::size_t target,
                              OutputHead head) const {
  check_request(points, target);
  const Vector z = logits(points);
  return head == OutputHead::kLogit ? z[target] : softmax(z)[target];
}

std::size_t GradientOracle::predict(const Matrix& points) const {
  const Vector p = forward(points);
  return static_cast<std::size_t>(
      std::max_element(p.begin(), p.end()) - p.begin());
}

std::vector<GradientResponse> GradientOracle::gradient_batch(
    std::span<const GradientRequest> requests, unsigned jobs) const {
  std::vector<GradientResponse> out(requests.size());
  std::vector<std::exception_ptr> failures(requests.size());
  parallel_for(requests.size(), jobs, [&](std::size_t i) {
    try {
      out[i] = gradient(requests[i]);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  });
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const std::exception& e) {
      throw BatchError(i, e.what(), failures[i]);
    }
  }
  return out;
}

void GradientOracle::check_request(const Matrix& points,
                                   std::size_t target) const {
  if (points.rows() == 0) throw ShapeError("request has no word vectors");
  if (points.cols() != dim()) {
    throw ShapeError("word vectors have dimension " +
                     std::to_string(points.cols()) + ", model expects " +
                     std::to_string(dim()));
  }
  if (target >= num_classes()) {
    throw ShapeError("target class " + std::to_string(target) +
                     " out of range for " + std::to_string(num_classes()) +
                     " classes");
  }
  for (const double v : points.data()) {
    if (!std::isfinite(v)) throw ShapeError("request has non-finite entries");
  }
}

Classifier::Classifier(EmbeddingTable table, ClassifierShape shape, Matrix w1,
                       Vector b1, Matrix w2, Vector b2)
    : table_(std::move(table)),
      shape_(shape),
      w1_(std::move(w1)),
      b1_(std::move(b1)),
      w2_(std::move(w2)),
      b2_(std::move(b2)) {
  const std::size_t d = table_.dim();
  const std::size_t h = shape_.hidden;
  const std::size_t c = shape_.num_classes;
  if (c < 2) throw ShapeError("classifier needs at least 2 classes");
  const std::size_t w2_cols = h == 0 ? d : h;
  if (h > 0 && (w1_.rows() != h || w1_.cols() != d || b1_.size() != h)) {
    throw ShapeError("hidden layer must be H x D with H biases");
  }
  if (h == 0 && (!w1_.empty() || !b1_.empty())) {
    throw ShapeError("no hidden layer configured but W1/b1 given");
  }
  if (w2_.rows() != c || w2_.cols() != w2_cols || b2_.size() != c) {
    throw ShapeError("output layer must be C x " + std::to_string(w2_cols));
  }
  auto finite = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(),
                       [](double x) { return std::isfinite(x); });
  };
  if (!finite(w1_.data()) || !finite(b1_) || !finite(w2_.data()) ||
      !finite(b2_)) {
    throw Error("classifier parameters must be finite");
  }
}

Classifier Classifier::random(EmbeddingTable table, ClassifierShape shape,
                              std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  const std::size_t d = table.dim();
  Matrix w1;
  Vector b1;
  if (shape.hidden > 0) {
    w1 = Matrix(shape.hidden, d);
    for (auto& v : w1.data()) v = u(rng);
    b1.assign(shape.hidden, 0.0);
  }
  Matrix w2(shape.num_classes, shape.hidden == 0 ? d : shape.hidden);
  for (auto& v : w2.data()) v = u(rng);
  Vector b2(shape.num_classes, 0.0);
  return Classifier(std::move(table), shape, std::move(w1), std::move(b1),
                    std::move(w2), std::move(b2));
}

namespace {

// out = m * x + b
Vector affine(const Matrix& m, std::span<const double> x,
              std::span<const double> b) {
  Vector out(b.begin(), b.end());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    double s = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) s += row[c] * x[c];
    out[r] += s;
  }
  return out;
}

// out = m^T * y
Vector transpose_times(const Matrix& m, std::span<const double> y) {
  Vector out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c] * y[r];
  }
  return out;
}

}  // namespace

Classifier::Activations Classifier::run(const Matrix& points) const {
  Activations acts;
  acts.pooled.assign(points.cols(), 0.0);
  for (std::size_t r = 0; r < points.rows(); ++r) {
    const auto row = points.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) acts.pooled[c] += row[c];
  }
  const double inv_n = 1.0 / static_cast<double>(points.rows());
  for (auto& v : acts.pooled) v *= inv_n;

  if (shape_.hidden > 0) {
    acts.hidden = affine(w1_, acts.pooled, b1_);
    if (shape_.activation == Activation::kTanh) {
      for (auto& v : acts.hidden) v = std::tanh(v);
    }
    acts.logits = affine(w2_, acts.hidden, b2_);
  } else {
    acts.logits = affine(w2_, acts.pooled, b2_);
  }
  return acts;
}

Vector Classifier::backprop_to_pool(const Activations& acts,
                                    std::span<const double> dlogits) const {
  if (shape_.hidden == 0) return transpose_times(w2_, dlogits);
  Vector dhidden = transpose_times(w2_, dlogits);
  if (shape_.activation == Activation::kTanh) {
    for (std::size_t i = 0; i < dhidden.size(); ++i) {
      dhidden[i] *= 1.0 - acts.hidden[i] * acts.hidden[i];
    }
  }
  return transpose_times(w1_, dhidden);
}

Vector Classifier::logits(const Matrix& points) const {
  check_request(points, 0);
  return run(points).logits;
}

GradientResponse Classifier::gradient(const GradientRequest& request) const {
  check_request(request.points, request.target);
  const Activations acts = run(request.points);
  const std::size_t t = request.target;

  GradientResponse response;
  Vector dlogits(shape_.num_classes, 0.0);
  if (request.head == OutputHead::kLogit) {
    response.value = acts.logits[t];
    dlogits[t] = 1.0;
  } else {
    const Vector p = softmax(acts.logits);
    response.value = p[t];
    for (std::size_t c = 0; c < p.size(); ++c) {
      dlogits[c] = p[t] * ((c == t ? 1.0 : 0.0) - p[c]);
    }
  }

  Vector dpool = backprop_to_pool(acts, dlogits);
  const double inv_n = 1.0 / static_cast<double>(request.points.rows());
  for (auto& v : dpool) v *= inv_n;

  // Mean pooling hands every position the same gradient.
  response.grads = Matrix(request.points.rows(), request.points.cols());
  for (std::size_t r = 0; r < request.points.rows(); ++r) {
    std::copy(dpool.begin(), dpool.end(), response.grads.row(r).begin());
  }
  return response;
}

Vector Classifier::predict_proba(std::span<const TokenId> ids) const {
  if (ids.empty()) {
    const TokenId pad = kPadId;
    return forward(table_.embed(std::span<const TokenId>(&pad, 1)));
  }
  return forward(table_.embed(ids));
}

bool Classifier::operator==(const Classifier& other) const {
  return table_.vocab().surfaces() == other.table_.vocab().surfaces() &&
         table_.vectors() == other.table_.vectors() &&
         shape_.num_classes == other.shape_.num_classes &&
         shape_.hidden == other.shape_.hidden &&
         shape_.activation == other.shape_.activation && w1_ == other.w1_ &&
         b1_ == other.b1_ && w2_ == other.w2_ && b2_ == other.b2_;
}

}  // namespace digrad
