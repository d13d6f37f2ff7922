// Copyright 2026 The simulmt Authors
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

// Read/write policy head.
//
// The head sits above the decoder and scores a (decoder state s_i, encoder
// state h_j) pair with a scaled bilinear energy
//
//   e = scale * (s^T W h) / sqrt(d) + bias,    p = sigmoid(e)
//
// and writes when p >= delta. It is trained as a logistic classifier on the
// labels produced by policy_labels.hpp.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "simulmt/core.hpp"

namespace simulmt {

using StateVec = std::vector<double>;

struct PolicyParams {
  std::size_t dim = 0;
  std::vector<double> weights;  // dim x dim, row-major
  double bias = 0.0;
  double scale = 1.0;

  static PolicyParams zeros(std::size_t dim) {
    PolicyParams p;
    p.dim = dim;
    p.weights.assign(dim * dim, 0.0);
    return p;
  }

  double& w(std::size_t r, std::size_t c) { return weights[r * dim + c]; }
  double w(std::size_t r, std::size_t c) const { return weights[r * dim + c]; }

  void validate() const {
    if (dim == 0) throw DimensionError("policy dimension must be positive");
    if (weights.size() != dim * dim)
      throw DimensionError("policy weight matrix has " + std::to_string(weights.size()) +
                           " entries, expected " + std::to_string(dim * dim));
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("policy scale must be finite and > 0");
    if (!std::isfinite(bias)) throw ValidationError("policy bias must be finite");
    for (double v : weights)
      if (!std::isfinite(v)) throw ValidationError("policy weights must be finite");
  }
};

inline double monotonic_energy(std::span<const double> s, std::span<const double> h, const PolicyParams& p) {
  if (s.size() != p.dim || h.size() != p.dim)
    throw DimensionError("state dimension mismatch: s=" + std::to_string(s.size()) +
                         " h=" + std::to_string(h.size()) + " policy=" + std::to_string(p.dim));
  double acc = 0.0;
  for (std::size_t r = 0; r < p.dim; ++r) {
    if (s[r] == 0.0) continue;
    double row = 0.0;
    for (std::size_t c = 0; c < p.dim; ++c) row += p.w(r, c) * h[c];
    acc += s[r] * row;
  }
  return p.scale * acc / std::sqrt(static_cast<double>(p.dim)) + p.bias;
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Clamped into the open interval so a delta of 1.0 can never be reached.
inline double policy_probability(std::span<const double> s, std::span<const double> h, const PolicyParams& p) {
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(sigmoid(monotonic_energy(s, h, p)), lo, hi);
}

inline void check_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0))
    throw ValidationError("delta must be in (0, 1], got " + std::to_string(delta));
}

inline Action decide(double prob, double delta) {
  check_delta(delta);
  return prob >= delta ? Action::kWrite : Action::kRead;
}

// Stochastic alternative to decide(): WRITE with probability `prob`.
inline Action sample_decision(double prob, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(std::clamp(prob, 0.0, 1.0));
  return coin(rng) ? Action::kWrite : Action::kRead;
}

// ============================================================================
// Policy interface used by the decoder
// ============================================================================

struct PolicyInput {
  std::span<const double> decoder_state;  // s_i for the next target i
  std::span<const double> encoder_state;  // h_j of the newest source token
  std::size_t targets_written = 0;        // i - 1
  std::size_t source_read = 0;            // j
};

class ReadWritePolicy {
 public:
  virtual ~ReadWritePolicy() = default;
  virtual Action decide(const PolicyInput& in) const = 0;
};

class LearnedPolicy : public ReadWritePolicy {
 public:
  LearnedPolicy(PolicyParams params, double delta) : params_(std::move(params)), delta_(delta) {
    params_.validate();
    check_delta(delta_);
  }

  // Bernoulli sampling instead of thresholding; off by default.
  void enable_sampling(std::uint64_t seed) {
    sampling_ = true;
    rng_.seed(seed);
  }

  double probability(const PolicyInput& in) const {
    return policy_probability(in.decoder_state, in.encoder_state, params_);
  }

  Action decide(const PolicyInput& in) const override {
    double p = probability(in);
    return sampling_ ? sample_decision(p, rng_) : simulmt::decide(p, delta_);
  }

  const PolicyParams& params() const { return params_; }
  double delta() const { return delta_; }

 private:
  PolicyParams params_;
  double delta_;
  bool sampling_ = false;
  mutable std::mt19937_64 rng_;
};

// ============================================================================
// Supervised training
// ============================================================================

struct PolicyExample {
  StateVec decoder_state;
  StateVec encoder_state;
  Action label = Action::kRead;
};

struct TrainConfig {
  double learning_rate = 0.5;
  int epochs = 300;
  std::uint64_t seed = 0;  // reserved; full-batch descent does not shuffle
  double l2 = 0.0;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
    if (epochs < 0) throw ValidationError("epochs must be >= 0");
    if (!(l2 >= 0.0)) throw ValidationError("l2 must be >= 0");
  }
};

struct PolicyGradient {
  std::vector<double> weights;
  double bias = 0.0;
};

struct TrainResult {
  PolicyParams params;
  double final_loss = 0.0;
  std::vector<double> loss_history;  // loss before each epoch, then the final loss
  bool single_class = false;         // all labels equal: fit is degenerate
};

namespace detail {

inline void check_examples(std::span<const PolicyExample> examples, std::size_t dim) {
  if (examples.empty()) throw ValidationError("no training examples");
  for (const auto& ex : examples)
    if (ex.decoder_state.size() != dim || ex.encoder_state.size() != dim)
      throw DimensionError("training example state dimension mismatch");
}

inline double label_value(Action a) { return a == Action::kWrite ? 1.0 : 0.0; }

}  // namespace detail

// Mean binary cross-entropy plus l2 * ||W||^2.
inline double bce_loss(std::span<const PolicyExample> examples, const PolicyParams& p, double l2 = 0.0) {
  detail::check_examples(examples, p.dim);
  double total = 0.0;
  for (const auto& ex : examples) {
    double e = monotonic_energy(ex.decoder_state, ex.encoder_state, p);
    total += softplus(e) - detail::label_value(ex.label) * e;
  }
  double reg = 0.0;
  for (double v : p.weights) reg += v * v;
  return total / static_cast<double>(examples.size()) + l2 * reg;
}

inline PolicyGradient bce_gradient(std::span<const PolicyExample> examples, const PolicyParams& p,
                                   double l2 = 0.0) {
  detail::check_examples(examples, p.dim);
  const std::size_t d = p.dim;
  const double inv_n = 1.0 / static_cast<double>(examples.size());
  const double k = p.scale / std::sqrt(static_cast<double>(d));
  PolicyGradient g;
  g.weights.assign(d * d, 0.0);
  for (const auto& ex : examples) {
    double e = monotonic_energy(ex.decoder_state, ex.encoder_state, p);
    double r = (sigmoid(e) - detail::label_value(ex.label)) * inv_n;
    g.bias += r;
    for (std::size_t a = 0; a < d; ++a) {
      double sa = ex.decoder_state[a] * r * k;
      if (sa == 0.0) continue;
      for (std::size_t b = 0; b < d; ++b) g.weights[a * d + b] += sa * ex.encoder_state[b];
    }
  }
  for (std::size_t n = 0; n < d * d; ++n) g.weights[n] += 2.0 * l2 * p.weights[n];
  return g;
}

// Full-batch gradient descent from W = 0, bias = 0, scale = 1.
inline TrainResult train_policy(std::span<const PolicyExample> examples, const TrainConfig& cfg) {
  cfg.validate();
  if (examples.empty()) throw ValidationError("no training examples");
  const std::size_t d = examples.front().decoder_state.size();
  detail::check_examples(examples, d);

  TrainResult result;
  result.params = PolicyParams::zeros(d);
  bool has_read = false, has_write = false;
  for (const auto& ex : examples) (ex.label == Action::kWrite ? has_write : has_read) = true;
  result.single_class = !(has_read && has_write);

  auto& p = result.params;
  result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs) + 1);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    result.loss_history.push_back(bce_loss(examples, p, cfg.l2));
    PolicyGradient g = bce_gradient(examples, p, cfg.l2);
    for (std::size_t n = 0; n < p.weights.size(); ++n) p.weights[n] -= cfg.learning_rate * g.weights[n];
    p.bias -= cfg.learning_rate * g.bias;
  }
  result.final_loss = bce_loss(examples, p, cfg.l2);
  result.loss_history.push_back(result.final_loss);
  return result;
}

// Fraction of examples whose thresholded decision matches the label.
inline double policy_accuracy(std::span<const PolicyExample> examples, const PolicyParams& p, double delta) {
  if (examples.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& ex : examples)
    hits += decide(policy_probability(ex.decoder_state, ex.encoder_state, p), delta) == ex.label;
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

// Max relative error between the analytic gradient and central finite
// differences over every weight and the bias.
inline double gradient_check(std::span<const PolicyExample> examples, const PolicyParams& p, double l2 = 0.0,
                             double step = 1e-5) {
  const PolicyGradient analytic = bce_gradient(examples, p, l2);
  auto rel = [](double a, double n) {
    return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6});
  };
  double worst = 0.0;
  PolicyParams q = p;
  for (std::size_t n = 0; n < q.weights.size(); ++n) {
    const double orig = q.weights[n];
    q.weights[n] = orig + step;
    double up = bce_loss(examples, q, l2);
    q.weights[n] = orig - step;
    double down = bce_loss(examples, q, l2);
    q.weights[n] = orig;
    worst = std::max(worst, rel(analytic.weights[n], (up - down) / (2.0 * step)));
  }
  const double orig = q.bias;
  q.bias = orig + step;
  double up = bce_loss(examples, q, l2);
  q.bias = orig - step;
  double down = bce_loss(examples, q, l2);
  q.bias = orig;
  worst = std::max(worst, rel(analytic.bias, (up - down) / (2.0 * step)));
  return worst;
}

}  // namespace simulmt
