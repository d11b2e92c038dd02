/*
 * Copyright 2026 The DBAFL Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Synthetic data and a multinomial logistic-regression classifier over a
// flat parameter vector. Layout of the parameters for F features and C
// classes: C*F row-major weights followed by C biases.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dbafl/errors.hpp"
#include "dbafl/random.hpp"

namespace dbafl {

struct ModelParams {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  bool operator==(const ModelParams&) const = default;
};

// Equality on the IEEE-754 bit patterns (distinguishes 0.0 from -0.0).
inline bool bitwise_equal(const ModelParams& a, const ModelParams& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a.values[i]) !=
        std::bit_cast<std::uint64_t>(b.values[i]))
      return false;
  }
  return true;
}

inline bool all_finite(const ModelParams& p) {
  return std::all_of(p.values.begin(), p.values.end(),
                     [](double v) { return std::isfinite(v); });
}

struct Dataset {
  std::size_t features = 0;
  std::size_t classes = 0;
  std::vector<double> x;            // size() * features, row-major
  std::vector<int> y;               // labels in [0, classes)
  std::vector<std::uint64_t> ids;   // global sample indices

  std::size_t size() const noexcept { return y.size(); }
  bool empty() const noexcept { return y.empty(); }
  std::span<const double> row(std::size_t i) const {
    return {x.data() + i * features, features};
  }
  bool operator==(const Dataset&) const = default;
};

struct TrainConfig {
  int epochs = 50;
  double learning_rate = 0.01;
  std::size_t batch_size = 1500;

  void validate() const {
    if (epochs < 1) throw ConfigError("train.epochs", "must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw ConfigError("train.learning_rate", "must be > 0");
    if (batch_size < 1) throw ConfigError("train.batch_size", "must be >= 1");
  }
  bool operator==(const TrainConfig&) const = default;
};

constexpr std::size_t param_count(std::size_t features, std::size_t classes) {
  return classes * (features + 1);
}

// Class-balanced Gaussian blobs with unit variance. Class c is centred at
// +/- separation on axis (c mod features); the sign flips for c >= features,
// so at most 2 * features classes are supported.
inline Dataset generate_synthetic_dataset(std::uint64_t seed, std::size_t n,
                                          std::size_t features,
                                          std::size_t classes,
                                          double separation,
                                          std::uint64_t first_id = 0) {
  if (features < 1) throw ConfigError("data.features", "must be >= 1");
  if (classes < 2) throw ConfigError("data.classes", "must be >= 2");
  if (classes > 2 * features)
    throw ConfigError("data.classes", "at most 2 * features classes supported");
  if (n < classes) throw ConfigError("data.samples", "need at least one sample per class");
  if (!(separation >= 0.0) || !std::isfinite(separation))
    throw ConfigError("data.separation", "must be finite and >= 0");

  Dataset d;
  d.features = features;
  d.classes = classes;
  d.x.resize(n * features);
  d.y.resize(n);
  d.ids.resize(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = i % classes;
    d.y[i] = static_cast<int>(c);
    d.ids[i] = first_id + i;
    const auto axis = c % features;
    const double sign = (c / features) % 2 == 0 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < features; ++j) {
      const double mean = j == axis ? sign * separation : 0.0;
      d.x[i * features + j] = mean + rng.normal();
    }
  }
  return d;
}

// Rows [begin, end) of `d`, ids preserved.
inline Dataset slice(const Dataset& d, std::size_t begin, std::size_t end) {
  if (begin > end || end > d.size()) throw ContractError("slice out of range");
  Dataset out;
  out.features = d.features;
  out.classes = d.classes;
  out.x.assign(d.x.begin() + static_cast<std::ptrdiff_t>(begin * d.features),
               d.x.begin() + static_cast<std::ptrdiff_t>(end * d.features));
  out.y.assign(d.y.begin() + static_cast<std::ptrdiff_t>(begin),
               d.y.begin() + static_cast<std::ptrdiff_t>(end));
  out.ids.assign(d.ids.begin() + static_cast<std::ptrdiff_t>(begin),
                 d.ids.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

namespace detail {

inline void check_shape(const ModelParams& p, const Dataset& d) {
  if (p.size() != param_count(d.features, d.classes))
    throw ContractError("parameter dimension " + std::to_string(p.size()) +
                        " does not match dataset shape (expected " +
                        std::to_string(param_count(d.features, d.classes)) + ")");
}

inline void logits(const ModelParams& p, const Dataset& d, std::size_t i,
                   std::span<double> out) {
  const auto f = d.features;
  const auto row = d.row(i);
  const double* w = p.values.data();
  const double* b = w + d.classes * f;
  for (std::size_t c = 0; c < d.classes; ++c) {
    double z = b[c];
    for (std::size_t j = 0; j < f; ++j) z += w[c * f + j] * row[j];
    out[c] = z;
  }
}

// Mean cross-entropy over `rows`; accumulates the mean gradient into `grad`
// when non-null (grad must be zeroed by the caller).
inline double loss_and_gradient(const ModelParams& p, const Dataset& d,
                                std::span<const std::size_t> rows,
                                std::vector<double>* grad) {
  const auto f = d.features;
  const auto C = d.classes;
  std::vector<double> z(C);
  double total = 0.0;
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (const auto i : rows) {
    logits(p, d, i, z);
    const double zmax = *std::max_element(z.begin(), z.end());
    const auto label = static_cast<std::size_t>(d.y[i]);
    const double z_label = z[label];
    double sum = 0.0;
    for (auto& v : z) {
      v = std::exp(v - zmax);
      sum += v;
    }
    total -= z_label - zmax - std::log(sum);
    if (grad != nullptr) {
      const auto row = d.row(i);
      double* gw = grad->data();
      double* gb = gw + C * f;
      for (std::size_t c = 0; c < C; ++c) {
        const double delta = (z[c] / sum - (c == label ? 1.0 : 0.0)) * inv_n;
        for (std::size_t j = 0; j < f; ++j) gw[c * f + j] += delta * row[j];
        gb[c] += delta;
      }
    }
  }
  return total * inv_n;
}

inline std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace detail

// Analytic gradient of local_loss over the whole dataset.
inline std::vector<double> loss_gradient(const ModelParams& params,
                                         const Dataset& data) {
  detail::check_shape(params, data);
  if (data.empty()) throw ContractError("empty dataset");
  std::vector<double> g(params.size(), 0.0);
  const auto rows = detail::all_rows(data.size());
  detail::loss_and_gradient(params, data, rows, &g);
  return g;
}

inline double local_loss(const ModelParams& params, const Dataset& data) {
  detail::check_shape(params, data);
  if (data.empty()) throw ContractError("empty dataset");
  const auto rows = detail::all_rows(data.size());
  return detail::loss_and_gradient(params, data, rows, nullptr);
}

inline double evaluate_accuracy(const ModelParams& params, const Dataset& data) {
  detail::check_shape(params, data);
  if (data.empty()) throw ContractError("empty dataset");
  std::vector<double> z(data.classes);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    detail::logits(params, data, i, z);
    const auto best = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    if (best == data.y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

// Mini-batch gradient descent; a single full-batch step per epoch when the
// batch covers the whole dataset (the shuffle seed is then irrelevant).
inline ModelParams local_train(const ModelParams& start, const Dataset& data,
                               const TrainConfig& cfg, std::uint64_t rng_seed) {
  detail::check_shape(start, data);
  if (data.empty()) throw ContractError("empty dataset");
  cfg.validate();

  ModelParams w = start;
  std::vector<double> grad(w.size());
  auto rows = detail::all_rows(data.size());
  const bool full_batch = cfg.batch_size >= data.size();
  Rng rng(rng_seed);

  auto step = [&](std::span<const std::size_t> batch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    detail::loss_and_gradient(w, data, batch, &grad);
    for (std::size_t k = 0; k < w.size(); ++k) w.values[k] -= cfg.learning_rate * grad[k];
  };

  for (int e = 0; e < cfg.epochs; ++e) {
    if (full_batch) {
      step(rows);
      continue;
    }
    rng.shuffle(std::span<std::size_t>(rows));
    for (std::size_t b = 0; b < rows.size(); b += cfg.batch_size) {
      const auto len = std::min(cfg.batch_size, rows.size() - b);
      step(std::span<const std::size_t>(rows).subspan(b, len));
    }
  }
  if (!all_finite(w)) throw ContractError("training produced non-finite parameters");
  return w;
}

// Weighted central objective sum_k (eps_k / K) * h_k.
inline double global_objective(std::span<const double> epsilons,
                               std::span<const double> losses, std::size_t K) {
  if (epsilons.size() != K || losses.size() != K)
    throw ContractError("global_objective: sequences must have length K");
  if (K == 0) throw ContractError("global_objective: K must be >= 1");
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (!(epsilons[k] > 0.0)) throw ContractError("global_objective: epsilon must be > 0");
    total += epsilons[k] / static_cast<double>(K) * losses[k];
  }
  return total;
}

// Seeded N(0, scale^2) initial parameters.
inline ModelParams initial_params(std::size_t features, std::size_t classes,
                                  double scale, std::uint64_t seed) {
  ModelParams p;
  p.values.resize(param_count(features, classes));
  Rng rng(seed);
  for (auto& v : p.values) v = scale * rng.normal();
  return p;
}

}  // namespace dbafl
