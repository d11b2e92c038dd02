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

#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "dbafl/errors.hpp"
#include "dbafl/model.hpp"

namespace dbafl {

inline constexpr double kAccuracyFloor = 0.01;
inline constexpr double kMinScalingFactor = 0.01;
inline constexpr double kMaxScalingFactor = 100.0;

// Weight of an arriving local model relative to the current global model.
struct ScalingFactor {
  double value = 1.0;
};

enum class DefenseMode { kOff, kThresholdFraction };

struct DefensePolicy {
  DefenseMode mode = DefenseMode::kOff;
  double theta = 0.0;

  static DefensePolicy off() { return {}; }
  static DefensePolicy threshold(double theta) {
    if (!(theta >= 0.0 && theta <= 1.0))
      throw ConfigError("attack.defense.theta", "must lie in [0, 1]");
    return {DefenseMode::kThresholdFraction, theta};
  }
  bool operator==(const DefensePolicy&) const = default;
};

enum class DefenseVerdict { kAccept, kDiscard };

// Accuracy ratio of the arriving local model to the previous global model.
// Both accuracies are floored at 1% so the ratio is always defined, and the
// result is clamped to [0.01, 100].
inline ScalingFactor scaling_factor(double acc_local, double acc_global_prev) {
  const double num = std::max(acc_local, kAccuracyFloor);
  const double den = std::max(acc_global_prev, kAccuracyFloor);
  return {std::clamp(num / den, kMinScalingFactor, kMaxScalingFactor)};
}

// (w_prev + eps * w_local) / (1 + eps), componentwise.
inline ModelParams aggregate_async(const ModelParams& w_global_prev,
                                   const ModelParams& w_local, ScalingFactor eps) {
  if (w_global_prev.size() != w_local.size())
    throw ContractError("aggregate_async: dimension mismatch");
  if (!(eps.value > 0.0) || !std::isfinite(eps.value))
    throw ContractError("aggregate_async: scaling factor must be positive");
  ModelParams out;
  out.values.resize(w_local.size());
  const double denom = 1.0 + eps.value;
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = (w_global_prev.values[i] + eps.value * w_local.values[i]) / denom;
  return out;
}

inline ModelParams aggregate_static(const ModelParams& w_global_prev,
                                    const ModelParams& w_local, double eps_static) {
  return aggregate_async(w_global_prev, w_local, ScalingFactor{eps_static});
}

// A local model strictly below theta * global accuracy is discarded.
inline DefenseVerdict defense_filter(double acc_local, double acc_global_prev,
                                     const DefensePolicy& policy) {
  if (policy.mode == DefenseMode::kOff) return DefenseVerdict::kAccept;
  return acc_local >= policy.theta * acc_global_prev ? DefenseVerdict::kAccept
                                                     : DefenseVerdict::kDiscard;
}

// Sample-size weighted mean of the models, accumulated as a running mean so
// that identical inputs reproduce the input bit for bit.
inline ModelParams aggregate_fedavg(std::span<const ModelParams> models,
                                    std::span<const std::size_t> sizes) {
  if (models.empty()) throw ContractError("aggregate_fedavg: no models");
  if (models.size() != sizes.size())
    throw ContractError("aggregate_fedavg: models and sizes differ in length");
  const auto d = models.front().size();
  for (std::size_t k = 0; k < models.size(); ++k) {
    if (models[k].size() != d) throw ContractError("aggregate_fedavg: dimension mismatch");
    if (sizes[k] == 0) throw ContractError("aggregate_fedavg: sizes must be positive");
  }
  ModelParams out = models.front();
  double seen = static_cast<double>(sizes.front());
  for (std::size_t k = 1; k < models.size(); ++k) {
    seen += static_cast<double>(sizes[k]);
    const double w = static_cast<double>(sizes[k]) / seen;
    for (std::size_t i = 0; i < d; ++i)
      out.values[i] += w * (models[k].values[i] - out.values[i]);
  }
  return out;
}

}  // namespace dbafl
