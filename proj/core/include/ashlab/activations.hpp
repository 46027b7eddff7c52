// Copyright 2026 The ashlab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Activation zoo: the rectifier baselines plus every form of the adaptive
// percentile-threshold activation (hard, Heaviside, sigmoid-smoothed,
// generalized Swish, leaky and fixed-percentile variants).
//
// All ASH forms threshold against mu + z_k * sigma computed from the input
// itself; which elements share a mean/std is selected by StatsMode.

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ashlab/autodiff.hpp"
#include "ashlab/stats.hpp"
#include "ashlab/tensor.hpp"

namespace ashlab::act {

// Through-stats differentiates mu and sigma as functions of the input;
// stop-stats treats them as constants.
enum class GradMode { kThroughStats, kStopStats };

struct AshOptions {
  StatsMode stats_mode = StatsMode::kPerSample;
  GradMode grad_mode = GradMode::kThroughStats;
};

inline constexpr double kSeluLambda = 1.0507009873554804934193349852946;
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

// Scalar kernels.
double sigmoid(double x);
double softplus(double x);

// ---- Tensor-level forms (no autodiff) ----

Tensor sigmoid(const Tensor& x);
// 1 for x > 0, 0 otherwise (including x == 0).
Tensor heaviside(const Tensor& x);
// Keeps x where x >= stats.threshold(z_k), zero elsewhere.
Tensor hard_ash(const Tensor& x, double z_k, const InputStats& stats);
// x * S(2 alpha (x - stats.threshold(z_k))).
Tensor smooth_ash(const Tensor& x, double z_k, double alpha, const InputStats& stats);
// The hyperbolic-tangent form 0.5 x + 0.5 x tanh(alpha (x - threshold)).
Tensor smooth_ash_tanh(const Tensor& x, double z_k, double alpha, const InputStats& stats);

// ---- Differentiable forms ----

Var relu(const Var& x);
Var lrelu(const Var& x, double slope = 0.01);
Var prelu(const Var& x, const Var& slope);
Var softplus(const Var& x);
Var elu(const Var& x, double a = 1.0);
Var selu(const Var& x);
// x * Phi(x) with the exact normal CDF.
Var gelu(const Var& x);
Var swish(const Var& x);
// x * S(a x + b), a and b scalar.
Var gen_swish(const Var& x, const Var& a, const Var& b);

// Zero gradient everywhere.
Var heaviside(const Var& x);

// alpha x if x >= theta, else 0. The derivative w.r.t. theta is zero.
Var conditional_unit(const Var& x, const Var& alpha, const Var& theta);

// Gradient reaches x through the kept mask only; z_k receives zero.
Var hard_ash(const Var& x, const Var& z_k, StatsMode mode = StatsMode::kPerSample);
// x * H(x - threshold); drops the element sitting exactly on the threshold.
Var heaviside_ash(const Var& x, const Var& z_k, StatsMode mode = StatsMode::kPerSample);

// x * S(2 alpha (x - mu - z_k sigma)). z_k is a scalar or one value per
// trailing-axis channel; alpha is a scalar.
Var smooth_ash(const Var& x, const Var& z_k, const Var& alpha, const AshOptions& opts = {});
// x * (leak + (1 - leak) S(2 alpha (x - mu - z_k sigma))).
Var leaky_ash(const Var& x, const Var& z_k, const Var& alpha, const Var& leak,
              const AshOptions& opts = {});

// ---- Specifications ----

struct ReluSpec {};
struct LeakyReluSpec {
  double slope = 0.01;
};
struct PReluSpec {
  double slope_init = 0.25;
};
struct SoftplusSpec {};
struct EluSpec {
  double a = 1.0;
};
struct SeluSpec {};
struct GeluSpec {};
struct SwishSpec {};
struct HardAshSpec {
  double z_k_init = 0.0;
  StatsMode stats_mode = StatsMode::kPerSample;
};
struct HeavisideAshSpec {
  double z_k_init = 0.0;
  StatsMode stats_mode = StatsMode::kPerSample;
};
struct AshParams {
  double z_k_init = 0.0;
  double alpha = 1.0;
  bool alpha_trainable = false;
  // 1 for a single per-layer z_k, otherwise one z_k per trailing channel.
  std::size_t z_channels = 1;
  StatsMode stats_mode = StatsMode::kPerSample;
  GradMode grad_mode = GradMode::kThroughStats;
};
struct GeneralizedSwishParams {
  double a = 1.0;
  double b = 0.0;
  bool trainable = true;
};
struct LeakyAshParams {
  double z_k_init = 0.0;
  double alpha = 1.0;
  double leak_init = 0.01;
  StatsMode stats_mode = StatsMode::kPerSample;
  GradMode grad_mode = GradMode::kThroughStats;
};
struct FixedAshParams {
  double k = 50.0;  // percent in (0, 100]
  double alpha = 1.0;
  StatsMode stats_mode = StatsMode::kPerSample;
  GradMode grad_mode = GradMode::kThroughStats;
};

using ActivationSpec =
    std::variant<ReluSpec, LeakyReluSpec, PReluSpec, SoftplusSpec, EluSpec, SeluSpec, GeluSpec,
                 SwishSpec, HardAshSpec, HeavisideAshSpec, AshParams, GeneralizedSwishParams,
                 LeakyAshParams, FixedAshParams>;

// Config tag of the active alternative, e.g. "smooth_ash".
std::string kind_name(const ActivationSpec& spec);

// Short names used on the command line: any kind_name, plus "ash",
// "l_ash", "f_ash_<k>" and "gen_swish_frozen". Throws std::invalid_argument
// for an unknown name.
ActivationSpec resolve_activation(std::string_view name);

// Throws std::invalid_argument if any parameter constraint is violated.
void validate(const ActivationSpec& spec);

// z_k used by a fixed-percentile layer; k = 100 maps to a very negative z.
double fixed_z(double k_percent);

// An activation layer: a spec plus the trainable parameters it owns.
class Activation {
 public:
  Activation(ActivationSpec spec, std::string name);

  Activation(const Activation&) = delete;
  Activation& operator=(const Activation&) = delete;
  Activation(Activation&&) = default;
  Activation& operator=(Activation&&) = default;

  Var apply(Tape& tape, const Var& x);

  const ActivationSpec& spec() const { return spec_; }
  const std::string& name() const { return name_; }
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  // Current z_k values, empty for layers without one.
  std::vector<double> zk_values() const;

 private:
  Parameter& add_param(std::string suffix, Tensor init, bool trainable);

  ActivationSpec spec_;
  std::string name_;
  // unique_ptr keeps Parameter addresses stable when the layer moves.
  std::vector<std::unique_ptr<Parameter>> params_;
  Parameter* z_k_ = nullptr;
};

}  // namespace ashlab::act

namespace ashlab::fault {

// Deliberate defects used to prove the verification suites can fail.
enum class Fault { kNone, kFlipSwishBackward };

void inject(Fault f);
Fault active();

}  // namespace ashlab::fault
