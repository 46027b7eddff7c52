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

#include "ashlab/activations.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "ashlab/errors.hpp"
#include "ashlab/normal.hpp"

namespace ashlab::fault {
namespace {
std::atomic<Fault> g_fault{Fault::kNone};
}

void inject(Fault f) { g_fault.store(f); }
Fault active() { return g_fault.load(); }

}  // namespace ashlab::fault

namespace ashlab::act {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Elementwise primitive with a pointwise derivative dy/dx(x).
template <typename Fwd, typename Deriv>
Var pointwise(const Var& x, std::string_view name, Fwd fwd, Deriv deriv) {
  const Tensor& xv = x.value();
  Tensor y(xv.shape());
  for (std::size_t i = 0; i < xv.numel(); ++i) y[i] = fwd(xv[i]);
  return x.tape()->record(name, {x}, std::move(y), [x, deriv](const Tensor& g, GradSink& sink) {
    const Tensor& v = x.value();
    Tensor gx(v.shape());
    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] = g[i] * deriv(v[i]);
    sink.add(x, gx);
  });
}

double scalar_of(const Var& v, const char* what) {
  if (!v.value().is_scalar()) {
    throw ShapeError(std::string(what) + " must be a scalar, got " + v.shape().str());
  }
  return v.value()[0];
}

// Which z_k entry applies to element i.
std::size_t z_stride(const Shape& xs, const Tensor& z) {
  if (z.numel() == 1) return 1;
  if (xs.rank() < 2 || xs[xs.rank() - 1] != z.numel()) {
    throw ShapeError("per-channel z_k of " + z.shape().str() + " does not match input " +
                     xs.str());
  }
  return z.numel();
}

struct Thresholds {
  GroupLayout layout;
  std::vector<InputStats> stats;
  std::size_t zc;
  std::vector<double> t;  // per element
};

Thresholds thresholds(const Tensor& x, const Tensor& z, StatsMode mode) {
  Thresholds th{GroupLayout(x.shape(), mode), compute_group_stats(x, mode), z_stride(x.shape(), z),
                {}};
  th.t.resize(x.numel());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    th.t[i] = th.stats[th.layout.group_of(i)].threshold(z[i % th.zc]);
  }
  return th;
}

// Shared kernel of the smooth and leaky forms. `leak` may be null.
Var gated_ash(const Var& x, const Var& z, const Var& alpha, const Var* leak, const AshOptions& opts,
              std::string_view name) {
  const Tensor& xv = x.value();
  const double a = scalar_of(alpha, "alpha");
  if (!(a > 0.0)) throw std::invalid_argument(std::string(name) + ": alpha must be > 0");
  const double lk = leak ? scalar_of(*leak, "leak") : 0.0;
  if (leak && !(lk >= 0.0)) throw std::invalid_argument("leaky_ash: leak must be >= 0");

  auto th = std::make_shared<Thresholds>(thresholds(xv, z.value(), opts.stats_mode));
  const std::size_t n = xv.numel();
  auto s = std::make_shared<std::vector<double>>(n);   // S(u)
  auto sm = std::make_shared<std::vector<double>>(n);  // S(-u)
  Tensor y(xv.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const double u = 2.0 * a * (xv[i] - th->t[i]);
    (*s)[i] = sigmoid(u);
    (*sm)[i] = sigmoid(-u);
    y[i] = leak ? xv[i] * (lk + (1.0 - lk) * (*s)[i]) : xv[i] * (*s)[i];
  }

  std::vector<Var> inputs{x, z, alpha};
  if (leak) inputs.push_back(*leak);
  const bool through = opts.grad_mode == GradMode::kThroughStats;
  const Var leak_var = leak ? *leak : Var{};
  const bool has_leak = leak != nullptr;

  return x.tape()->record(
      name, inputs, std::move(y),
      [x, z, alpha, leak_var, has_leak, a, lk, th, s, sm, through](const Tensor& g,
                                                                   GradSink& sink) {
        const Tensor& xv = x.value();
        const Tensor& zv = z.value();
        const std::size_t n = xv.numel();
        const double open = 1.0 - lk;
        const std::size_t groups = th->layout.groups();
        std::vector<double> dmu(groups, 0.0), dsig(groups, 0.0);
        Tensor dz(zv.shape());
        double dalpha = 0.0, dleak = 0.0;
        Tensor dx(xv.shape());
        for (std::size_t i = 0; i < n; ++i) {
          const double xi = xv[i];
          const double si = (*s)[i];
          const double ds = si * (*sm)[i];
          const double gi = g[i];
          const std::size_t grp = th->layout.group_of(i);
          const std::size_t c = i % th->zc;
          dx[i] = gi * (lk + open * si + xi * open * ds * 2.0 * a);
          const double ht = -gi * xi * open * ds * 2.0 * a;  // dL/dthreshold_i
          dz[c] += ht * th->stats[grp].sigma_for_threshold();
          dmu[grp] += ht;
          dsig[grp] += ht * zv[c];
          dalpha += gi * xi * open * ds * 2.0 * (xi - th->t[i]);
          dleak += gi * xi * (*sm)[i];
        }
        if (through) {
          for (std::size_t i = 0; i < n; ++i) {
            const std::size_t grp = th->layout.group_of(i);
            const InputStats& st = th->stats[grp];
            const double cnt = static_cast<double>(st.n);
            dx[i] += dmu[grp] / cnt;
            if (st.sigma > kSigmaFloor) {
              dx[i] += dsig[grp] * (xv[i] - st.mu) / (cnt * st.sigma);
            }
          }
        }
        sink.add(x, dx);
        sink.add(z, dz);
        if (sink.wants(alpha)) sink.add(alpha, Tensor::scalar(dalpha));
        if (has_leak && sink.wants(leak_var)) sink.add(leak_var, Tensor::scalar(dleak));
      });
}

// Hard gate shared by hard_ash (keep x >= t) and heaviside_ash (keep x > t).
Var gate_ash(const Var& x, const Var& z, StatsMode mode, bool keep_equal, std::string_view name) {
  const Tensor& xv = x.value();
  const Thresholds th = thresholds(xv, z.value(), mode);
  auto keep = std::make_shared<std::vector<bool>>(xv.numel());
  Tensor y(xv.shape());
  for (std::size_t i = 0; i < xv.numel(); ++i) {
    const bool k = keep_equal ? xv[i] >= th.t[i] : xv[i] > th.t[i];
    (*keep)[i] = k;
    y[i] = k ? xv[i] : 0.0;
  }
  return x.tape()->record(name, {x, z}, std::move(y), [x, z, keep](const Tensor& g, GradSink& sink) {
    Tensor dx(x.shape());
    for (std::size_t i = 0; i < dx.numel(); ++i) dx[i] = (*keep)[i] ? g[i] : 0.0;
    sink.add(x, dx);
    // The threshold only appears inside the condition.
    sink.add(z, zeros(z.shape()));
  });
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

Tensor sigmoid(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) y[i] = sigmoid(x[i]);
  return y;
}

Tensor heaviside(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) y[i] = x[i] > 0.0 ? 1.0 : 0.0;
  return y;
}

Tensor hard_ash(const Tensor& x, double z_k, const InputStats& stats) {
  const double t = stats.threshold(z_k);
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) y[i] = x[i] >= t ? x[i] : 0.0;
  return y;
}

Tensor smooth_ash(const Tensor& x, double z_k, double alpha, const InputStats& stats) {
  const double t = stats.threshold(z_k);
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) y[i] = x[i] * sigmoid(2.0 * alpha * (x[i] - t));
  return y;
}

Tensor smooth_ash_tanh(const Tensor& x, double z_k, double alpha, const InputStats& stats) {
  const double t = stats.threshold(z_k);
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) {
    y[i] = 0.5 * x[i] + 0.5 * x[i] * std::tanh(alpha * (x[i] - t));
  }
  return y;
}

Var relu(const Var& x) {
  return pointwise(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

Var lrelu(const Var& x, double slope) {
  return pointwise(
      x, "lrelu", [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v) { return v > 0.0 ? 1.0 : slope; });
}

Var prelu(const Var& x, const Var& slope) {
  const double a = scalar_of(slope, "prelu slope");
  const Tensor& xv = x.value();
  Tensor y(xv.shape());
  for (std::size_t i = 0; i < xv.numel(); ++i) y[i] = xv[i] > 0.0 ? xv[i] : a * xv[i];
  return x.tape()->record("prelu", {x, slope}, std::move(y),
                          [x, slope, a](const Tensor& g, GradSink& sink) {
                            const Tensor& v = x.value();
                            Tensor dx(v.shape());
                            double da = 0.0;
                            for (std::size_t i = 0; i < v.numel(); ++i) {
                              dx[i] = g[i] * (v[i] > 0.0 ? 1.0 : a);
                              if (v[i] <= 0.0) da += g[i] * v[i];
                            }
                            sink.add(x, dx);
                            if (sink.wants(slope)) sink.add(slope, Tensor::scalar(da));
                          });
}

Var softplus(const Var& x) {
  return pointwise(
      x, "softplus", [](double v) { return softplus(v); }, [](double v) { return sigmoid(v); });
}

Var elu(const Var& x, double a) {
  return pointwise(
      x, "elu", [a](double v) { return v > 0.0 ? v : a * std::expm1(v); },
      [a](double v) { return v > 0.0 ? 1.0 : a * std::exp(v); });
}

Var selu(const Var& x) {
  return pointwise(
      x, "selu",
      [](double v) { return kSeluLambda * (v > 0.0 ? v : kSeluAlpha * std::expm1(v)); },
      [](double v) { return kSeluLambda * (v > 0.0 ? 1.0 : kSeluAlpha * std::exp(v)); });
}

Var gelu(const Var& x) {
  return pointwise(
      x, "gelu", [](double v) { return v * normal::cdf(v); },
      [](double v) { return normal::cdf(v) + v * normal::pdf(v); });
}

Var swish(const Var& x) {
  const double sign = fault::active() == fault::Fault::kFlipSwishBackward ? -1.0 : 1.0;
  return pointwise(
      x, "swish", [](double v) { return v * sigmoid(v); },
      [sign](double v) {
        const double s = sigmoid(v);
        const double sm = sigmoid(-v);
        return sign * (s + v * s * sm);
      });
}

Var gen_swish(const Var& x, const Var& a, const Var& b) {
  const double av = scalar_of(a, "gen_swish a");
  const double bv = scalar_of(b, "gen_swish b");
  const Tensor& xv = x.value();
  Tensor y(xv.shape());
  for (std::size_t i = 0; i < xv.numel(); ++i) y[i] = xv[i] * sigmoid(av * xv[i] + bv);
  return x.tape()->record(
      "gen_swish", {x, a, b}, std::move(y), [x, a, b, av, bv](const Tensor& g, GradSink& sink) {
        const Tensor& v = x.value();
        Tensor dx(v.shape());
        double da = 0.0, db = 0.0;
        for (std::size_t i = 0; i < v.numel(); ++i) {
          const double u = av * v[i] + bv;
          const double s = sigmoid(u);
          const double sm = sigmoid(-u);
          dx[i] = g[i] * (s + v[i] * av * s * sm);
          da += g[i] * v[i] * v[i] * s * sm;
          db += g[i] * v[i] * s * sm;
        }
        sink.add(x, dx);
        if (sink.wants(a)) sink.add(a, Tensor::scalar(da));
        if (sink.wants(b)) sink.add(b, Tensor::scalar(db));
      });
}

Var heaviside(const Var& x) {
  return x.tape()->record("heaviside", {x}, heaviside(x.value()),
                          [x](const Tensor&, GradSink& sink) { sink.add(x, zeros(x.shape())); });
}

Var conditional_unit(const Var& x, const Var& alpha, const Var& theta) {
  const double a = scalar_of(alpha, "alpha");
  const double th = scalar_of(theta, "theta");
  const Tensor& xv = x.value();
  Tensor y(xv.shape());
  for (std::size_t i = 0; i < xv.numel(); ++i) y[i] = xv[i] >= th ? a * xv[i] : 0.0;
  return x.tape()->record("conditional_unit", {x, alpha, theta}, std::move(y),
                          [x, alpha, theta, a, th](const Tensor& g, GradSink& sink) {
                            const Tensor& v = x.value();
                            Tensor dx(v.shape());
                            double da = 0.0;
                            for (std::size_t i = 0; i < v.numel(); ++i) {
                              if (v[i] >= th) {
                                dx[i] = g[i] * a;
                                da += g[i] * v[i];
                              }
                            }
                            sink.add(x, dx);
                            if (sink.wants(alpha)) sink.add(alpha, Tensor::scalar(da));
                            sink.add(theta, zeros(theta.shape()));
                          });
}

Var hard_ash(const Var& x, const Var& z_k, StatsMode mode) {
  return gate_ash(x, z_k, mode, true, "hard_ash");
}

Var heaviside_ash(const Var& x, const Var& z_k, StatsMode mode) {
  return gate_ash(x, z_k, mode, false, "heaviside_ash");
}

Var smooth_ash(const Var& x, const Var& z_k, const Var& alpha, const AshOptions& opts) {
  return gated_ash(x, z_k, alpha, nullptr, opts, "smooth_ash");
}

Var leaky_ash(const Var& x, const Var& z_k, const Var& alpha, const Var& leak,
              const AshOptions& opts) {
  return gated_ash(x, z_k, alpha, &leak, opts, "leaky_ash");
}

std::string kind_name(const ActivationSpec& spec) {
  return std::visit(Overloaded{
                        [](const ReluSpec&) { return std::string("relu"); },
                        [](const LeakyReluSpec&) { return std::string("lrelu"); },
                        [](const PReluSpec&) { return std::string("prelu"); },
                        [](const SoftplusSpec&) { return std::string("softplus"); },
                        [](const EluSpec&) { return std::string("elu"); },
                        [](const SeluSpec&) { return std::string("selu"); },
                        [](const GeluSpec&) { return std::string("gelu"); },
                        [](const SwishSpec&) { return std::string("swish"); },
                        [](const HardAshSpec&) { return std::string("hard_ash"); },
                        [](const HeavisideAshSpec&) { return std::string("heaviside_ash"); },
                        [](const AshParams&) { return std::string("smooth_ash"); },
                        [](const GeneralizedSwishParams&) { return std::string("gen_swish"); },
                        [](const LeakyAshParams&) { return std::string("leaky_ash"); },
                        [](const FixedAshParams&) { return std::string("fixed_ash"); },
                    },
                    spec);
}

ActivationSpec resolve_activation(std::string_view name) {
  if (name == "relu") return ReluSpec{};
  if (name == "lrelu") return LeakyReluSpec{};
  if (name == "prelu") return PReluSpec{};
  if (name == "softplus") return SoftplusSpec{};
  if (name == "elu") return EluSpec{};
  if (name == "selu") return SeluSpec{};
  if (name == "gelu") return GeluSpec{};
  if (name == "swish") return SwishSpec{};
  if (name == "hard_ash") return HardAshSpec{};
  if (name == "heaviside_ash") return HeavisideAshSpec{};
  if (name == "ash" || name == "smooth_ash") return AshParams{};
  if (name == "gen_swish") return GeneralizedSwishParams{};
  if (name == "gen_swish_frozen") return GeneralizedSwishParams{1.0, 0.0, false};
  if (name == "l_ash" || name == "leaky_ash") return LeakyAshParams{};
  if (name == "fixed_ash") return FixedAshParams{};
  constexpr std::string_view kFixedPrefix = "f_ash_";
  if (name.starts_with(kFixedPrefix)) {
    const std::string_view digits = name.substr(kFixedPrefix.size());
    double k = 0.0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && k > 0.0 && k <= 100.0) {
      FixedAshParams p;
      p.k = k;
      return p;
    }
  }
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

void validate(const ActivationSpec& spec) {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  auto finite = [](double v) { return std::isfinite(v); };
  std::visit(Overloaded{
                 [&](const LeakyReluSpec& p) {
                   if (!finite(p.slope)) fail("lrelu: slope must be finite");
                 },
                 [&](const PReluSpec& p) {
                   if (!finite(p.slope_init)) fail("prelu: slope must be finite");
                 },
                 [&](const EluSpec& p) {
                   if (!finite(p.a)) fail("elu: a must be finite");
                 },
                 [&](const HardAshSpec& p) {
                   if (!finite(p.z_k_init)) fail("hard_ash: z_k must be finite");
                 },
                 [&](const HeavisideAshSpec& p) {
                   if (!finite(p.z_k_init)) fail("heaviside_ash: z_k must be finite");
                 },
                 [&](const AshParams& p) {
                   if (!finite(p.z_k_init)) fail("smooth_ash: z_k must be finite");
                   if (!(p.alpha > 0.0) || !finite(p.alpha)) fail("smooth_ash: alpha must be > 0");
                   if (p.z_channels == 0) fail("smooth_ash: z_channels must be >= 1");
                 },
                 [&](const GeneralizedSwishParams& p) {
                   if (!finite(p.a) || !finite(p.b)) fail("gen_swish: a, b must be finite");
                 },
                 [&](const LeakyAshParams& p) {
                   if (!finite(p.z_k_init)) fail("leaky_ash: z_k must be finite");
                   if (!(p.alpha > 0.0) || !finite(p.alpha)) fail("leaky_ash: alpha must be > 0");
                   if (!(p.leak_init >= 0.0) || !finite(p.leak_init)) {
                     fail("leaky_ash: leak must be >= 0");
                   }
                 },
                 [&](const FixedAshParams& p) {
                   if (!(p.k > 0.0 && p.k <= 100.0)) fail("fixed_ash: k must lie in (0, 100]");
                   if (!(p.alpha > 0.0) || !finite(p.alpha)) fail("fixed_ash: alpha must be > 0");
                 },
                 [](const auto&) {},
             },
             spec);
}

double fixed_z(double k_percent) {
  if (k_percent >= 100.0) return -1e6;
  return z_from_percentile(k_percent);
}

Activation::Activation(ActivationSpec spec, std::string name)
    : spec_(std::move(spec)), name_(std::move(name)) {
  validate(spec_);
  std::visit(Overloaded{
                 [&](const PReluSpec& p) {
                   add_param("slope", Tensor::scalar(p.slope_init), true);
                 },
                 [&](const HardAshSpec& p) {
                   z_k_ = &add_param("z_k", Tensor::scalar(p.z_k_init), true);
                 },
                 [&](const HeavisideAshSpec& p) {
                   z_k_ = &add_param("z_k", Tensor::scalar(p.z_k_init), true);
                 },
                 [&](const AshParams& p) {
                   z_k_ = &add_param("z_k", full(Shape{p.z_channels}, p.z_k_init), true);
                   if (p.alpha_trainable) add_param("alpha", Tensor::scalar(p.alpha), true);
                 },
                 [&](const GeneralizedSwishParams& p) {
                   if (p.trainable) {
                     add_param("a", Tensor::scalar(p.a), true);
                     add_param("b", Tensor::scalar(p.b), true);
                   }
                 },
                 [&](const LeakyAshParams& p) {
                   z_k_ = &add_param("z_k", Tensor::scalar(p.z_k_init), true);
                   add_param("leak", Tensor::scalar(p.leak_init), true);
                 },
                 [](const auto&) {},
             },
             spec_);
}

Parameter& Activation::add_param(std::string suffix, Tensor init, bool trainable) {
  params_.push_back(std::make_unique<Parameter>(name_ + "." + suffix, std::move(init), trainable));
  return *params_.back();
}

std::vector<Parameter*> Activation::parameters() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> Activation::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<double> Activation::zk_values() const {
  if (z_k_ != nullptr) return z_k_->value.vec();
  if (const auto* f = std::get_if<FixedAshParams>(&spec_)) return {fixed_z(f->k)};
  return {};
}

Var Activation::apply(Tape& tape, const Var& x) {
  auto param = [&](std::size_t i) { return tape.param(*params_.at(i)); };
  return std::visit(
      Overloaded{
          [&](const ReluSpec&) { return relu(x); },
          [&](const LeakyReluSpec& p) { return lrelu(x, p.slope); },
          [&](const PReluSpec&) { return prelu(x, param(0)); },
          [&](const SoftplusSpec&) { return softplus(x); },
          [&](const EluSpec& p) { return elu(x, p.a); },
          [&](const SeluSpec&) { return selu(x); },
          [&](const GeluSpec&) { return gelu(x); },
          [&](const SwishSpec&) { return swish(x); },
          [&](const HardAshSpec& p) { return hard_ash(x, param(0), p.stats_mode); },
          [&](const HeavisideAshSpec& p) { return heaviside_ash(x, param(0), p.stats_mode); },
          [&](const AshParams& p) {
            const Var alpha = p.alpha_trainable ? param(1) : tape.constant(Tensor::scalar(p.alpha));
            return smooth_ash(x, param(0), alpha, {p.stats_mode, p.grad_mode});
          },
          [&](const GeneralizedSwishParams& p) {
            if (p.trainable) return gen_swish(x, param(0), param(1));
            return gen_swish(x, tape.constant(Tensor::scalar(p.a)),
                             tape.constant(Tensor::scalar(p.b)));
          },
          [&](const LeakyAshParams& p) {
            return leaky_ash(x, param(0), tape.constant(Tensor::scalar(p.alpha)), param(1),
                             {p.stats_mode, p.grad_mode});
          },
          [&](const FixedAshParams& p) {
            return smooth_ash(x, tape.constant(Tensor::scalar(fixed_z(p.k))),
                              tape.constant(Tensor::scalar(p.alpha)),
                              {p.stats_mode, p.grad_mode});
          },
      },
      spec_);
}

}  // namespace ashlab::act
