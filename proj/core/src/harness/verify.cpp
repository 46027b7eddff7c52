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

#include "ashlab/harness/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "ashlab/activations.hpp"
#include "ashlab/harness/datasets.hpp"
#include "ashlab/nn.hpp"
#include "ashlab/stats.hpp"

namespace ashlab::harness {
namespace {

constexpr std::size_t kMaxEchoed = 5;
constexpr double kFdH = 1e-6;
constexpr double kFdTol = 1e-4;

class Suite {
 public:
  explicit Suite(std::string name) : start_(std::chrono::steady_clock::now()) { r_.name = std::move(name); }

  void check(bool ok, const std::function<std::string()>& describe) {
    ++r_.cases;
    if (ok) return;
    ++r_.failed;
    if (r_.failures.size() < kMaxEchoed) r_.failures.push_back(describe());
  }

  SuiteResult finish() {
    r_.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    return r_;
  }

 private:
  SuiteResult r_;
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Var weighted_sum(Tape& tape, const Var& y, const Tensor& w) {
  return ad::sum(ad::mul(y, tape.constant(w)));
}

// Gaussian draws kept at least `margin` away from every point in `kinks`.
Tensor draws_avoiding(const Shape& shape, RngState& rng, double scale,
                      const std::function<bool(double)>& too_close) {
  Tensor x(shape);
  for (std::size_t i = 0; i < x.numel(); ++i) {
    double v;
    do {
      v = scale * rng.next_normal();
    } while (too_close(v));
    x[i] = v;
  }
  return x;
}

SuiteResult stats_fidelity() {
  Suite s("stats_fidelity");
  const std::pair<double, double> anchors[] = {{2.5, 1.959963984540054}, {50.0, 0.0}, {10.0, 1.2815515655446004}};
  for (const auto& [k, z] : anchors) {
    const double got = z_from_percentile(k);
    s.check(std::abs(got - z) < 1e-9, [&] { return fmt("z_from_percentile(k=%g) = %.12f, want %.12f", k, got, z); });
  }
  RngState rng{2024, 0};
  const Tensor x = randn(Shape{100000}, rng);
  const InputStats st = compute_stats(x);
  for (double k : {10.0, 30.0, 50.0, 80.0}) {
    const Tensor y = act::hard_ash(x, z_from_percentile(k), st);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < x.numel(); ++i) kept += x[i] >= st.threshold(z_from_percentile(k));
    const double frac = static_cast<double>(kept) / static_cast<double>(x.numel());
    s.check(std::abs(frac - k / 100.0) <= 0.01,
            [&] { return fmt("hard_ash kept fraction %.4f for k=%g on 1e5 N(0,1) draws (seed 2024)", frac, k); });
    (void)y;
  }
  // Welford against a two-pass variance.
  RngState r2{7, 0};
  const Tensor shifted = randn(Shape{5000}, r2, 1e6, 0.5);
  double mean = 0.0;
  for (double v : shifted.data()) mean += v;
  mean /= static_cast<double>(shifted.numel());
  double ss = 0.0;
  for (double v : shifted.data()) ss += (v - mean) * (v - mean);
  const double two_pass = std::sqrt(ss / static_cast<double>(shifted.numel()));
  const InputStats w = compute_stats(shifted);
  s.check(std::abs(w.sigma - two_pass) < 1e-9 * two_pass,
          [&] { return fmt("sigma %.15g vs two-pass %.15g (mean 1e6, std 0.5)", w.sigma, two_pass); });
  return s.finish();
}

SuiteResult oracle_agreement() {
  Suite s("oracle_agreement");
  RngState rng{99, 0};
  const Tensor x = randn(Shape{10000}, rng);
  for (double k : {10.0, 30.0, 50.0, 80.0}) {
    const SelectionMask exact = exact_topk_mask(x, k);
    const SelectionMask sorted = sorted_topk_mask(x, k);
    s.check(exact.keep == sorted.keep, [&] { return fmt("quickselect and sort masks differ at k=%g", k); });
    const double j = jaccard(threshold_mask(x, z_from_percentile(k)), exact);
    s.check(j >= 0.90, [&] { return fmt("Jaccard %.4f < 0.90 at k=%g on 1e4 N(0,1) draws (seed 99)", j, k); });
  }
  return s.finish();
}

struct GradCase {
  std::string name;
  act::GradMode mode = act::GradMode::kThroughStats;
};

SuiteResult gradients() {
  Suite s("gradients");
  auto report = [&](const std::string& what, const FdReport& r, const Tensor& x) {
    s.check(r.max_rel_err < kFdTol, [&] {
      std::ostringstream os;
      os << what << ": rel err " << r.max_rel_err << " at index " << r.worst_index << " (x=" << x[r.worst_index]
         << ", analytic " << r.analytic << ", numeric " << r.numeric << ")";
      return os.str();
    });
  };
  auto away_from_zero = [](double v) { return std::abs(v) < 10 * kFdH; };
  auto no_kink = [](double) { return false; };

  // Pointwise activations, one scalar point per check.
  using Fn = std::function<Var(Tape&, const Var&)>;
  const std::vector<std::tuple<std::string, Fn, bool>> pointwise = {
      {"relu", [](Tape&, const Var& x) { return act::relu(x); }, true},
      {"lrelu", [](Tape&, const Var& x) { return act::lrelu(x, 0.01); }, true},
      {"prelu", [](Tape& t, const Var& x) { return act::prelu(x, t.constant(Tensor::scalar(0.25))); }, true},
      {"softplus", [](Tape&, const Var& x) { return act::softplus(x); }, false},
      {"elu", [](Tape&, const Var& x) { return act::elu(x, 1.0); }, true},
      {"selu", [](Tape&, const Var& x) { return act::selu(x); }, true},
      {"gelu", [](Tape&, const Var& x) { return act::gelu(x); }, false},
      {"swish", [](Tape&, const Var& x) { return act::swish(x); }, false},
      {"gen_swish",
       [](Tape& t, const Var& x) {
         return act::gen_swish(x, t.constant(Tensor::scalar(1.3)), t.constant(Tensor::scalar(-0.2)));
       },
       false},
  };
  for (const auto& [name, fn, kinked] : pointwise) {
    RngState rng{std::hash<std::string>{}(name) & 0xFFFF, 0};
    for (int p = 0; p < 100; ++p) {
      const Tensor x = draws_avoiding(Shape{1}, rng, 2.0, kinked ? std::function<bool(double)>(away_from_zero) : no_kink);
      const auto f = [&](Tape& t, const Var& v) { return ad::sum(fn(t, v)); };
      report(name + " d/dx", fd_check(f, x), x);
    }
  }

  // Parameter gradients of the pointwise forms.
  {
    RngState rng{5, 0};
    const Tensor x = draws_avoiding(Shape{20}, rng, 2.0, away_from_zero);
    const Tensor w = randn(Shape{20}, rng);
    report("prelu d/dslope", fd_check([&](Tape& t, const Var& a) {
             return weighted_sum(t, act::prelu(t.constant(x), a), w);
           }, Tensor::scalar(0.25)), Tensor::scalar(0.25));
    const Tensor ab = Tensor::of({1.3, -0.2});
    auto gs = [&](std::size_t which) {
      return [&, which](Tape& t, const Var& p) {
        const Var a = which == 0 ? p : t.constant(Tensor::scalar(ab[0]));
        const Var b = which == 1 ? p : t.constant(Tensor::scalar(ab[1]));
        return weighted_sum(t, act::gen_swish(t.constant(x), a, b), w);
      };
    };
    report("gen_swish d/da", fd_check(gs(0), Tensor::scalar(ab[0])), Tensor::scalar(ab[0]));
    report("gen_swish d/db", fd_check(gs(1), Tensor::scalar(ab[1])), Tensor::scalar(ab[1]));
  }

  // Statistics-coupled forms: 5 trials of 20 coupled points.
  const double z0 = 0.3, alpha0 = 1.5, leak0 = 0.05;
  for (int trial = 0; trial < 5; ++trial) {
    RngState rng{1000u + static_cast<std::uint64_t>(trial), 0};
    const Tensor w = randn(Shape{20}, rng);
    const Tensor xs = randn(Shape{20}, rng, 0.2, 1.3);

    // Hard forms: keep every point clear of the threshold.
    Tensor xh = xs;
    for (int guard = 0; guard < 100; ++guard) {
      const double t = compute_stats(xh).threshold(z0);
      bool clear = true;
      for (auto& v : xh.data()) {
        if (std::abs(v - t) < 1e-3) {
          v += 0.01;
          clear = false;
        }
      }
      if (clear) break;
    }
    for (const bool heavi : {false, true}) {
      const auto f = [&](Tape& t, const Var& x) {
        const Var z = t.constant(Tensor::scalar(z0));
        return weighted_sum(t, heavi ? act::heaviside_ash(x, z) : act::hard_ash(x, z), w);
      };
      report(std::string(heavi ? "heaviside_ash" : "hard_ash") + " d/dx", fd_check(f, xh), xh);
    }

    for (const auto mode : {act::GradMode::kThroughStats, act::GradMode::kStopStats}) {
      const act::AshOptions opts{StatsMode::kPerSample, mode};
      const std::string tag = mode == act::GradMode::kThroughStats ? "" : " [stop-stats]";
      auto smooth = [&](std::size_t which) {
        return [&, which](Tape& t, const Var& p) {
          const Var x = which == 0 ? p : t.constant(xs);
          const Var z = which == 1 ? p : t.constant(Tensor::scalar(z0));
          const Var a = which == 2 ? p : t.constant(Tensor::scalar(alpha0));
          return weighted_sum(t, act::smooth_ash(x, z, a, opts), w);
        };
      };
      auto leaky = [&](std::size_t which) {
        return [&, which](Tape& t, const Var& p) {
          const Var x = which == 0 ? p : t.constant(xs);
          const Var z = which == 1 ? p : t.constant(Tensor::scalar(z0));
          const Var l = which == 2 ? p : t.constant(Tensor::scalar(leak0));
          return weighted_sum(t, act::leaky_ash(x, z, t.constant(Tensor::scalar(alpha0)), l, opts), w);
        };
      };
      // With stop-stats the input gradient deliberately ignores the statistics.
      if (mode == act::GradMode::kThroughStats) {
        report("smooth_ash d/dx", fd_check(smooth(0), xs), xs);
        report("leaky_ash d/dx", fd_check(leaky(0), xs), xs);
      }
      report("smooth_ash d/dz_k" + tag, fd_check(smooth(1), Tensor::scalar(z0)), Tensor::scalar(z0));
      report("smooth_ash d/dalpha" + tag, fd_check(smooth(2), Tensor::scalar(alpha0)), Tensor::scalar(alpha0));
      report("leaky_ash d/dz_k" + tag, fd_check(leaky(1), Tensor::scalar(z0)), Tensor::scalar(z0));
      report("leaky_ash d/dleak" + tag, fd_check(leaky(2), Tensor::scalar(leak0)), Tensor::scalar(leak0));
    }
  }

  // Per-channel statistics with a z_k per channel.
  {
    RngState rng{77, 0};
    const Tensor x = randn(Shape{2, 5, 4}, rng);
    const Tensor w = randn(Shape{2, 5, 4}, rng);
    const Tensor z = Tensor::of({-0.5, 0.0, 0.3, 1.0});
    const act::AshOptions opts{StatsMode::kPerChannel, act::GradMode::kThroughStats};
    report("smooth_ash per-channel d/dx", fd_check([&](Tape& t, const Var& v) {
             return weighted_sum(t, act::smooth_ash(v, t.constant(z), t.constant(Tensor::scalar(alpha0)), opts), w);
           }, x), x);
    report("smooth_ash per-channel d/dz_k", fd_check([&](Tape& t, const Var& v) {
             return weighted_sum(t, act::smooth_ash(t.constant(x), v, t.constant(Tensor::scalar(alpha0)), opts), w);
           }, z), z);
  }
  return s.finish();
}

SuiteResult equivalence_limits() {
  Suite s("equivalence_limits");
  // gen_swish(1, 0) is Swish on a fine grid.
  Tape tape;
  Tensor grid(Shape{10000});
  for (std::size_t i = 0; i < grid.numel(); ++i) grid[i] = -10.0 + 20.0 * static_cast<double>(i) / 9999.0;
  const Var gx = tape.constant(grid);
  const Var g = act::gen_swish(gx, tape.constant(Tensor::scalar(1.0)), tape.constant(Tensor::scalar(0.0)));
  const Var sw = act::swish(gx);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.numel(); ++i) worst = std::max(worst, std::abs(g.value()[i] - sw.value()[i]));
  s.check(worst < 1e-12, [&] { return fmt("max |gen_swish(1,0) - swish| = %.3g on [-10,10]", worst); });

  // Large alpha approaches the hard form away from the threshold; the tanh
  // and sigmoid spellings agree everywhere.
  RngState rng{31, 0};
  const Tensor x = randn(Shape{10000}, rng);
  const InputStats st = compute_stats(x);
  for (double z : {-1.0, 0.0, 0.5, 1.5}) {
    const Tensor hard = act::hard_ash(x, z, st);
    const Tensor soft = act::smooth_ash(x, z, 1e3, st);
    const Tensor soft_t = act::smooth_ash_tanh(x, z, 1e3, st);
    double lim = 0.0, form = 0.0;
    for (std::size_t i = 0; i < x.numel(); ++i) {
      if (std::abs(x[i] - st.threshold(z)) >= 0.01) lim = std::max(lim, std::abs(soft[i] - hard[i]));
      form = std::max(form, std::abs(soft[i] - soft_t[i]));
    }
    s.check(lim < 1e-3, [&] { return fmt("alpha=1e3 z=%g: |smooth - hard| = %.3g", z, lim); });
    s.check(form < 1e-12, [&] { return fmt("z=%g: |sigmoid form - tanh form| = %.3g", z, form); });
  }
  return s.finish();
}

SuiteResult conditional_unit_grad() {
  Suite s("conditional_unit_grad");
  RngState rng{11, 0};
  for (int trial = 0; trial < 100; ++trial) {
    Tape tape;
    const Var x = tape.leaf(randn(Shape{16}, rng));
    const Var alpha = tape.leaf(Tensor::scalar(0.5 + rng.next_uniform()));
    const double th = rng.next_normal();
    const Var theta = tape.leaf(Tensor::scalar(th));
    tape.backward(ad::sum(act::conditional_unit(x, alpha, theta)));
    const double g = theta.grad()[0];
    s.check(g == 0.0, [&] { return fmt("d/dtheta = %.3g at theta=%g (trial %g)", g, th, trial); });
  }
  // The smooth form does carry a z_k gradient.
  RngState r2{12, 0};
  const Tensor x = randn(Shape{64}, r2);
  const auto f = [&](Tape& t, const Var& z) {
    return ad::sum(act::smooth_ash(t.constant(x), z, t.constant(Tensor::scalar(1.0))));
  };
  const FdReport r = fd_check(f, Tensor::scalar(0.0));
  s.check(std::abs(r.analytic) > 0.0, [&] { return std::string("smooth_ash d/dz_k is zero on Gaussian input"); });
  s.check(r.max_rel_err < kFdTol, [&] {
    return fmt("smooth_ash d/dz_k analytic %.10g vs numeric %.10g (rel %.3g)", r.analytic, r.numeric, r.max_rel_err);
  });
  return s.finish();
}

SuiteResult swish_recovery() {
  Suite s("swish_recovery");
  const nn::Dataset data = gen_builtin(BuiltinKind::kTwoMoons, 200, 0.1, 3);
  nn::TrainConfig tc;
  tc.epochs = 8;
  tc.seed = 4;
  std::vector<std::vector<nn::EpochRecord>> curves;
  for (const char* name : {"swish", "gen_swish_frozen"}) {
    nn::Model model(nn::mlp(2, {8, 8}, 2, act::resolve_activation(name)), tc.seed);
    curves.push_back(nn::train(model, tc, data));
  }
  for (std::size_t e = 0; e < curves[0].size(); ++e) {
    const double d = std::abs(curves[0][e].val_loss - curves[1][e].val_loss);
    const double dt = std::abs(curves[0][e].train_loss - curves[1][e].train_loss);
    s.check(d < 1e-9 && dt < 1e-9, [&] {
      return fmt("epoch %g: swish vs frozen gen_swish(1,0) val_loss diff %.3g, train_loss diff %.3g", e, d, dt);
    });
  }
  return s.finish();
}

SuiteResult invariances() {
  Suite s("invariances");
  RngState rng{2718, 0};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 8 + rng.next_below(120);
    const Tensor x = randn(Shape{n}, rng, rng.next_normal(), 0.2 + 3.0 * rng.next_uniform());
    const double z = 2.0 * rng.next_normal();
    const double c = 0.1 + 10.0 * rng.next_uniform();
    const double shift = 5.0 * rng.next_normal();
    const double alpha = 0.1 + 5.0 * rng.next_uniform();
    const InputStats st = compute_stats(x);

    const Tensor shifted = x + shift;
    const SelectionMask m0 = threshold_mask(x, z);
    const SelectionMask m1 = threshold_mask(shifted, z);
    s.check(m0.keep == m1.keep, [&] { return fmt("mask changed under shift %g (n=%g, z=%g)", shift, double(n), z); });

    const Tensor cx = x * c;
    const InputStats cst = compute_stats(cx);
    const Tensor h0 = act::hard_ash(x, z, st);
    const Tensor h1 = act::hard_ash(cx, z, cst);
    const Tensor y0 = act::smooth_ash(x, z, alpha * c, st);
    const Tensor y1 = act::smooth_ash(cx, z, alpha, cst);
    const Tensor sm = act::smooth_ash(x, z, alpha, st);
    double homog = 0.0, scale = 0.0, sandwich = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      homog = std::max(homog, std::abs(h1[i] - c * h0[i]) / std::max(1.0, std::abs(c * h0[i])));
      scale = std::max(scale, std::abs(y1[i] - c * y0[i]) / std::max(1.0, std::abs(c * y0[i])));
      const double lo = std::min(0.0, x[i]), hi = std::max(0.0, x[i]);
      sandwich = std::max(sandwich, std::max(lo - sm[i], sm[i] - hi));
    }
    s.check(homog <= 1e-12, [&] { return fmt("hard_ash(cX) vs c*hard_ash(X): %.3g (c=%g, z=%g)", homog, c, z); });
    s.check(scale <= 1e-12, [&] {
      return fmt("smooth_ash(cX; a) vs c*smooth_ash(X; a*c): %.3g (c=%g, a=%g, z=%g)", scale, c, alpha, z);
    });
    s.check(sandwich <= 0.0, [&] { return fmt("smooth_ash escapes [min(0,x), max(0,x)] by %.3g (z=%g)", sandwich, z); });
  }
  return s.finish();
}

SuiteResult normality() {
  Suite s("normality");
  RngState rng{256, 0};
  const double bound = std::sqrt(6.0 / 256.0);
  const Tensor in = uniform(Shape{100, 256}, rng, 0.0, 1.0);
  const Tensor w = uniform(Shape{256, 1000}, rng, -bound, bound);
  const NormalityReport r = normality_report(matmul(in, w));
  s.check(std::abs(r.skewness) < 0.2 && std::abs(r.excess_kurtosis) < 0.3, [&] {
    return fmt("dense fan-in 256 outputs: skew %.4f, excess kurtosis %.4f", r.skewness, r.excess_kurtosis);
  });
  return s.finish();
}

}  // namespace

std::vector<SuiteResult> run_verify() {
  return {stats_fidelity(), oracle_agreement(),     gradients(),   equivalence_limits(),
          conditional_unit_grad(), swish_recovery(), invariances(), normality()};
}

std::string verify_table(const std::vector<SuiteResult>& results) {
  std::ostringstream os;
  char line[200];
  std::snprintf(line, sizeof line, "%-24s %-6s %8s %8s %10s\n", "suite", "status", "cases", "failed", "ms");
  os << line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-24s %-6s %8zu %8zu %10.1f\n", r.name.c_str(), r.passed() ? "PASS" : "FAIL",
                  r.cases, r.failed, r.ms);
    os << line;
    for (const auto& f : r.failures) os << "    " << f << '\n';
  }
  return os.str();
}

}  // namespace ashlab::harness
