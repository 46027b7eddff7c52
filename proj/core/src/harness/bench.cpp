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

#include "ashlab/harness/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "ashlab/activations.hpp"
#include "ashlab/errors.hpp"
#include "ashlab/stats.hpp"

namespace ashlab::harness {
namespace {

template <class F>
double median_ns(std::size_t repeats, F&& f) {
  std::vector<double> t;
  t.reserve(repeats);
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    t.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
  }
  std::nth_element(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(t.size() / 2), t.end());
  return t[t.size() / 2];
}

// Keeps the optimizer from discarding a result.
volatile double g_sink = 0.0;

}  // namespace

std::vector<std::size_t> parse_sizes(const std::string& arg) {
  std::vector<std::size_t> out;
  std::stringstream ss(arg);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    std::size_t used = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::logic_error&) {
      throw ConfigError("bad size '" + item + "'");
    }
    if (used != item.size() || v != std::floor(v) || v > 1e12) {
      throw ConfigError("size '" + item + "' is not an integer count");
    }
    if (v < 1.0) throw ConfigError("sizes must be >= 1, got '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw ConfigError("no sizes given");
  return out;
}

std::vector<BenchRow> run_bench(const std::string& activation, const std::vector<std::size_t>& sizes,
                                std::size_t repeats) {
  if (repeats == 0) throw ConfigError("repeats must be >= 1");
  act::ActivationSpec spec;
  try {
    spec = act::resolve_activation(activation);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::vector<BenchRow> rows;
  for (std::size_t n : sizes) {
    if (n == 0) throw ConfigError("sizes must be >= 1");
    RngState rng{n, 0};
    const Tensor x = randn(Shape{n}, rng);
    act::Activation fn(spec, "bench");
    const double per = 1.0 / static_cast<double>(n);

    const double fwd = median_ns(repeats, [&] {
      Tape tape;
      const Var y = fn.apply(tape, tape.constant(x));
      g_sink = y.value()[0];
    });
    const double qs = median_ns(repeats, [&] { g_sink = static_cast<double>(exact_topk_mask(x, 10.0).kept); });
    const double srt = median_ns(repeats, [&] { g_sink = static_cast<double>(sorted_topk_mask(x, 10.0).kept); });
    rows.push_back({n, activation + "_forward", fwd * per});
    rows.push_back({n, "quickselect_topk", qs * per});
    rows.push_back({n, "sort_topk", srt * per});
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "size,method,ns_per_elem\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.4f", r.ns_per_elem);
    os << r.size << ',' << r.method << ',' << buf << '\n';
  }
  return os.str();
}

std::string bench_ratios(const std::vector<BenchRow>& rows) {
  std::map<std::size_t, std::map<std::string, double>> by_size;
  std::vector<std::size_t> order;
  for (const auto& r : rows) {
    if (!by_size.count(r.size)) order.push_back(r.size);
    by_size[r.size][r.method.ends_with("_forward") ? "forward" : r.method] = r.ns_per_elem;
  }
  std::ostringstream os;
  char buf[128];
  for (std::size_t n : order) {
    auto& m = by_size[n];
    const double f = m["forward"];
    std::snprintf(buf, sizeof buf, "N=%zu quickselect/forward=%.2f sort/forward=%.2f\n", n,
                  f > 0 ? m["quickselect_topk"] / f : 0.0, f > 0 ? m["sort_topk"] / f : 0.0);
    os << buf;
  }
  return os.str();
}

}  // namespace ashlab::harness
