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

// Reference implementations that share no code with the library. Slow and
// simple on purpose.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace oracle {

inline long double sigmoid(long double x) { return 1.0L / (1.0L + std::exp(-x)); }

inline long double swish(long double x) { return x * sigmoid(x); }

inline long double swish_grad(long double x) {
  const long double s = sigmoid(x);
  return s + x * s * (1.0L - s);
}

// P(Z >= z) from the complementary error function in long double.
inline long double upper_tail(long double z) { return 0.5L * std::erfc(z / std::sqrt(2.0L)); }

// z with P(Z >= z) = k/100, by bisection.
inline double z_for_percent(double k) {
  const long double target = static_cast<long double>(k) / 100.0L;
  long double lo = -40.0L, hi = 40.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (upper_tail(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return static_cast<double>(0.5L * (lo + hi));
}

inline std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b,
                                  std::size_t m, std::size_t k, std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] = s;
    }
  }
  return c;
}

struct Moments {
  long double mean = 0, var = 0;
};

inline Moments two_pass(const std::vector<double>& x) {
  Moments m;
  for (double v : x) m.mean += v;
  m.mean /= static_cast<long double>(x.size());
  for (double v : x) m.var += (v - m.mean) * (v - m.mean);
  m.var /= static_cast<long double>(x.size());
  return m;
}

// Indices of the m largest values; ties go to the lower index.
inline std::vector<bool> topk_by_sort(const std::vector<double>& x, std::size_t m) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] > x[b];
    return a < b;
  });
  std::vector<bool> keep(x.size(), false);
  for (std::size_t i = 0; i < m; ++i) keep[idx[i]] = true;
  return keep;
}

// Hard threshold from a two-pass mean and population deviation.
inline std::vector<double> hard_threshold(const std::vector<double>& x, double z) {
  const Moments m = two_pass(x);
  const long double t = m.mean + z * std::sqrt(m.var);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] >= t ? x[i] : 0.0;
  return y;
}

inline double skewness(const std::vector<double>& x) {
  const Moments m = two_pass(x);
  long double s3 = 0;
  for (double v : x) s3 += std::pow(v - m.mean, 3.0L);
  s3 /= static_cast<long double>(x.size());
  return static_cast<double>(s3 / std::pow(m.var, 1.5L));
}

inline double excess_kurtosis(const std::vector<double>& x) {
  const Moments m = two_pass(x);
  long double s4 = 0;
  for (double v : x) s4 += std::pow(v - m.mean, 4.0L);
  s4 /= static_cast<long double>(x.size());
  return static_cast<double>(s4 / (m.var * m.var) - 3.0L);
}

// Central difference of a scalar function, long double arithmetic.
template <class F>
long double derivative(F&& f, long double x, long double h = 1e-7L) {
  return (f(x + h) - f(x - h)) / (2.0L * h);
}

}  // namespace oracle
