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

#include "ashlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ashlab/errors.hpp"
#include "ashlab/normal.hpp"

namespace ashlab {
namespace {

std::size_t keep_count(std::size_t n, double k_percent) {
  if (!(k_percent > 0.0 && k_percent <= 100.0)) {
    throw std::domain_error("top-k percentile must lie in (0, 100]");
  }
  // Guard against k*N/100 landing a rounding error above an integer.
  const double exact = k_percent * static_cast<double>(n) / 100.0;
  const auto m = static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
  return std::clamp<std::size_t>(m, 1, n);
}

SelectionMask mask_from_indices(const Tensor& x, std::span<const std::size_t> chosen) {
  SelectionMask mask{std::vector<bool>(x.numel(), false), x.shape(), chosen.size()};
  for (std::size_t i : chosen) mask.keep[i] = true;
  return mask;
}

}  // namespace

GroupLayout::GroupLayout(const Shape& shape, StatsMode mode) : mode_(mode) {
  const std::size_t n = shape.numel();
  if (shape.rank() == 1) {
    if (mode == StatsMode::kPerChannel) {
      throw ShapeError("per-channel statistics need a [B, ..., C] tensor, got " + shape.str());
    }
    groups_ = 1;
    group_size_ = n;
    sample_size_ = n;
    return;
  }
  const std::size_t batch = shape[0];
  sample_size_ = n / batch;
  if (mode == StatsMode::kPerSample) {
    groups_ = batch;
    group_size_ = sample_size_;
    return;
  }
  if (shape.rank() < 3) {
    throw ShapeError("per-channel statistics need a [B, ..., C] tensor, got " + shape.str());
  }
  channels_ = shape[shape.rank() - 1];
  groups_ = batch * channels_;
  group_size_ = sample_size_ / channels_;
}

InputStats compute_stats(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("compute_stats over empty input");
  RunningMoments m;
  for (double v : x) m.push(v);
  return InputStats{m.mean, std::sqrt(m.var_pop()), m.n};
}

InputStats compute_stats(const Tensor& x) { return compute_stats(x.data()); }

std::vector<InputStats> compute_group_stats(const Tensor& x, StatsMode mode) {
  const GroupLayout layout(x.shape(), mode);
  std::vector<RunningMoments> acc(layout.groups());
  for (std::size_t i = 0; i < x.numel(); ++i) acc[layout.group_of(i)].push(x[i]);
  std::vector<InputStats> out;
  out.reserve(acc.size());
  for (const auto& m : acc) out.push_back({m.mean, std::sqrt(m.var_pop()), m.n});
  return out;
}

double z_from_percentile(double k_percent) {
  if (!(k_percent > 0.0 && k_percent < 100.0)) {
    throw std::domain_error("percentile must lie in (0, 100)");
  }
  // Upper tail probability k/100; quantile(1 - p) = -quantile(p).
  // + 0.0 turns the -0.0 at k = 50 into +0.0.
  return -normal::quantile(k_percent / 100.0) + 0.0;
}

double percentile_from_z(double z) {
  if (!std::isfinite(z)) throw std::domain_error("percentile_from_z: z must be finite");
  return 100.0 * normal::upper_tail(z);
}

Tensor zscore(const Tensor& x) {
  const InputStats s = compute_stats(x);
  Tensor out(x.shape());
  if (s.sigma == 0.0) return out;
  for (std::size_t i = 0; i < x.numel(); ++i) out[i] = (x[i] - s.mu) / s.sigma;
  return out;
}

SelectionMask exact_topk_mask(const Tensor& x, double k_percent) {
  const std::size_t m = keep_count(x.numel(), k_percent);
  std::vector<std::size_t> idx(x.numel());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto before = [&x](std::size_t a, std::size_t b) {
    return x[a] > x[b] || (x[a] == x[b] && a < b);
  };
  if (m < idx.size()) {
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end(), before);
  }
  return mask_from_indices(x, std::span<const std::size_t>(idx.data(), m));
}

SelectionMask sorted_topk_mask(const Tensor& x, double k_percent) {
  const std::size_t m = keep_count(x.numel(), k_percent);
  std::vector<std::size_t> idx(x.numel());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&x](std::size_t a, std::size_t b) { return x[a] > x[b]; });
  return mask_from_indices(x, std::span<const std::size_t>(idx.data(), m));
}

SelectionMask threshold_mask(const Tensor& x, double z) {
  const double t = compute_stats(x).threshold(z);
  SelectionMask mask{std::vector<bool>(x.numel(), false), x.shape(), 0};
  for (std::size_t i = 0; i < x.numel(); ++i) {
    if (x[i] >= t) {
      mask.keep[i] = true;
      ++mask.kept;
    }
  }
  return mask;
}

double jaccard(const SelectionMask& a, const SelectionMask& b) {
  if (a.keep.size() != b.keep.size()) throw ShapeError("jaccard: mask sizes differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.keep.size(); ++i) {
    inter += a.keep[i] && b.keep[i];
    uni += a.keep[i] || b.keep[i];
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

NormalityReport normality_report(const Tensor& x) {
  const InputStats s = compute_stats(x);
  if (s.sigma == 0.0) throw std::domain_error("normality_report: zero variance input");
  double m3 = 0.0, m4 = 0.0;
  for (double v : x.data()) {
    const double d = (v - s.mu) / s.sigma;
    const double d2 = d * d;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double n = static_cast<double>(x.numel());
  return NormalityReport{m3 / n, m4 / n - 3.0};
}

}  // namespace ashlab
