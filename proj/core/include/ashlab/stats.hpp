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

#include <cstddef>
#include <vector>

#include "ashlab/tensor.hpp"

namespace ashlab {

// Floor applied to sigma when it is used to place a threshold.
inline constexpr double kSigmaFloor = 1e-5;

struct InputStats {
  double mu = 0.0;
  double sigma = 0.0;  // population convention, unfloored
  std::size_t n = 0;

  double sigma_for_threshold() const { return sigma > kSigmaFloor ? sigma : kSigmaFloor; }
  double threshold(double z) const { return mu + z * sigma_for_threshold(); }
};

// Which elements share one mean/std.
//  per-sample:  rank-1 input is a single sample; otherwise axis 0 is the batch
//               and each sample's remaining elements form one group.
//  per-channel: rank >= 3 input [B, ..., C]; each (sample, channel) pair forms
//               a group over the spatial positions.
enum class StatsMode { kPerSample, kPerChannel };

// Maps each element of a tensor to its statistics group and channel.
class GroupLayout {
 public:
  GroupLayout(const Shape& shape, StatsMode mode);

  std::size_t groups() const { return groups_; }
  std::size_t channels() const { return channels_; }
  std::size_t group_size() const { return group_size_; }
  std::size_t group_of(std::size_t i) const {
    return mode_ == StatsMode::kPerSample ? i / group_size_
                                          : (i / sample_size_) * channels_ + i % channels_;
  }
  std::size_t channel_of(std::size_t i) const { return i % channels_; }

 private:
  StatsMode mode_;
  std::size_t groups_ = 1;
  std::size_t channels_ = 1;
  std::size_t group_size_ = 1;
  std::size_t sample_size_ = 1;
};

// Population mean/std over every element of x, in one Welford pass.
InputStats compute_stats(const Tensor& x);
InputStats compute_stats(std::span<const double> x);
std::vector<InputStats> compute_group_stats(const Tensor& x, StatsMode mode);

// z with P(Z >= z) = k/100 for Z ~ N(0, 1); k in percent, 0 < k < 100.
double z_from_percentile(double k_percent);
// 100 * P(Z >= z).
double percentile_from_z(double z);

// (x - mu) / sigma over all elements; constant input maps to all zeros.
Tensor zscore(const Tensor& x);

struct SelectionMask {
  std::vector<bool> keep;
  Shape shape;
  std::size_t kept = 0;
};

// Exactly ceil(k N / 100) largest elements; ties at the cut go to the lower
// linear index. Quickselect over an index permutation.
SelectionMask exact_topk_mask(const Tensor& x, double k_percent);
// Same selection by full sort; O(N log N) reference route.
SelectionMask sorted_topk_mask(const Tensor& x, double k_percent);
// Elements at or above mu + z sigma of the whole tensor.
SelectionMask threshold_mask(const Tensor& x, double z);

double jaccard(const SelectionMask& a, const SelectionMask& b);

struct NormalityReport {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

// Moment-based diagnostics. Meaningful for N >= 100; throws
// std::domain_error only on zero-variance input.
NormalityReport normality_report(const Tensor& x);

}  // namespace ashlab
