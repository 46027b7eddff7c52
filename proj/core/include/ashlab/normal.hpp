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

// Standard normal distribution helpers shared by the sampler and the Z-table.

namespace ashlab::normal {

// Phi(z) = P(Z <= z) for Z ~ N(0, 1).
double cdf(double z);

// P(Z >= z).
double upper_tail(double z);

// Inverse of cdf on (0, 1). Acklam's rational approximation followed by one
// Halley step against the erfc-based cdf; absolute error below 1e-9.
double quantile(double p);

// Standard normal density.
double pdf(double z);

}  // namespace ashlab::normal
