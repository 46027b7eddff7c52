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

#include <stdexcept>
#include <string>

namespace ashlab {

// Shape or dimension mismatch between operands.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input file (IDX, CSV, model dump).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Experiment configuration could not be parsed or validated.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t epoch, std::size_t batch, std::string layer)
      : std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch) +
                           ", first non-finite layer: " + layer),
        epoch_(epoch),
        batch_(batch),
        layer_(std::move(layer)) {}

  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }
  const std::string& layer() const { return layer_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
  std::string layer_;
};

}  // namespace ashlab
