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

#include <filesystem>
#include <string>

#include "ashlab/activations.hpp"
#include "ashlab/harness/datasets.hpp"
#include "ashlab/nn.hpp"

namespace ashlab::harness {

struct ExperimentConfig {
  nn::ModelSpec model;
  nn::TrainConfig train;
  DatasetSpec dataset = BuiltinDataset{};
  std::string output_dir = "out";
  // Wall time per epoch in the journal makes journals differ between runs.
  bool log_wall_time = false;
};

// Parses one JSON document. Missing keys take defaults; unknown keys and
// invalid values raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Canonical JSON with every field spelled out.
std::string serialize_config(const ExperimentConfig& config, int indent = 2);

// Tagged JSON object for one activation, e.g.
// {"kind":"smooth_ash","alpha":1.0,"z_k_init":0.0,"grad_mode":"through-stats",...}.
std::string activation_to_json(const act::ActivationSpec& spec);
act::ActivationSpec activation_from_json(const std::string& json_text);

// "two_moons", "spirals:n=500,noise=0.2,seed=3", "idx:<images>,<labels>",
// "csv:<path>".
DatasetSpec parse_dataset_arg(const std::string& arg);

// Replaces train.seed with $ASHLAB_SEED when it is set; ConfigError if it is
// not an unsigned integer.
void apply_env_overrides(ExperimentConfig& config);

}  // namespace ashlab::harness
