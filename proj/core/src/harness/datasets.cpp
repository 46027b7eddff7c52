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

#include "ashlab/harness/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ashlab/errors.hpp"

namespace ashlab::harness {
namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& buf, std::size_t off,
                   const std::filesystem::path& path) {
  if (off + 4 > buf.size()) throw FormatError(path.string() + ": truncated IDX header");
  return (std::uint32_t{buf[off]} << 24) | (std::uint32_t{buf[off + 1]} << 16) |
         (std::uint32_t{buf[off + 2]} << 8) | std::uint32_t{buf[off + 3]};
}

std::string hex32(std::uint32_t v) {
  char s[11];
  std::snprintf(s, sizeof s, "0x%08X", v);
  return s;
}

void check_magic(std::uint32_t got, std::uint32_t want, const std::filesystem::path& path) {
  if (got != want) {
    throw FormatError(path.string() + ": bad IDX magic " + hex32(got) + " (expected " +
                      hex32(want) + ")");
  }
}

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::string builtin_name(BuiltinKind kind) {
  switch (kind) {
    case BuiltinKind::kTwoMoons: return "two_moons";
    case BuiltinKind::kBlobs: return "blobs";
    case BuiltinKind::kSpirals: return "spirals";
  }
  return "two_moons";
}

BuiltinKind builtin_from_name(const std::string& name) {
  if (name == "two_moons") return BuiltinKind::kTwoMoons;
  if (name == "blobs") return BuiltinKind::kBlobs;
  if (name == "spirals") return BuiltinKind::kSpirals;
  throw std::invalid_argument("unknown builtin dataset '" + name + "'");
}

nn::Dataset gen_builtin(BuiltinKind kind, std::size_t n, double noise, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("builtin dataset needs n >= 2");
  if (!(noise >= 0.0)) throw std::invalid_argument("noise must be >= 0");
  const std::size_t classes = kind == BuiltinKind::kBlobs ? 3 : 2;
  RngState rng{seed, 0};
  nn::Dataset data;
  data.num_classes = classes;
  data.features = Tensor(Shape{n, 2});
  data.labels.resize(n);

  // Class c gets the samples i with i % classes == c.
  std::vector<std::size_t> per_class(classes, 0);
  for (std::size_t i = 0; i < n; ++i) ++per_class[i % classes];
  std::vector<std::size_t> seen(classes, 0);

  constexpr double kPi = std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % classes;
    const std::size_t j = seen[c]++;
    const double frac = per_class[c] > 1 ? static_cast<double>(j) / static_cast<double>(per_class[c] - 1) : 0.0;
    double x = 0.0, y = 0.0;
    switch (kind) {
      case BuiltinKind::kTwoMoons: {
        const double t = kPi * frac;
        if (c == 0) {
          x = std::cos(t);
          y = std::sin(t);
        } else {
          x = 1.0 - std::cos(t);
          y = 0.5 - std::sin(t);
        }
        break;
      }
      case BuiltinKind::kBlobs: {
        const double angle = 2.0 * kPi * static_cast<double>(c) / 3.0 + kPi / 2.0;
        x = 2.0 * std::cos(angle);
        y = 2.0 * std::sin(angle);
        break;
      }
      case BuiltinKind::kSpirals: {
        // Two interleaved arms, 1.5 turns each.
        const double r = 0.1 + 0.9 * frac;
        const double theta = 3.0 * kPi * frac + kPi * static_cast<double>(c);
        x = r * std::cos(theta);
        y = r * std::sin(theta);
        break;
      }
    }
    if (noise > 0.0) {
      x += noise * rng.next_normal();
      y += noise * rng.next_normal();
    }
    data.features[2 * i] = x;
    data.features[2 * i + 1] = y;
    data.labels[i] = c;
  }
  return data;
}

Tensor read_idx_images(const std::filesystem::path& path) {
  const auto buf = read_all(path);
  check_magic(be32(buf, 0, path), kIdxImagesMagic, path);
  const std::size_t count = be32(buf, 4, path);
  const std::size_t rows = be32(buf, 8, path);
  const std::size_t cols = be32(buf, 12, path);
  const std::size_t need = 16 + count * rows * cols;
  if (buf.size() < need) {
    throw FormatError(path.string() + ": truncated IDX image data (" + std::to_string(buf.size()) +
                      " of " + std::to_string(need) + " bytes)");
  }
  Tensor t(Shape{count, rows, cols});
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = static_cast<double>(buf[16 + i]) / 255.0;
  return t;
}

std::vector<std::size_t> read_idx_labels(const std::filesystem::path& path) {
  const auto buf = read_all(path);
  check_magic(be32(buf, 0, path), kIdxLabelsMagic, path);
  const std::size_t count = be32(buf, 4, path);
  if (buf.size() < 8 + count) throw FormatError(path.string() + ": truncated IDX label data");
  std::vector<std::size_t> labels(count);
  for (std::size_t i = 0; i < count; ++i) labels[i] = buf[8 + i];
  return labels;
}

IdxImages ingest_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  IdxImages out{read_idx_images(images), read_idx_labels(labels)};
  if (out.images.shape()[0] != out.labels.size()) {
    throw FormatError("IDX image count " + std::to_string(out.images.shape()[0]) +
                      " does not match label count " + std::to_string(out.labels.size()));
  }
  return out;
}

nn::Dataset read_csv_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<double> values;
  std::vector<std::size_t> labels;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    bool numeric = true;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v;
      if (!parse_double(cell, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (labels.empty() && width == 0) continue;  // header
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    if (row.size() < 2) throw FormatError(path.string() + ": rows need features and a label");
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": ragged row");
    }
    const double label = row.back();
    if (label < 0 || label != std::floor(label)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": label must be a class index");
    }
    labels.push_back(static_cast<std::size_t>(label));
    values.insert(values.end(), row.begin(), row.end() - 1);
  }
  if (labels.empty()) throw FormatError(path.string() + ": no data rows");
  nn::Dataset data;
  data.features = Tensor(Shape{labels.size(), width - 1}, std::move(values));
  data.num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  data.labels = std::move(labels);
  return data;
}

nn::Dataset load_dataset(const DatasetSpec& spec, const std::vector<std::size_t>& input_shape) {
  nn::Dataset data;
  if (const auto* b = std::get_if<BuiltinDataset>(&spec)) {
    data = gen_builtin(b->kind, b->n, b->noise, b->seed);
  } else if (const auto* idx = std::get_if<IdxDataset>(&spec)) {
    IdxImages img = ingest_idx(idx->images, idx->labels);
    data.features = std::move(img.images);
    data.labels = std::move(img.labels);
    data.num_classes =
        data.labels.empty() ? 1 : *std::max_element(data.labels.begin(), data.labels.end()) + 1;
  } else {
    data = read_csv_dataset(std::get<CsvDataset>(spec).path);
  }
  const std::size_t rows = data.features.shape()[0];
  if (input_shape.empty()) {
    data.features = data.features.reshaped(Shape{rows, data.features.numel() / rows});
    return data;
  }
  std::size_t per_sample = 1;
  for (std::size_t d : input_shape) per_sample *= d;
  if (per_sample * rows != data.features.numel()) {
    throw ShapeError("dataset samples of " + std::to_string(data.features.numel() / rows) +
                     " values do not fit model input of " + std::to_string(per_sample));
  }
  std::vector<std::size_t> dims{rows};
  dims.insert(dims.end(), input_shape.begin(), input_shape.end());
  data.features = data.features.reshaped(Shape(dims));
  return data;
}

}  // namespace ashlab::harness
