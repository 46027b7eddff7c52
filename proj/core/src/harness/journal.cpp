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

#include "ashlab/harness/journal.hpp"

#include <bit>
#include <cstring>
#include <iterator>

#include "ashlab/errors.hpp"
#include "json.hpp"

namespace ashlab::harness {
namespace {

using json = nlohmann::ordered_json;

constexpr char kDumpMagic[8] = {'A', 'S', 'H', 'D', 'U', 'M', 'P', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class ByteReader {
 public:
  ByteReader(std::vector<unsigned char> buf, std::string path)
      : buf_(std::move(buf)), path_(std::move(path)) {}

  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) throw FormatError(path_ + ": truncated model dump");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{buf_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{buf_[pos_ + i]} << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  std::vector<unsigned char> buf_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string record_to_json(const nn::EpochRecord& rec, bool with_wall_time) {
  json j;
  j["epoch"] = rec.epoch;
  j["train_loss"] = rec.train_loss;
  j["train_acc"] = rec.train_acc;
  j["val_loss"] = rec.val_loss;
  j["val_acc"] = rec.val_acc;
  json zk = json::object();
  for (const auto& [layer, values] : rec.zk) zk[layer] = values;
  j["zk"] = zk;
  if (with_wall_time) j["wall_ms"] = rec.wall_ms;
  return j.dump();
}

nn::EpochRecord record_from_json(const std::string& line) {
  nn::EpochRecord rec;
  try {
    const json j = json::parse(line);
    rec.epoch = j.at("epoch").get<std::size_t>();
    rec.train_loss = j.at("train_loss").get<double>();
    rec.train_acc = j.at("train_acc").get<double>();
    rec.val_loss = j.at("val_loss").get<double>();
    rec.val_acc = j.at("val_acc").get<double>();
    for (const auto& [layer, values] : j.at("zk").items()) {
      rec.zk[layer] = values.get<std::vector<double>>();
    }
    if (j.contains("wall_ms")) rec.wall_ms = j.at("wall_ms").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad journal line: ") + e.what());
  }
  return rec;
}

MetricsJournal::MetricsJournal(const std::filesystem::path& path, bool with_wall_time)
    : out_(path, std::ios::binary | std::ios::trunc), with_wall_time_(with_wall_time) {
  if (!out_) throw std::runtime_error("cannot open journal " + path.string());
}

void MetricsJournal::append(const nn::EpochRecord& rec) {
  if (last_epoch_ && rec.epoch <= *last_epoch_) {
    throw std::logic_error("journal epochs must increase: " + std::to_string(rec.epoch) +
                           " after " + std::to_string(*last_epoch_));
  }
  out_ << record_to_json(rec, with_wall_time_) << '\n';
  out_.flush();
  last_epoch_ = rec.epoch;
  ++lines_;
}

std::vector<nn::EpochRecord> read_journal(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<nn::EpochRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nn::EpochRecord rec = record_from_json(line);
    if (!out.empty() && rec.epoch <= out.back().epoch) {
      throw FormatError(path.string() + ": epoch " + std::to_string(rec.epoch) +
                        " does not increase");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void write_dump(const std::filesystem::path& path, const std::vector<const Parameter*>& params) {
  std::string buf(kDumpMagic, sizeof kDumpMagic);
  put_u32(buf, static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    put_u32(buf, static_cast<std::uint32_t>(p->name.size()));
    buf += p->name;
    const auto& dims = p->value.shape().dims();
    put_u32(buf, static_cast<std::uint32_t>(dims.size()));
    for (std::size_t d : dims) put_u32(buf, static_cast<std::uint32_t>(d));
  }
  for (const Parameter* p : params) {
    for (double v : p->value.data()) put_f64(buf, v);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<DumpEntry> read_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  ByteReader r({std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()},
               path.string());
  if (r.bytes(sizeof kDumpMagic) != std::string(kDumpMagic, sizeof kDumpMagic)) {
    throw FormatError(path.string() + ": not a model dump");
  }
  const std::uint32_t count = r.u32();
  std::vector<DumpEntry> entries;
  std::vector<Shape> shapes;
  for (std::uint32_t i = 0; i < count; ++i) {
    DumpEntry e;
    e.name = r.bytes(r.u32());
    const std::uint32_t rank = r.u32();
    std::vector<std::size_t> dims(rank);
    for (auto& d : dims) d = r.u32();
    try {
      shapes.emplace_back(dims);
    } catch (const ShapeError& err) {
      throw FormatError(path.string() + ": " + err.what());
    }
    entries.push_back(std::move(e));
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    Tensor t(shapes[i]);
    for (auto& v : t.data()) v = r.f64();
    entries[i].value = std::move(t);
  }
  if (!r.done()) throw FormatError(path.string() + ": trailing bytes after model dump");
  return entries;
}

TrainOutcome run_training(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  nn::validate(config.train);
  nn::Dataset data = load_dataset(config.dataset, config.model.input_shape);
  nn::Model model(config.model, config.train.seed);

  std::filesystem::create_directories(out_dir);
  TrainOutcome outcome;
  outcome.journal = out_dir / "metrics.jsonl";
  outcome.dump = out_dir / "model.bin";
  MetricsJournal journal(outcome.journal, config.log_wall_time);
  outcome.records = nn::train(model, config.train, data,
                              [&](const nn::EpochRecord& rec) { journal.append(rec); });

  std::vector<const Parameter*> params;
  for (Parameter* p : model.parameters()) params.push_back(p);
  write_dump(outcome.dump, params);
  return outcome;
}

}  // namespace ashlab::harness
