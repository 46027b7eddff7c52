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

#include "ashlab/harness/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "ashlab/errors.hpp"
#include "json.hpp"

namespace ashlab::harness {
namespace {

using json = nlohmann::ordered_json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Typed access to a JSON object that remembers which keys were read, so the
// remainder can be rejected as unknown.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key, double def) {
    if (!take(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  std::uint64_t unsigned_int(const std::string& key, std::uint64_t def) {
    if (!take(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) fail(key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool def) {
    if (!take(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& def) {
    if (!take(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  std::string required_string(const std::string& key) {
    if (!has(key)) throw ConfigError(where_ + ": missing required key '" + key + "'");
    return string(key, "");
  }

  const json* child(const std::string& key) {
    if (!take(key)) return nullptr;
    return &j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(where_ + "." + key + ": " + what);
  }

 private:
  bool take(const std::string& key) {
    if (!j_.contains(key)) return false;
    used_.insert(key);
    return true;
  }

  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

std::string stats_mode_name(StatsMode m) {
  return m == StatsMode::kPerSample ? "per-sample" : "per-channel";
}

StatsMode stats_mode_from(Reader& r) {
  const std::string s = r.string("stats_mode", "per-sample");
  if (s == "per-sample") return StatsMode::kPerSample;
  if (s == "per-channel") return StatsMode::kPerChannel;
  r.fail("stats_mode", "expected per-sample or per-channel");
}

std::string grad_mode_name(act::GradMode m) {
  return m == act::GradMode::kThroughStats ? "through-stats" : "stop-stats";
}

act::GradMode grad_mode_from(Reader& r) {
  const std::string s = r.string("grad_mode", "through-stats");
  if (s == "through-stats") return act::GradMode::kThroughStats;
  if (s == "stop-stats") return act::GradMode::kStopStats;
  r.fail("grad_mode", "expected through-stats or stop-stats");
}

json activation_json(const act::ActivationSpec& spec) {
  json j;
  j["kind"] = act::kind_name(spec);
  std::visit(Overloaded{
                 [&](const act::LeakyReluSpec& p) { j["slope"] = p.slope; },
                 [&](const act::PReluSpec& p) { j["slope_init"] = p.slope_init; },
                 [&](const act::EluSpec& p) { j["a"] = p.a; },
                 [&](const act::HardAshSpec& p) {
                   j["z_k_init"] = p.z_k_init;
                   j["stats_mode"] = stats_mode_name(p.stats_mode);
                 },
                 [&](const act::HeavisideAshSpec& p) {
                   j["z_k_init"] = p.z_k_init;
                   j["stats_mode"] = stats_mode_name(p.stats_mode);
                 },
                 [&](const act::AshParams& p) {
                   j["alpha"] = p.alpha;
                   j["z_k_init"] = p.z_k_init;
                   j["grad_mode"] = grad_mode_name(p.grad_mode);
                   j["stats_mode"] = stats_mode_name(p.stats_mode);
                   j["alpha_trainable"] = p.alpha_trainable;
                   j["z_channels"] = p.z_channels;
                 },
                 [&](const act::GeneralizedSwishParams& p) {
                   j["a"] = p.a;
                   j["b"] = p.b;
                   j["trainable"] = p.trainable;
                 },
                 [&](const act::LeakyAshParams& p) {
                   j["alpha"] = p.alpha;
                   j["z_k_init"] = p.z_k_init;
                   j["leak_init"] = p.leak_init;
                   j["grad_mode"] = grad_mode_name(p.grad_mode);
                   j["stats_mode"] = stats_mode_name(p.stats_mode);
                 },
                 [&](const act::FixedAshParams& p) {
                   j["k"] = p.k;
                   j["alpha"] = p.alpha;
                   j["grad_mode"] = grad_mode_name(p.grad_mode);
                   j["stats_mode"] = stats_mode_name(p.stats_mode);
                 },
                 [](const auto&) {},
             },
             spec);
  return j;
}

act::ActivationSpec activation_from(const json& j, const std::string& where) {
  Reader r(j, where);
  const std::string kind = r.required_string("kind");
  act::ActivationSpec spec;
  if (kind == "relu") {
    spec = act::ReluSpec{};
  } else if (kind == "lrelu") {
    spec = act::LeakyReluSpec{r.number("slope", 0.01)};
  } else if (kind == "prelu") {
    spec = act::PReluSpec{r.number("slope_init", 0.25)};
  } else if (kind == "softplus") {
    spec = act::SoftplusSpec{};
  } else if (kind == "elu") {
    spec = act::EluSpec{r.number("a", 1.0)};
  } else if (kind == "selu") {
    spec = act::SeluSpec{};
  } else if (kind == "gelu") {
    spec = act::GeluSpec{};
  } else if (kind == "swish") {
    spec = act::SwishSpec{};
  } else if (kind == "hard_ash") {
    spec = act::HardAshSpec{r.number("z_k_init", 0.0), stats_mode_from(r)};
  } else if (kind == "heaviside_ash") {
    spec = act::HeavisideAshSpec{r.number("z_k_init", 0.0), stats_mode_from(r)};
  } else if (kind == "smooth_ash") {
    act::AshParams p;
    p.alpha = r.number("alpha", 1.0);
    p.z_k_init = r.number("z_k_init", 0.0);
    p.grad_mode = grad_mode_from(r);
    p.stats_mode = stats_mode_from(r);
    p.alpha_trainable = r.boolean("alpha_trainable", false);
    p.z_channels = r.unsigned_int("z_channels", 1);
    spec = p;
  } else if (kind == "gen_swish") {
    act::GeneralizedSwishParams p;
    p.a = r.number("a", 1.0);
    p.b = r.number("b", 0.0);
    p.trainable = r.boolean("trainable", true);
    spec = p;
  } else if (kind == "leaky_ash") {
    act::LeakyAshParams p;
    p.alpha = r.number("alpha", 1.0);
    p.z_k_init = r.number("z_k_init", 0.0);
    p.leak_init = r.number("leak_init", 0.01);
    p.grad_mode = grad_mode_from(r);
    p.stats_mode = stats_mode_from(r);
    spec = p;
  } else if (kind == "fixed_ash") {
    act::FixedAshParams p;
    p.k = r.number("k", 50.0);
    p.alpha = r.number("alpha", 1.0);
    p.grad_mode = grad_mode_from(r);
    p.stats_mode = stats_mode_from(r);
    spec = p;
  } else {
    throw ConfigError(where + ": unknown activation kind '" + kind + "'");
  }
  r.finish();
  try {
    act::validate(spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return spec;
}

json layer_json(const nn::LayerSpec& layer) {
  json j;
  std::visit(Overloaded{
                 [&](const nn::DenseSpec& d) {
                   j["type"] = "dense";
                   j["in"] = d.in;
                   j["out"] = d.out;
                 },
                 [&](const nn::Conv2dSpec& c) {
                   j["type"] = "conv2d";
                   j["kh"] = c.kh;
                   j["kw"] = c.kw;
                   j["cin"] = c.cin;
                   j["cout"] = c.cout;
                 },
                 [&](const nn::FlattenSpec&) { j["type"] = "flatten"; },
                 [&](const nn::ActivationLayerSpec& a) {
                   j["type"] = "activation";
                   j["activation"] = activation_json(a.activation);
                 },
             },
             layer);
  return j;
}

std::size_t positive(Reader& r, const std::string& key, std::size_t def) {
  const std::uint64_t v = r.unsigned_int(key, def);
  if (v == 0) r.fail(key, "must be >= 1");
  return static_cast<std::size_t>(v);
}

nn::LayerSpec layer_from(const json& j, const std::string& where) {
  Reader r(j, where);
  const std::string type = r.required_string("type");
  nn::LayerSpec out;
  if (type == "dense") {
    out = nn::DenseSpec{positive(r, "in", 1), positive(r, "out", 1)};
  } else if (type == "conv2d") {
    out = nn::Conv2dSpec{positive(r, "kh", 3), positive(r, "kw", 3), positive(r, "cin", 1),
                         positive(r, "cout", 1)};
  } else if (type == "flatten") {
    out = nn::FlattenSpec{};
  } else if (type == "activation") {
    const json* a = r.child("activation");
    if (a == nullptr) throw ConfigError(where + ": activation layer needs 'activation'");
    out = nn::ActivationLayerSpec{activation_from(*a, where + ".activation")};
  } else {
    throw ConfigError(where + ": unknown layer type '" + type + "'");
  }
  r.finish();
  return out;
}

json optimizer_json(const nn::OptimizerConfig& opt) {
  json j;
  std::visit(Overloaded{
                 [&](const nn::SgdConfig& s) {
                   j["kind"] = "sgd";
                   j["lr"] = s.lr;
                   j["momentum"] = s.momentum;
                 },
                 [&](const nn::AdamConfig& a) {
                   j["kind"] = "adam";
                   j["lr"] = a.lr;
                   j["beta1"] = a.beta1;
                   j["beta2"] = a.beta2;
                   j["eps"] = a.eps;
                 },
             },
             opt);
  return j;
}

nn::OptimizerConfig optimizer_from(const json& j) {
  Reader r(j, "train.optimizer");
  const std::string kind = r.string("kind", "adam");
  nn::OptimizerConfig out;
  if (kind == "sgd") {
    out = nn::SgdConfig{r.number("lr", 0.01), r.number("momentum", 0.0)};
  } else if (kind == "adam") {
    out = nn::AdamConfig{r.number("lr", 1e-3), r.number("beta1", 0.9), r.number("beta2", 0.999),
                         r.number("eps", 1e-8)};
  } else {
    throw ConfigError("train.optimizer: unknown kind '" + kind + "'");
  }
  r.finish();
  return out;
}

json dataset_json(const DatasetSpec& spec) {
  json j;
  std::visit(Overloaded{
                 [&](const BuiltinDataset& b) {
                   j["kind"] = builtin_name(b.kind);
                   j["n"] = b.n;
                   j["noise"] = b.noise;
                   j["seed"] = b.seed;
                 },
                 [&](const IdxDataset& d) {
                   j["kind"] = "idx";
                   j["images"] = d.images;
                   j["labels"] = d.labels;
                 },
                 [&](const CsvDataset& c) {
                   j["kind"] = "csv";
                   j["path"] = c.path;
                 },
             },
             spec);
  return j;
}

DatasetSpec dataset_from(const json& j) {
  Reader r(j, "dataset");
  const std::string kind = r.string("kind", "two_moons");
  DatasetSpec out;
  if (kind == "idx") {
    out = IdxDataset{r.required_string("images"), r.required_string("labels")};
  } else if (kind == "csv") {
    out = CsvDataset{r.required_string("path")};
  } else {
    BuiltinDataset b;
    try {
      b.kind = builtin_from_name(kind);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("dataset: ") + e.what());
    }
    b.n = r.unsigned_int("n", 1000);
    b.noise = r.number("noise", 0.1);
    b.seed = r.unsigned_int("seed", 0);
    if (b.n < 2) r.fail("n", "must be >= 2");
    if (!(b.noise >= 0.0)) r.fail("noise", "must be >= 0");
    out = b;
  }
  r.finish();
  return out;
}

std::string loss_name(nn::LossKind k) { return k == nn::LossKind::kMse ? "mse" : "softmax_xent"; }

json config_json(const ExperimentConfig& c) {
  json j;
  json layers = json::array();
  for (const auto& l : c.model.layers) layers.push_back(layer_json(l));
  j["model"] = {{"input_shape", c.model.input_shape}, {"layers", layers}};
  j["train"] = {{"optimizer", optimizer_json(c.train.optimizer)},
                {"batch_size", c.train.batch_size},
                {"epochs", c.train.epochs},
                {"seed", c.train.seed},
                {"loss", loss_name(c.train.loss)},
                {"val_split", c.train.val_split}};
  j["dataset"] = dataset_json(c.dataset);
  j["output"] = {{"dir", c.output_dir}, {"log_wall_time", c.log_wall_time}};
  return j;
}

ExperimentConfig config_from(const json& j) {
  ExperimentConfig c;
  Reader root(j, "config");
  if (const json* m = root.child("model")) {
    Reader r(*m, "model");
    if (const json* shape = r.child("input_shape")) {
      if (!shape->is_array() || shape->empty()) {
        throw ConfigError("model.input_shape: expected a non-empty array");
      }
      c.model.input_shape.clear();
      for (const auto& d : *shape) {
        if (!d.is_number_unsigned() || d.get<std::uint64_t>() == 0) {
          throw ConfigError("model.input_shape: extents must be positive integers");
        }
        c.model.input_shape.push_back(d.get<std::size_t>());
      }
    }
    const json* layers = r.child("layers");
    if (layers == nullptr || !layers->is_array()) {
      throw ConfigError("model.layers: expected an array of layers");
    }
    for (std::size_t i = 0; i < layers->size(); ++i) {
      c.model.layers.push_back(layer_from((*layers)[i], "model.layers[" + std::to_string(i) + "]"));
    }
    r.finish();
  } else {
    throw ConfigError("config: missing required key 'model'");
  }
  if (const json* t = root.child("train")) {
    Reader r(*t, "train");
    if (const json* o = r.child("optimizer")) c.train.optimizer = optimizer_from(*o);
    c.train.batch_size = positive(r, "batch_size", 32);
    c.train.epochs = r.unsigned_int("epochs", 10);
    c.train.seed = r.unsigned_int("seed", 0);
    const std::string loss = r.string("loss", "softmax_xent");
    if (loss == "softmax_xent") {
      c.train.loss = nn::LossKind::kSoftmaxXent;
    } else if (loss == "mse") {
      c.train.loss = nn::LossKind::kMse;
    } else {
      r.fail("loss", "expected softmax_xent or mse");
    }
    c.train.val_split = r.number("val_split", 0.2);
    r.finish();
    try {
      nn::validate(c.train);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("train: ") + e.what());
    }
  }
  if (const json* d = root.child("dataset")) c.dataset = dataset_from(*d);
  if (const json* o = root.child("output")) {
    Reader r(*o, "output");
    c.output_dir = r.string("dir", "out");
    c.log_wall_time = r.boolean("log_wall_time", false);
    r.finish();
  }
  root.finish();
  return c;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) { return config_from(parse_json(json_text)); }

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& config, int indent) {
  return config_json(config).dump(indent);
}

std::string activation_to_json(const act::ActivationSpec& spec) { return activation_json(spec).dump(); }

act::ActivationSpec activation_from_json(const std::string& json_text) {
  return activation_from(parse_json(json_text), "activation");
}

DatasetSpec parse_dataset_arg(const std::string& arg) {
  const auto colon = arg.find(':');
  const std::string kind = arg.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : arg.substr(colon + 1);
  if (kind == "idx") {
    const auto comma = rest.find(',');
    if (comma == std::string::npos) throw ConfigError("idx dataset needs idx:<images>,<labels>");
    return IdxDataset{rest.substr(0, comma), rest.substr(comma + 1)};
  }
  if (kind == "csv") {
    if (rest.empty()) throw ConfigError("csv dataset needs csv:<path>");
    return CsvDataset{rest};
  }
  BuiltinDataset b;
  try {
    b.kind = builtin_from_name(kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("dataset option '" + item + "' needs key=value");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    try {
      if (key == "n") {
        b.n = std::stoull(val);
      } else if (key == "noise") {
        b.noise = std::stod(val);
      } else if (key == "seed") {
        b.seed = std::stoull(val);
      } else {
        throw ConfigError("unknown dataset option '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad value for dataset option '" + key + "'");
    }
  }
  if (b.n < 2 || !(b.noise >= 0.0)) throw ConfigError("dataset needs n >= 2 and noise >= 0");
  return b;
}

void apply_env_overrides(ExperimentConfig& config) {
  const char* env = std::getenv("ASHLAB_SEED");
  if (env == nullptr || *env == '\0') return;
  const std::string s(env);
  if (s.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("ASHLAB_SEED must be an unsigned integer, got '" + s + "'");
  }
  try {
    config.train.seed = std::stoull(s);
  } catch (const std::out_of_range&) {
    throw ConfigError("ASHLAB_SEED out of range");
  }
}

}  // namespace ashlab::harness
