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

#include "ashlab/harness/compare.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "ashlab/errors.hpp"

namespace ashlab::harness {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Job {
  std::string activation;
  std::uint64_t seed;
  bool reference;  // hidden ReLU run that only supplies the cut
};

RunResult train_one(const Job& job, const CompareConfig& config, const nn::Dataset& data) {
  RunResult run;
  run.activation = job.activation;
  run.seed = job.seed;
  const act::ActivationSpec spec = act::resolve_activation(job.activation);
  const std::size_t in = data.features.shape()[1];
  nn::Model model(nn::mlp(in, config.hidden, data.num_classes, spec), job.seed);
  nn::TrainConfig tc = config.train;
  tc.seed = job.seed;
  try {
    nn::train(model, tc, data, [&](const nn::EpochRecord& rec) { run.records.push_back(rec); });
  } catch (const DivergenceError& e) {
    run.failed = true;
    run.error = e.what();
  }
  return run;
}

double best_val_loss(const RunResult& r) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& rec : r.records) best = std::min(best, rec.val_loss);
  return best;
}

}  // namespace

CompareResult run_compare(const CompareConfig& config) {
  if (config.activations.empty()) throw ConfigError("compare needs at least one activation");
  if (config.seeds == 0) throw ConfigError("compare needs seeds >= 1");
  for (const auto& name : config.activations) {
    try {
      act::resolve_activation(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  nn::validate(config.train);
  const nn::Dataset data = load_dataset(config.dataset, {});

  std::vector<std::string> names = config.activations;
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  const bool have_relu = std::find(names.begin(), names.end(), "relu") != names.end();

  std::vector<Job> jobs;
  for (const auto& name : names) {
    for (std::size_t i = 0; i < config.seeds; ++i) jobs.push_back({name, config.base_seed + i, false});
  }
  if (!config.cut && !have_relu) {
    for (std::size_t i = 0; i < config.seeds; ++i) jobs.push_back({"relu", config.base_seed + i, true});
  }

  // Each job writes only its own slot; assembly below is single-threaded.
  std::vector<RunResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) results[j] = train_one(jobs[j], config, data);
  };
  const std::size_t threads = std::clamp<std::size_t>(config.threads, 1, jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::map<std::uint64_t, double> relu_cut;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (jobs[j].activation == "relu" && !results[j].failed) {
      relu_cut[jobs[j].seed] = 1.1 * best_val_loss(results[j]);
    }
  }

  CompareResult out;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (jobs[j].reference) continue;
    RunResult run = std::move(results[j]);
    if (config.cut) {
      run.cut = *config.cut;
    } else {
      const auto it = relu_cut.find(run.seed);
      run.cut = it == relu_cut.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
    }
    for (const auto& rec : run.records) {
      if (rec.val_loss < run.cut) {
        run.epochs_to_threshold = rec.epoch + 1;
        break;
      }
    }
    out.runs.push_back(std::move(run));
  }
  return out;
}

std::string curves_csv(const CompareResult& result) {
  std::ostringstream os;
  os << "epoch,activation,seed,train_loss,val_loss,val_acc\n";
  for (const auto& run : result.runs) {
    for (const auto& rec : run.records) {
      os << rec.epoch << ',' << run.activation << ',' << run.seed << ',' << num(rec.train_loss)
         << ',' << num(rec.val_loss) << ',' << num(rec.val_acc) << '\n';
    }
    if (run.failed) {
      os << run.records.size() << ',' << run.activation << ',' << run.seed << ",nan,nan,nan\n";
    }
  }
  return os.str();
}

std::string mean_curves_csv(const CompareResult& result) {
  struct Acc {
    std::size_t n = 0;
    double train_loss = 0, val_loss = 0, val_acc = 0;
  };
  std::map<std::string, std::map<std::size_t, Acc>> acc;
  for (const auto& run : result.runs) {
    if (run.failed) continue;
    for (const auto& rec : run.records) {
      Acc& a = acc[run.activation][rec.epoch];
      ++a.n;
      a.train_loss += rec.train_loss;
      a.val_loss += rec.val_loss;
      a.val_acc += rec.val_acc;
    }
  }
  std::ostringstream os;
  os << "epoch,activation,runs,train_loss,val_loss,val_acc\n";
  for (const auto& [name, epochs] : acc) {
    for (const auto& [epoch, a] : epochs) {
      const double n = static_cast<double>(a.n);
      os << epoch << ',' << name << ',' << a.n << ',' << num(a.train_loss / n) << ','
         << num(a.val_loss / n) << ',' << num(a.val_acc / n) << '\n';
    }
  }
  return os.str();
}

std::string runs_csv(const CompareResult& result) {
  std::ostringstream os;
  os << "activation,seed,status,epochs,cut,epochs_to_threshold,best_val_loss,final_val_loss,"
        "final_val_acc\n";
  for (const auto& run : result.runs) {
    os << run.activation << ',' << run.seed << ',' << (run.failed ? "failed" : "ok") << ','
       << run.records.size() << ',' << num(run.cut) << ',';
    if (run.epochs_to_threshold) os << *run.epochs_to_threshold;
    os << ',';
    if (run.records.empty()) {
      os << "nan,nan,nan\n";
    } else {
      os << num(best_val_loss(run)) << ',' << num(run.records.back().val_loss) << ','
         << num(run.records.back().val_acc) << '\n';
    }
  }
  return os.str();
}

void write_compare_csvs(const CompareResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::pair<const char*, std::string> files[] = {
      {"curves.csv", curves_csv(result)},
      {"mean_curves.csv", mean_curves_csv(result)},
      {"runs.csv", runs_csv(result)},
  };
  for (const auto& [name, text] : files) {
    std::ofstream out(out_dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (out_dir / name).string());
    out << text;
  }
}

std::string ordering_report(const CompareResult& result) {
  struct Row {
    std::string name;
    std::size_t ok = 0, failed = 0, reached = 0;
    double final_loss = 0, best_loss = 0, ett = 0;
  };
  std::map<std::string, Row> rows;
  for (const auto& run : result.runs) {
    Row& r = rows[run.activation];
    r.name = run.activation;
    if (run.failed || run.records.empty()) {
      ++r.failed;
      continue;
    }
    ++r.ok;
    r.final_loss += run.records.back().val_loss;
    r.best_loss += best_val_loss(run);
    if (run.epochs_to_threshold) {
      ++r.reached;
      r.ett += static_cast<double>(*run.epochs_to_threshold);
    }
  }
  std::vector<Row> sorted;
  for (auto& [_, r] : rows) {
    if (r.ok > 0) {
      r.final_loss /= static_cast<double>(r.ok);
      r.best_loss /= static_cast<double>(r.ok);
    } else {
      r.final_loss = r.best_loss = std::numeric_limits<double>::infinity();
    }
    if (r.reached > 0) r.ett /= static_cast<double>(r.reached);
    sorted.push_back(r);
  }
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Row& a, const Row& b) { return a.final_loss < b.final_loss; });
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-4s %-20s %14s %14s %10s %8s\n", "rank", "activation",
                "final_val_loss", "best_val_loss", "mean_ett", "reached");
  os << line;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const Row& r = sorted[i];
    char ett[32];
    if (r.reached > 0) {
      std::snprintf(ett, sizeof ett, "%.1f", r.ett);
    } else {
      std::snprintf(ett, sizeof ett, "-");
    }
    std::snprintf(line, sizeof line, "%-4zu %-20s %14.6f %14.6f %10s %4zu/%-3zu\n", i + 1,
                  r.name.c_str(), r.final_loss, r.best_loss, ett, r.reached, r.ok + r.failed);
    os << line;
  }
  return os.str();
}

}  // namespace ashlab::harness
