// Copyright 2026 The jointrl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: train, test, benchmark and table.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "jointrl/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace jointrl;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return json::parse(in);
}

std::vector<std::uint64_t> seeds_for(const ExperimentConfig& cfg,
                                     const std::optional<std::uint64_t>& seed) {
  if (seed) return {*seed};
  return cfg.seeds;
}

fs::path seed_dir(const fs::path& out, std::uint64_t seed, std::size_t count) {
  return count == 1 ? out : out / ("seed_" + std::to_string(seed));
}

ExperimentConfig config_with(const std::string& path, const std::string& scheme) {
  ExperimentConfig cfg = load_config(path);
  if (!scheme.empty()) cfg.scheme = parse_scheme(scheme);
  return cfg;
}

int cmd_train(const std::string& config, std::optional<std::uint64_t> seed, const fs::path& out,
              const std::string& scheme, const std::string& resume) {
  const ExperimentConfig cfg = config_with(config, scheme);
  const auto seeds = seeds_for(cfg, seed);
  for (std::uint64_t s : seeds) {
    std::unique_ptr<Learner> start;
    if (!resume.empty()) start = learner_from_json(read_json(resume).at("learner"));
    TrainingResult res = run_training(cfg, s, std::move(start));
    const fs::path dir = seed_dir(out, s, seeds.size());
    write_training_curve(dir / "training_curve.csv", res.record.training, cfg.ma_window);
    json ckpt{{"config", config_to_json(cfg)}, {"seed", s}, {"learner", res.learner->to_json()}};
    write_text_atomic(dir / "checkpoint.json", ckpt.dump());
    json rec = record_to_json(res.record);
    rec["config"] = config_to_json(cfg);
    write_text_atomic(dir / "run_record.json", rec.dump(1));
    std::cout << "seed " << s << ": " << res.record.environment_steps << " steps in "
              << res.record.wall_clock_s << " s -> " << dir.string() << '\n';
  }
  return 0;
}

void write_test_outputs(const fs::path& dir, const ExperimentConfig& cfg, const RunRecord& rec,
                        const std::vector<DumpRow>& dump) {
  emit_table(dir / "test_table.csv", rec.test_rows);
  json j = record_to_json(rec);
  j["config"] = config_to_json(cfg);
  write_text_atomic(dir / "run_record.json", j.dump(1));
  if (cfg.metrics_dump) write_metrics_dump(dir / "metrics_dump.csv", dump);
  for (const auto& row : rec.test_rows) {
    std::cout << row.scheme << ": " << row.sum_rate_per_link << " bps/Hz per link\n";
  }
}

int cmd_test(const std::string& config, std::optional<std::uint64_t> seed, const fs::path& out,
             const std::string& scheme, const std::string& checkpoint) {
  const ExperimentConfig cfg = config_with(config, scheme);
  const auto seeds = seeds_for(cfg, seed);
  for (std::uint64_t s : seeds) {
    std::vector<DumpRow> dump;
    TestOptions opts;
    if (cfg.metrics_dump) opts.dump = &dump;
    RunRecord rec;
    if (is_learner(cfg.scheme)) {
      if (checkpoint.empty()) throw std::invalid_argument("--checkpoint is required for learners");
      auto learner = learner_from_json(read_json(checkpoint).at("learner"));
      rec = run_test(cfg, s, *learner, opts);
    } else {
      rec = run_benchmark(cfg, s, {cfg.scheme}, opts);
    }
    write_test_outputs(seed_dir(out, s, seeds.size()), cfg, rec, dump);
  }
  return 0;
}

int cmd_benchmark(const std::string& config, std::optional<std::uint64_t> seed,
                  const fs::path& out, const std::vector<std::string>& schemes) {
  const ExperimentConfig cfg = load_config(config);
  std::vector<Scheme> list;
  for (const auto& name : schemes) list.push_back(parse_scheme(name));
  if (list.empty()) list = {Scheme::kIdealFp, Scheme::kDelayedFp, Scheme::kRandom};
  const auto seeds = seeds_for(cfg, seed);
  for (std::uint64_t s : seeds) {
    std::vector<DumpRow> dump;
    TestOptions opts;
    if (cfg.metrics_dump) opts.dump = &dump;
    const RunRecord rec = run_benchmark(cfg, s, list, opts);
    write_test_outputs(seed_dir(out, s, seeds.size()), cfg, rec, dump);
  }
  return 0;
}

int cmd_table(const fs::path& out, const std::vector<std::string>& records) {
  std::vector<TestRow> rows;
  for (const auto& path : records) {
    const RunRecord rec = record_from_json(read_json(path));
    rows.insert(rows.end(), rec.test_rows.begin(), rec.test_rows.end());
  }
  emit_table(out, rows);
  std::cout << table_csv(rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint subband and power allocation with hierarchical deep RL"};
  app.require_subcommand(1);

  std::string config, scheme, checkpoint, resume;
  std::optional<std::uint64_t> seed;
  std::string out = "out";

  auto* train = app.add_subcommand("train", "Train a learner and write curves and a checkpoint");
  auto* test = app.add_subcommand("test", "Evaluate one scheme on test deployments");
  auto* bench = app.add_subcommand("benchmark", "Evaluate the FP and random baselines");
  for (auto* sub : {train, test, bench}) {
    sub->add_option("--config", config, "Experiment config (JSON)")->required()->check(
        CLI::ExistingFile);
    sub->add_option("--seed", seed, "Master seed; overrides the config seed list");
    sub->add_option("--out", out, "Output directory");
  }
  train->add_option("--scheme", scheme, "proposed or joint");
  train->add_option("--resume", resume, "Continue from a checkpoint")->check(CLI::ExistingFile);
  test->add_option("--scheme", scheme, "proposed, joint, ideal_fp, delayed_fp or random");
  test->add_option("--checkpoint", checkpoint, "Trained learner")->check(CLI::ExistingFile);
  std::vector<std::string> schemes;
  bench->add_option("--scheme", schemes, "Schemes to evaluate (repeatable)");

  auto* table = app.add_subcommand("table", "Merge run records into one test table");
  std::string table_out = "test_table.csv";
  std::vector<std::string> records;
  table->add_option("--out", table_out, "Output CSV");
  table->add_option("records", records, "run_record.json files")->required()->check(
      CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return cmd_train(config, seed, out, scheme, resume);
    if (*test) return cmd_test(config, seed, out, scheme, checkpoint);
    if (*bench) return cmd_benchmark(config, seed, out, schemes);
    if (*table) return cmd_table(table_out, records);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
