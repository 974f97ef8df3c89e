// weakal command-line front end: run experiments, sweep weak-annotation
// costs, validate configs, and generate synthetic datasets.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "weakal/chart.hpp"
#include "weakal/config.hpp"
#include "weakal/errors.hpp"
#include "weakal/harness.hpp"

namespace fs = std::filesystem;
using namespace weakal;

namespace {

constexpr const char* kVersion = "0.1.0";

void write_manifest(const ExperimentConfig& cfg, const std::vector<std::string>& overrides,
                    const fs::path& out_dir, const std::vector<std::string>& outputs) {
  nlohmann::json j;
  char hash_buf[32];
  std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  j["config_hash"] = hash_buf;
  j["artifact_version"] = kVersion;
  j["seeds"] = cfg.seeds;
  j["overrides"] = overrides;
  j["outputs"] = outputs;
  const auto now = std::chrono::system_clock::now();
  j["timestamp_unix"] =
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
  std::ofstream out(out_dir / "manifest.json");
  out << j.dump(2) << "\n";
}

void write_allocation_audits(const ExperimentResult& result, const fs::path& out_dir) {
  const fs::path dir = out_dir / "allocations";
  fs::create_directories(dir);
  for (const auto& rep : result.replicates) {
    for (const auto& round : rep.rounds) {
      char name[128];
      std::snprintf(name, sizeof(name), "%s_seed%llu_round%d.jsonl",
                    method_name(rep.method).c_str(),
                    static_cast<unsigned long long>(rep.seed), round.round);
      write_plan_jsonl(round.plan, (dir / name).string());
    }
  }
}

int cmd_run(const std::string& config_path, const std::string& out_dir_arg,
            const std::vector<std::string>& overrides) {
  ExperimentConfig cfg = parse_config(config_path);
  for (const auto& o : overrides) apply_override(cfg, o);

  const fs::path out_dir = out_dir_arg;
  fs::create_directories(out_dir);

  const ExperimentResult result = run_experiment(cfg);
  write_metrics_csv(result, (out_dir / "metrics.csv").string());
  write_aggregate_csv(result, (out_dir / "aggregate.csv").string());
  write_ratios_csv(label_ratio_series(result), (out_dir / "ratios.csv").string());
  render_chart(result.aggregate, (out_dir / "chart.svg").string());
  write_allocation_audits(result, out_dir);
  write_manifest(cfg, overrides, out_dir,
                 {"metrics.csv", "aggregate.csv", "ratios.csv", "chart.svg", "allocations/"});
  std::cout << "wrote " << (out_dir / "metrics.csv").string() << "\n";
  for (const auto& row : result.aggregate) {
    std::printf("%-16s round %d  acc %.4f +/- %.4f\n", method_name(row.method).c_str(),
                row.round, row.mean_accuracy, row.std_accuracy);
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir_arg,
              const std::string& values_arg, const std::vector<std::string>& overrides) {
  ExperimentConfig cfg = parse_config(config_path);
  for (const auto& o : overrides) apply_override(cfg, o);

  std::vector<Rational> values;
  std::stringstream ss(values_arg);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(Rational::parse(item));

  const fs::path out_dir = out_dir_arg;
  fs::create_directories(out_dir);
  const auto sweep = sweep_weak_cost(cfg, values);

  std::ofstream summary(out_dir / "sweep.csv");
  summary << "c_weak,method,round,mean_acc,std_acc\n";
  char buf1[64], buf2[64];
  for (const auto& [c_weak, result] : sweep) {
    const std::string tag = std::to_string(c_weak.num()) + "_" + std::to_string(c_weak.den());
    const fs::path sub = out_dir / ("cw_" + tag);
    fs::create_directories(sub);
    write_metrics_csv(result, (sub / "metrics.csv").string());
    write_aggregate_csv(result, (sub / "aggregate.csv").string());
    for (const auto& row : result.aggregate) {
      std::snprintf(buf1, sizeof(buf1), "%.17g", row.mean_accuracy);
      std::snprintf(buf2, sizeof(buf2), "%.17g", row.std_accuracy);
      summary << c_weak.str() << "," << method_name(row.method) << "," << row.round
              << "," << buf1 << "," << buf2 << "\n";
    }
  }
  std::cout << "wrote " << (out_dir / "sweep.csv").string() << "\n";
  return 0;
}

int cmd_validate(const std::string& config_path) {
  const ExperimentConfig cfg = parse_config(config_path);
  char hash_buf[32];
  std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  std::cout << "ok config_hash=" << hash_buf << "\n";
  return 0;
}

int cmd_gen_data(const std::string& config_path, const std::string& out_file,
                 const std::string& labels_file) {
  const ExperimentConfig cfg = parse_config(config_path);
  auto [ds, space] = synth_generate(cfg.synth);
  save_features(ds, space, out_file);
  std::string labels = labels_file;
  if (labels.empty()) labels = out_file + ".labels.json";
  space.save_json(labels);
  std::cout << "wrote " << out_file << " (" << ds.size() << " instances) and "
            << labels << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"budgeted active learning with a simulated weak annotator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", values, labels_file;
  std::vector<std::string> overrides;

  auto* run = app.add_subcommand("run", "run the configured experiment");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--override", overrides, "section.key=value overrides");

  auto* sweep = app.add_subcommand("sweep-cost", "re-run per weak-cost value");
  sweep->add_option("config", config_path, "experiment config file")->required();
  sweep->add_option("--values", values, "comma list of rational costs")->required();
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--override", overrides, "section.key=value overrides");

  auto* validate = app.add_subcommand("validate", "parse and validate a config");
  validate->add_option("config", config_path, "experiment config file")->required();

  std::string gen_out;
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic feature CSV");
  gen->add_option("config", config_path, "config file with a [synth] section")->required();
  gen->add_option("--out", gen_out, "feature CSV output path")->required();
  gen->add_option("--labels", labels_file, "label-space JSON output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, overrides);
    if (sweep->parsed()) return cmd_sweep(config_path, out_dir, values, overrides);
    if (validate->parsed()) return cmd_validate(config_path);
    if (gen->parsed()) return cmd_gen_data(config_path, gen_out, labels_file);
  } catch (const ConfigError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: runtime: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
