// SPDX-License-Identifier: Apache-2.0
//
// irsbf: experiment CLI. Subcommands: run, figure, list-figures.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "irsbf/harness.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int execute(const irsbf::ExperimentConfig& config, const std::string& out_dir, int threads) {
  namespace fs = std::filesystem;
  try {
    const auto records = irsbf::run_experiment(config, threads);
    const auto summary = irsbf::summarize(records);
    fs::create_directories(out_dir);
    {
      std::ofstream out(fs::path(out_dir) / "records.csv", std::ios::binary);
      irsbf::write_records_csv(out, records);
    }
    {
      std::ofstream out(fs::path(out_dir) / "summary.csv", std::ios::binary);
      irsbf::write_summary_csv(out, summary);
    }
    {
      std::ofstream out(fs::path(out_dir) / "metadata.txt", std::ios::binary);
      irsbf::write_metadata(out, config);
    }
    std::cout << "wrote " << records.size() << " records to " << out_dir << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IRS joint active/passive beamforming experiment runner"};
  app.set_version_flag("--version", std::string("irsbf ") + irsbf::kVersion + " (presets " +
                                        irsbf::kPresetVersion + ")");
  app.require_subcommand(0, 1);

  std::string config_path, out_dir = "results", figure_id;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  int trials = 0;

  CLI::App* run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("--config", config_path, "Path to the experiment config")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed", seed, "Master seed override")->each([&](const std::string&) {
    seed_set = true;
  });
  run->add_option("--threads", threads, "Worker thread count");

  CLI::App* figure = app.add_subcommand("figure", "Run a built-in figure preset");
  figure->add_option("id", figure_id, "Figure id (see list-figures)")->required();
  figure->add_option("--out", out_dir, "Output directory");
  figure->add_option("--trials", trials, "Trial count override");
  figure->add_option("--seed", seed, "Master seed override")->each([&](const std::string&) {
    seed_set = true;
  });
  figure->add_option("--threads", threads, "Worker thread count");

  CLI::App* list = app.add_subcommand("list-figures", "List built-in figure presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (list->parsed()) {
    for (const auto& id : irsbf::figure_ids()) std::cout << id << "\n";
    return 0;
  }
  if (run->parsed()) {
    irsbf::ExperimentConfig config;
    try {
      config = irsbf::parse_config_file(config_path);
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitConfig;
    }
    if (seed_set) config.seed = seed;
    return execute(config, out_dir, threads);
  }
  if (figure->parsed()) {
    irsbf::ExperimentConfig config;
    try {
      config = irsbf::figure_preset(figure_id);
      if (trials > 0) config.trials = trials;
      if (seed_set) config.seed = seed;
      config.validate();
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      std::cerr << "valid figure ids:";
      for (const auto& id : irsbf::figure_ids()) std::cerr << ' ' << id;
      std::cerr << "\n";
      return kExitConfig;
    }
    if (out_dir == "results") out_dir = "results/" + figure_id;
    return execute(config, out_dir, threads);
  }
  std::cerr << app.help();
  return kExitUsage;
}
