// SPDX-License-Identifier: Apache-2.0
//
// Experiment harness: declarative configs, built-in figure presets,
// deterministic Monte-Carlo execution and CSV/metadata persistence.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "irsbf/channel.hpp"

namespace irsbf {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kPresetVersion = "1";

// Scenario family; selects which solvers are meaningful and what a record's
// primary metric is (power or rate).
enum class ScenarioKind { SingleUserPower, RelayRate, MultiUserPower, MaxMinRate };

// All scenario knobs. Rician factors are stored in dB; +inf selects the pure
// LoS channel and -inf pure Rayleigh.
struct ScenarioParams {
  std::string scenario = "custom";
  ScenarioKind kind = ScenarioKind::SingleUserPower;

  // Geometry. The IRS panel is 5 x N/5 when N divides by 5, else a 1 x N row.
  int m = 4;
  int n = 30;
  double d0 = 51.0;   // AP-IRS distance, m
  double d = 50.0;    // AP-user horizontal distance (line placement), m
  double d_v = 2.0;   // lateral offset of the user line, m
  std::string placement = "line";  // line | circles | two-disk
  std::vector<int> active_users;   // circles placement, ids 1..8
  double disk_radius_ap = 60.0;    // two-disk placement
  double disk_radius_irs = 6.0;
  int users_near_ap = 8;
  int users_near_irs = 8;

  // Channel statistics.
  PathLossParams path;
  double beta_ap_irs_db = -std::numeric_limits<double>::infinity();
  double beta_irs_user_db = -std::numeric_limits<double>::infinity();
  double beta_ap_user_db = -std::numeric_limits<double>::infinity();
  double noise_dbm = -80.0;
  double relay_noise_dbm = -80.0;
  bool ignore_direct = false;  // zero the AP-user link (relay comparison)

  // Targets and budgets.
  double gamma_db = 10.0;   // per-user SINR target
  double power_dbm = 15.0;  // AP budget (rate scenarios) / total budget (relay)
  double rho = 0.0;         // delay ratio

  // Solver knobs.
  double epsilon = 1e-4;
  int randomization = 1000;
  int max_iterations = 30;
  int grid_points = 19;         // relay power-split search
  double rate_tolerance = 1e-3; // max-min rate bisection, bps/Hz
  bool record_timing = false;   // off by default to keep outputs byte-stable
};

struct ExperimentConfig {
  ScenarioParams params;
  std::string sweep_name;            // d | n | gamma_db | beta_ap_irs_db | power_dbm | rho
  std::vector<double> sweep_values;
  std::vector<std::string> solvers;
  int trials = 300;
  std::uint64_t seed = 1;

  void validate() const;
};

struct ResultRecord {
  std::string scenario;
  std::string sweep_name;
  double sweep_value = 0.0;
  int trial = 0;
  std::uint64_t stream = 0;  // RNG stream id of the trial
  std::string solver;
  std::string status = "ok";  // ok | infeasible | max-iterations | error
  double total_power_w = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> sinr_db;
  int iterations = 0;
  double wall_ms = std::numeric_limits<double>::quiet_NaN();
  // Auxiliary metrics; empty / NaN when not applicable.
  std::vector<double> rho_k;
  double rate = std::numeric_limits<double>::quiet_NaN();       // bps/Hz
  double rate_phase1 = std::numeric_limits<double>::quiet_NaN();
  double rate_phase2 = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> sig_combined_db;   // noise-normalized powers, dB
  std::vector<double> sig_direct_db;
  std::vector<double> intf_combined_db;
  std::vector<double> intf_direct_db;
  std::vector<double> power_trace_dbm;
};

// Plain-text sectioned key-value config ([experiment], [geometry], [channel],
// [solver]); '#' starts a comment. Throws std::invalid_argument on unknown
// keys or malformed values.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);
void write_config(std::ostream& out, const ExperimentConfig& config);

std::vector<std::string> figure_ids();
// Built-in preset for fig3, fig5a/b/c, fig6, fig7, ..., fig12; throws
// std::invalid_argument for unknown ids.
ExperimentConfig figure_preset(const std::string& id);

// Runs every (sweep value, trial, solver) cell. Deterministic for a fixed
// (config, seed) regardless of thread count; solver failures are recorded in
// the per-record status and never abort the sweep. Records are returned
// sorted by (sweep value, trial, solver).
std::vector<ResultRecord> run_experiment(const ExperimentConfig& config, int threads = 1);

struct SummaryRow {
  double sweep_value = 0.0;
  std::string solver;
  int count = 0;      // records entering the aggregates
  int excluded = 0;   // infeasible / failed records
  double mean_power_dbm = std::numeric_limits<double>::quiet_NaN();
  double std_power_db = std::numeric_limits<double>::quiet_NaN();
  double mean_rate = std::numeric_limits<double>::quiet_NaN();
  double std_rate = std::numeric_limits<double>::quiet_NaN();
};

// Aggregates per (sweep value, solver). Power means are computed on linear
// watts and then converted to dBm; deviations are taken over per-record dB
// values.
std::vector<SummaryRow> summarize(const std::vector<ResultRecord>& records);

// UTF-8 CSV, RFC-4180 quoting, fixed column set, 9 significant digits.
void write_records_csv(std::ostream& out, const std::vector<ResultRecord>& records);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_metadata(std::ostream& out, const ExperimentConfig& config);

}  // namespace irsbf
