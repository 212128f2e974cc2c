// SPDX-License-Identifier: Apache-2.0
#include "irsbf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "irsbf/multi_user.hpp"
#include "irsbf/relay.hpp"
#include "irsbf/single_user.hpp"

namespace irsbf {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

double beta_linear(double beta_db) {
  if (std::isinf(beta_db)) return beta_db > 0 ? kRicianInf : 0.0;
  return db_to_linear(beta_db);
}

RicianParams rician_from(const ScenarioParams& p) {
  RicianParams r;
  r.beta_ap_irs = beta_linear(p.beta_ap_irs_db);
  r.beta_irs_user = beta_linear(p.beta_irs_user_db);
  r.beta_ap_user = beta_linear(p.beta_ap_user_db);
  return r;
}

void set_panel(Geometry& geom, int n) {
  if (n >= 5 && n % 5 == 0) {
    geom.irs_nx = 5;
    geom.irs_nz = n / 5;
  } else {
    geom.irs_nx = n;
    geom.irs_nz = 1;
  }
}

// Fixed eight-user layout: odd ids on a circle of radius 20 m around the AP,
// even ids on a half circle of radius 3 m on the AP side of the IRS.
Point3 circle_user_position(int id, double d0) {
  const double deg = M_PI / 180.0;
  if (id % 2 == 1) {
    const double phi = (45.0 + 90.0 * ((id - 1) / 2)) * deg;
    return {20.0 * std::cos(phi), 20.0 * std::sin(phi), 0.0};
  }
  const double phi = (22.5 + 45.0 * ((id - 2) / 2)) * deg;
  return {3.0 * std::cos(phi), d0 - 3.0 * std::sin(phi), 0.0};
}

Point3 disk_sample(const Point3& center, double radius, RngStream& rng) {
  const double r = radius * std::sqrt(rng.uniform());
  const double phi = rng.uniform(0.0, 2.0 * M_PI);
  return center + Point3(r * std::cos(phi), r * std::sin(phi), 0.0);
}

Geometry build_geometry(const ScenarioParams& p, RngStream& placement_rng) {
  Geometry geom;
  geom.ap_position = Point3::Zero();
  geom.irs_position = Point3(0.0, p.d0, 0.0);
  geom.num_ap_antennas = p.m;
  set_panel(geom, p.n);
  if (p.placement == "line") {
    geom.user_positions = {Point3(p.d_v, p.d, 0.0)};
  } else if (p.placement == "circles") {
    if (p.active_users.empty()) throw std::invalid_argument("config: no active users");
    for (const int id : p.active_users) {
      if (id < 1 || id > 8) throw std::invalid_argument("config: user ids must be in 1..8");
      geom.user_positions.push_back(circle_user_position(id, p.d0));
    }
  } else if (p.placement == "two-disk") {
    auto draw = [&](const Point3& center, double radius) {
      Point3 pos;
      do {
        pos = disk_sample(center, radius, placement_rng);
      } while ((pos - geom.ap_position).norm() < 1.0 || (pos - geom.irs_position).norm() < 1.0);
      return pos;
    };
    for (int i = 0; i < p.users_near_ap; ++i) {
      geom.user_positions.push_back(draw(geom.ap_position, p.disk_radius_ap));
    }
    for (int i = 0; i < p.users_near_irs; ++i) {
      geom.user_positions.push_back(draw(geom.irs_position, p.disk_radius_irs));
    }
  } else {
    throw std::invalid_argument("config: unknown placement '" + p.placement + "'");
  }
  return geom;
}

ChannelSet sample_scenario_channel(const ScenarioParams& p, const Geometry& geom,
                                   RngStream& rng) {
  const std::vector<double> noise(geom.num_users(), dbm_to_watt(p.noise_dbm));
  ChannelSet ch = sample_channel(geom, p.path, rician_from(p), noise, rng);
  if (p.ignore_direct) {
    for (auto& hd : ch.h_d) hd.setZero();
  }
  return ch;
}

void apply_sweep(ScenarioParams& p, const std::string& name, double value) {
  if (name == "d") {
    p.d = value;
  } else if (name == "n") {
    p.n = static_cast<int>(std::lround(value));
  } else if (name == "gamma_db") {
    p.gamma_db = value;
  } else if (name == "beta_ap_irs_db") {
    p.beta_ap_irs_db = value;
  } else if (name == "power_dbm") {
    p.power_dbm = value;
  } else if (name == "rho") {
    p.rho = value;
  } else if (name == "d0") {
    p.d0 = value;
  } else {
    throw std::invalid_argument("config: unknown sweep variable '" + name + "'");
  }
}

const std::vector<std::string>& solver_registry(ScenarioKind kind) {
  static const std::vector<std::string> single = {"lower-bound",  "sdr",        "alternating",
                                                  "ap-user-mrt",  "ap-irs-mrt", "random-phase",
                                                  "no-irs"};
  static const std::vector<std::string> relay = {"irs", "fd-relay", "hd-relay"};
  static const std::vector<std::string> multi = {"alternating", "alternating-feasibility",
                                                 "two-stage",   "random-phase-mmse",
                                                 "mmse-no-irs", "zf-no-irs"};
  static const std::vector<std::string> rate = {"irs"};  // plus no-irs-m<digits>
  switch (kind) {
    case ScenarioKind::SingleUserPower: return single;
    case ScenarioKind::RelayRate: return relay;
    case ScenarioKind::MultiUserPower: return multi;
    case ScenarioKind::MaxMinRate: return rate;
  }
  throw std::invalid_argument("config: unknown scenario kind");
}

bool parse_no_irs_m(const std::string& solver, int* m_out) {
  if (solver.rfind("no-irs-m", 0) != 0) return false;
  const std::string digits = solver.substr(8);
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) return false;
  *m_out = std::stoi(digits);
  return *m_out >= 1;
}

bool solver_known(ScenarioKind kind, const std::string& name) {
  const auto& reg = solver_registry(kind);
  if (std::find(reg.begin(), reg.end(), name) != reg.end()) return true;
  int m = 0;
  return kind == ScenarioKind::MaxMinRate && parse_no_irs_m(name, &m);
}

std::vector<double> to_db(const RVector& linear) {
  std::vector<double> out(linear.size());
  for (Eigen::Index i = 0; i < linear.size(); ++i) out[i] = linear_to_db(linear[i]);
  return out;
}

std::vector<double> trace_dbm(const std::vector<double>& watts) {
  std::vector<double> out(watts.size());
  for (size_t i = 0; i < watts.size(); ++i) out[i] = watt_to_dbm(watts[i]);
  return out;
}

// Per-user signal/interference decomposition (noise-normalized, dB).
void fill_decomposition(ResultRecord& rec, const ChannelSet& ch, const PhaseConfig& phases,
                        const std::vector<CVector>& w) {
  const int k_users = ch.num_users();
  for (int k = 0; k < k_users; ++k) {
    const CVector h = combined_channel(ch, phases, k);
    const CVector& hd = ch.h_d.at(k);
    const double noise = ch.noise_power.at(k);
    double ic = 0.0, id = 0.0;
    for (int j = 0; j < k_users; ++j) {
      if (j == k) continue;
      ic += std::norm(h.dot(w[j]));
      id += std::norm(hd.dot(w[j]));
    }
    rec.sig_combined_db.push_back(linear_to_db(std::norm(h.dot(w[k])) / noise));
    rec.sig_direct_db.push_back(linear_to_db(std::norm(hd.dot(w[k])) / noise));
    rec.intf_combined_db.push_back(linear_to_db(ic / noise));
    rec.intf_direct_db.push_back(linear_to_db(id / noise));
    rec.rho_k.push_back(effective_angle(w[k], hd));
  }
}

// ---- per-kind solver dispatch -------------------------------------------

void run_single_user(const ScenarioParams& p, const ChannelSet& ch, const std::string& solver,
                     RngStream& rng, ResultRecord& rec) {
  const double gamma = db_to_linear(p.gamma_db);
  if (solver == "sdr") {
    const SingleUserSolution s = solve_p2_sdr(ch, gamma, p.randomization, rng);
    rec.total_power_w = s.power;
    rec.iterations = s.iterations;
  } else if (solver == "lower-bound") {
    const SingleUserSolution s = solve_p2_sdr(ch, gamma, 1, rng);
    rec.total_power_w = s.lower_bound;
    rec.iterations = s.iterations;
  } else if (solver == "alternating") {
    std::vector<double> trace;
    const SingleUserSolution s =
        solve_p2_alternating(ch, gamma, p.epsilon, std::max(p.max_iterations, 100), &trace);
    rec.total_power_w = s.power;
    rec.iterations = s.iterations;
    rec.power_trace_dbm = trace_dbm(trace);
  } else if (solver == "ap-user-mrt") {
    rec.total_power_w = solve_ap_user_mrt(ch, gamma).power;
  } else if (solver == "ap-irs-mrt") {
    rec.total_power_w = solve_ap_irs_mrt(ch, gamma).power;
  } else if (solver == "random-phase") {
    rec.total_power_w = solve_random_phase(ch, gamma, rng).power;
  } else if (solver == "no-irs") {
    rec.total_power_w = solve_no_irs(ch, gamma).power;
  } else {
    throw std::invalid_argument("unknown solver '" + solver + "'");
  }
}

void run_relay(const ScenarioParams& p, const ChannelSet& ch, const std::string& solver,
               ResultRecord& rec) {
  const double p_total = dbm_to_watt(p.power_dbm);
  const double noise = dbm_to_watt(p.noise_dbm);
  if (solver == "irs") {
    // Optimal passive beamforming with M = 1: coherent magnitude sum.
    double mag = 0.0;
    for (int i = 0; i < ch.num_irs_elements(); ++i) {
      mag += std::abs(ch.h_r.at(0)[i]) * std::abs(ch.g(i, 0));
    }
    const double snr = p_total * mag * mag / noise;
    rec.total_power_w = p_total;
    rec.rate = std::log2(1.0 + snr);
    return;
  }
  const Duplex duplex = solver == "fd-relay" ? Duplex::FD : Duplex::HD;
  if (solver != "fd-relay" && solver != "hd-relay") {
    throw std::invalid_argument("unknown solver '" + solver + "'");
  }
  const std::vector<std::pair<CVector, CVector>> draw = {{ch.g.col(0), ch.h_r.at(0)}};
  const PowerSplitResult split = optimal_power_split(p_total, draw, p.grid_points, noise,
                                                     dbm_to_watt(p.relay_noise_dbm), duplex);
  rec.total_power_w = p_total;
  rec.rate = split.mean_rate;
}

void run_multi_user(const ScenarioParams& p, const ChannelSet& ch, const std::string& solver,
                    RngStream& rng, ResultRecord& rec) {
  const int k_users = ch.num_users();
  const RVector gamma = RVector::Constant(k_users, db_to_linear(p.gamma_db));
  Algorithm1Options opts;
  opts.epsilon = p.epsilon;
  opts.max_iterations = p.max_iterations;
  opts.randomization_count = p.randomization;

  auto finish = [&](const MultiUserSolution& sol) {
    rec.total_power_w = sol.total_power;
    rec.sinr_db = to_db(sol.sinr);
    rec.iterations = sol.iterations;
    rec.power_trace_dbm = trace_dbm(sol.power_trace);
    if (sol.status == MultiUserStatus::MaxIterations) rec.status = "max-iterations";
    if (sol.status == MultiUserStatus::P4Infeasible) rec.status = "p4-stalled";
    fill_decomposition(rec, ch, sol.phases, sol.precoder.w);
  };

  if (solver == "alternating" || solver == "alternating-feasibility") {
    opts.p4_mode = solver == "alternating" ? P4Mode::Residual : P4Mode::Feasibility;
    const MultiUserSolution init = two_stage(ch, gamma, p.randomization, rng);
    finish(algorithm1(ch, gamma, init.phases, opts, rng));
  } else if (solver == "two-stage") {
    finish(two_stage(ch, gamma, p.randomization, rng));
  } else if (solver == "random-phase-mmse") {
    RVector theta(ch.num_irs_elements());
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(0.0, 2.0 * M_PI);
    const PhaseConfig phases{theta};
    std::vector<CVector> h(k_users);
    for (int k = 0; k < k_users; ++k) h[k] = combined_channel(ch, phases, k);
    const Precoder w = solve_p3(h, gamma, ch.noise_power);
    rec.total_power_w = w.total_power();
    rec.sinr_db = to_db(sinr(ch, phases, w.w));
    fill_decomposition(rec, ch, phases, w.w);
  } else if (solver == "mmse-no-irs") {
    const Precoder w = solve_p3(ch.h_d, gamma, ch.noise_power);
    rec.total_power_w = w.total_power();
    RVector s(k_users);
    for (int k = 0; k < k_users; ++k) {
      double intf = 0.0;
      for (int j = 0; j < k_users; ++j) {
        if (j != k) intf += std::norm(ch.h_d.at(k).dot(w.w[j]));
      }
      s[k] = std::norm(ch.h_d.at(k).dot(w.w[k])) / (intf + ch.noise_power.at(k));
    }
    rec.sinr_db = to_db(s);
    for (int k = 0; k < k_users; ++k) rec.rho_k.push_back(effective_angle(w.w[k], ch.h_d.at(k)));
  } else if (solver == "zf-no-irs") {
    CMatrix hd(ch.num_ap_antennas(), k_users);
    for (int k = 0; k < k_users; ++k) hd.col(k) = ch.h_d.at(k);
    rec.total_power_w = zf_power(hd, gamma, ch.noise_power);
  } else {
    throw std::invalid_argument("unknown solver '" + solver + "'");
  }
}

// Strips the IRS from a sampled channel set (direct links only).
ChannelSet strip_irs(ChannelSet ch) {
  ch.g = CMatrix::Zero(0, ch.num_ap_antennas());
  for (auto& hr : ch.h_r) hr = CVector(0);
  return ch;
}

// Computes (rate_phase1, rate_phase2); the rho mix is applied by the caller.
void run_max_min(const ScenarioParams& p, const Geometry& base_geom, const std::string& solver,
                 RngStream& trial_rng, ResultRecord& rec) {
  MaxMinRateOptions opts;
  opts.rate_tolerance = p.rate_tolerance;
  opts.alg1.epsilon = p.epsilon;
  opts.alg1.max_iterations = p.max_iterations;
  opts.alg1.randomization_count = p.randomization;
  const double budget = dbm_to_watt(p.power_dbm);
  RngStream channel_rng = trial_rng.derive(fnv1a(solver) ^ fnv1a("channel"));
  RngStream solver_rng = trial_rng.derive(fnv1a(solver) ^ fnv1a("solver"));

  int m_only = 0;
  if (solver == "irs") {
    const ChannelSet ch = sample_scenario_channel(p, base_geom, channel_rng);
    const MaxMinRateResult r = max_min_rate(ch, budget, p.rho, opts, solver_rng);
    rec.rate = r.rate;
    rec.rate_phase1 = r.rate_phase1;
    rec.rate_phase2 = r.rate_phase2;
  } else if (parse_no_irs_m(solver, &m_only)) {
    Geometry geom = base_geom;
    geom.num_ap_antennas = m_only;
    const ChannelSet ch = strip_irs(sample_scenario_channel(p, geom, channel_rng));
    const MaxMinRateResult r = max_min_rate(ch, budget, p.rho, opts, solver_rng);
    rec.rate = r.rate;
    rec.rate_phase1 = r.rate_phase1;
    rec.rate_phase2 = r.rate_phase2;
  } else {
    throw std::invalid_argument("unknown solver '" + solver + "'");
  }
}

struct Task {
  int sweep_index = 0;
  int trial = 0;
};

std::vector<ResultRecord> run_task(const ExperimentConfig& config, const Task& task) {
  ScenarioParams p = config.params;
  const double sweep_value = config.sweep_values[task.sweep_index];
  apply_sweep(p, config.sweep_name, sweep_value);
  const bool rho_cached = p.kind == ScenarioKind::MaxMinRate && config.sweep_name == "rho";
  const std::uint64_t stream = rho_cached
                                   ? static_cast<std::uint64_t>(task.trial)
                                   : (static_cast<std::uint64_t>(task.sweep_index) << 32) |
                                         static_cast<std::uint64_t>(task.trial);
  RngStream trial_rng(config.seed, stream);
  RngStream placement_rng = trial_rng.derive(fnv1a("placement"));
  const Geometry geom = build_geometry(p, placement_rng);

  ChannelSet ch;
  if (p.kind != ScenarioKind::MaxMinRate) {
    RngStream channel_rng = trial_rng.derive(fnv1a("channel"));
    ch = sample_scenario_channel(p, geom, channel_rng);
  }

  std::vector<ResultRecord> out;
  for (const std::string& solver : config.solvers) {
    ResultRecord rec;
    rec.scenario = p.scenario;
    rec.sweep_name = config.sweep_name;
    rec.sweep_value = sweep_value;
    rec.trial = task.trial;
    rec.stream = stream;
    rec.solver = solver;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      RngStream solver_rng = trial_rng.derive(fnv1a(solver));
      switch (p.kind) {
        case ScenarioKind::SingleUserPower:
          run_single_user(p, ch, solver, solver_rng, rec);
          break;
        case ScenarioKind::RelayRate:
          run_relay(p, ch, solver, rec);
          break;
        case ScenarioKind::MultiUserPower:
          run_multi_user(p, ch, solver, solver_rng, rec);
          break;
        case ScenarioKind::MaxMinRate:
          run_max_min(p, geom, solver, trial_rng, rec);
          break;
      }
    } catch (const std::runtime_error&) {
      rec.status = "infeasible";
    } catch (const std::exception&) {
      rec.status = "error";
    }
    if (p.record_timing) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

// Expands the per-trial phase rates into one record per rho value.
std::vector<ResultRecord> expand_rho(const ExperimentConfig& config,
                                     const std::vector<ResultRecord>& per_trial) {
  std::vector<ResultRecord> out;
  for (const ResultRecord& base : per_trial) {
    for (const double rho : config.sweep_values) {
      ResultRecord rec = base;
      rec.sweep_value = rho;
      if (rec.status == "ok" || rec.status == "max-iterations") {
        rec.rate = rho * rec.rate_phase1 + (1.0 - rho) * rec.rate_phase2;
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string format_list(const std::vector<double>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += format_double(values[i]);
  }
  return out;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

// ---- config text format ---------------------------------------------------

std::string kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::SingleUserPower: return "single-user-power";
    case ScenarioKind::RelayRate: return "relay-rate";
    case ScenarioKind::MultiUserPower: return "multiuser-power";
    case ScenarioKind::MaxMinRate: return "max-min-rate";
  }
  return "?";
}

ScenarioKind kind_from(const std::string& s) {
  if (s == "single-user-power") return ScenarioKind::SingleUserPower;
  if (s == "relay-rate") return ScenarioKind::RelayRate;
  if (s == "multiuser-power") return ScenarioKind::MultiUserPower;
  if (s == "max-min-rate") return ScenarioKind::MaxMinRate;
  throw std::invalid_argument("config: unknown kind '" + s + "'");
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad numeric value '" + v + "' for " + key);
  }
}

long parse_int(const std::string& v, const std::string& key) {
  const double x = parse_double(v, key);
  if (x != std::floor(x)) throw std::invalid_argument("config: expected integer for " + key);
  return static_cast<long>(x);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (sweep_values.empty()) throw std::invalid_argument("config: sweep values must be non-empty");
  if (sweep_name.empty()) throw std::invalid_argument("config: sweep variable must be set");
  if (solvers.empty()) throw std::invalid_argument("config: at least one solver required");
  {
    ScenarioParams probe = params;
    apply_sweep(probe, sweep_name, sweep_values.front());  // rejects unknown names
  }
  for (const auto& s : solvers) {
    if (!solver_known(params.kind, s)) {
      throw std::invalid_argument("config: unknown solver '" + s + "' for kind " +
                                  kind_name(params.kind));
    }
  }
  if (params.m < 1 || params.n < 0) throw std::invalid_argument("config: bad geometry sizes");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  config.trials = 300;
  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("config: bad section header");
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected key = value at line " +
                                  std::to_string(line_no));
    }
    auto trim = [](std::string s) {
      const size_t b2 = s.find_first_not_of(" \t");
      const size_t e2 = s.find_last_not_of(" \t");
      return b2 == std::string::npos ? std::string() : s.substr(b2, e2 - b2 + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    ScenarioParams& p = config.params;
    const std::string qual = section + "." + key;
    if (qual == "experiment.scenario") {
      p.scenario = value;
    } else if (qual == "experiment.kind") {
      p.kind = kind_from(value);
    } else if (qual == "experiment.sweep") {
      config.sweep_name = value;
    } else if (qual == "experiment.sweep_values") {
      config.sweep_values.clear();
      for (const auto& tok : split_ws(value)) {
        config.sweep_values.push_back(parse_double(tok, key));
      }
    } else if (qual == "experiment.solvers") {
      config.solvers = split_ws(value);
    } else if (qual == "experiment.trials") {
      config.trials = static_cast<int>(parse_int(value, key));
    } else if (qual == "experiment.seed") {
      config.seed = static_cast<std::uint64_t>(parse_int(value, key));
    } else if (qual == "experiment.record_timing") {
      p.record_timing = parse_int(value, key) != 0;
    } else if (qual == "geometry.m") {
      p.m = static_cast<int>(parse_int(value, key));
    } else if (qual == "geometry.n") {
      p.n = static_cast<int>(parse_int(value, key));
    } else if (qual == "geometry.d0") {
      p.d0 = parse_double(value, key);
    } else if (qual == "geometry.d") {
      p.d = parse_double(value, key);
    } else if (qual == "geometry.d_v") {
      p.d_v = parse_double(value, key);
    } else if (qual == "geometry.placement") {
      p.placement = value;
    } else if (qual == "geometry.active_users") {
      p.active_users.clear();
      for (const auto& tok : split_ws(value)) {
        p.active_users.push_back(static_cast<int>(parse_int(tok, key)));
      }
    } else if (qual == "geometry.disk_radius_ap") {
      p.disk_radius_ap = parse_double(value, key);
    } else if (qual == "geometry.disk_radius_irs") {
      p.disk_radius_irs = parse_double(value, key);
    } else if (qual == "geometry.users_near_ap") {
      p.users_near_ap = static_cast<int>(parse_int(value, key));
    } else if (qual == "geometry.users_near_irs") {
      p.users_near_irs = static_cast<int>(parse_int(value, key));
    } else if (qual == "channel.c0_db") {
      p.path.c0 = db_to_linear(parse_double(value, key));
    } else if (qual == "channel.alpha_ap_irs") {
      p.path.alpha_ap_irs = parse_double(value, key);
    } else if (qual == "channel.alpha_irs_user") {
      p.path.alpha_irs_user = parse_double(value, key);
    } else if (qual == "channel.alpha_ap_user") {
      p.path.alpha_ap_user = parse_double(value, key);
    } else if (qual == "channel.beta_ap_irs_db") {
      p.beta_ap_irs_db = parse_double(value, key);
    } else if (qual == "channel.beta_irs_user_db") {
      p.beta_irs_user_db = parse_double(value, key);
    } else if (qual == "channel.beta_ap_user_db") {
      p.beta_ap_user_db = parse_double(value, key);
    } else if (qual == "channel.noise_dbm") {
      p.noise_dbm = parse_double(value, key);
    } else if (qual == "channel.relay_noise_dbm") {
      p.relay_noise_dbm = parse_double(value, key);
    } else if (qual == "channel.ignore_direct") {
      p.ignore_direct = parse_int(value, key) != 0;
    } else if (qual == "solver.gamma_db") {
      p.gamma_db = parse_double(value, key);
    } else if (qual == "solver.power_dbm") {
      p.power_dbm = parse_double(value, key);
    } else if (qual == "solver.rho") {
      p.rho = parse_double(value, key);
    } else if (qual == "solver.epsilon") {
      p.epsilon = parse_double(value, key);
    } else if (qual == "solver.randomization") {
      p.randomization = static_cast<int>(parse_int(value, key));
    } else if (qual == "solver.max_iterations") {
      p.max_iterations = static_cast<int>(parse_int(value, key));
    } else if (qual == "solver.grid_points") {
      p.grid_points = static_cast<int>(parse_int(value, key));
    } else if (qual == "solver.rate_tolerance") {
      p.rate_tolerance = parse_double(value, key);
    } else {
      throw std::invalid_argument("config: unknown key '" + qual + "'");
    }
  }
  config.validate();
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  return parse_config(in);
}

void write_config(std::ostream& out, const ExperimentConfig& config) {
  const ScenarioParams& p = config.params;
  out << "[experiment]\n";
  out << "scenario = " << p.scenario << "\n";
  out << "kind = " << kind_name(p.kind) << "\n";
  out << "sweep = " << config.sweep_name << "\n";
  out << "sweep_values =";
  for (const double v : config.sweep_values) out << ' ' << format_double(v);
  out << "\n";
  out << "solvers =";
  for (const auto& s : config.solvers) out << ' ' << s;
  out << "\n";
  out << "trials = " << config.trials << "\n";
  out << "seed = " << config.seed << "\n";
  out << "record_timing = " << (p.record_timing ? 1 : 0) << "\n\n";
  out << "[geometry]\n";
  out << "m = " << p.m << "\n";
  out << "n = " << p.n << "\n";
  out << "d0 = " << format_double(p.d0) << "\n";
  out << "d = " << format_double(p.d) << "\n";
  out << "d_v = " << format_double(p.d_v) << "\n";
  out << "placement = " << p.placement << "\n";
  if (!p.active_users.empty()) {
    out << "active_users =";
    for (const int id : p.active_users) out << ' ' << id;
    out << "\n";
  }
  if (p.placement == "two-disk") {
    out << "disk_radius_ap = " << format_double(p.disk_radius_ap) << "\n";
    out << "disk_radius_irs = " << format_double(p.disk_radius_irs) << "\n";
    out << "users_near_ap = " << p.users_near_ap << "\n";
    out << "users_near_irs = " << p.users_near_irs << "\n";
  }
  out << "\n[channel]\n";
  out << "c0_db = " << format_double(linear_to_db(p.path.c0)) << "\n";
  out << "alpha_ap_irs = " << format_double(p.path.alpha_ap_irs) << "\n";
  out << "alpha_irs_user = " << format_double(p.path.alpha_irs_user) << "\n";
  out << "alpha_ap_user = " << format_double(p.path.alpha_ap_user) << "\n";
  out << "beta_ap_irs_db = " << format_double(p.beta_ap_irs_db) << "\n";
  out << "beta_irs_user_db = " << format_double(p.beta_irs_user_db) << "\n";
  out << "beta_ap_user_db = " << format_double(p.beta_ap_user_db) << "\n";
  out << "noise_dbm = " << format_double(p.noise_dbm) << "\n";
  out << "relay_noise_dbm = " << format_double(p.relay_noise_dbm) << "\n";
  out << "ignore_direct = " << (p.ignore_direct ? 1 : 0) << "\n";
  out << "\n[solver]\n";
  out << "gamma_db = " << format_double(p.gamma_db) << "\n";
  out << "power_dbm = " << format_double(p.power_dbm) << "\n";
  out << "rho = " << format_double(p.rho) << "\n";
  out << "epsilon = " << format_double(p.epsilon) << "\n";
  out << "randomization = " << p.randomization << "\n";
  out << "max_iterations = " << p.max_iterations << "\n";
  out << "grid_points = " << p.grid_points << "\n";
  out << "rate_tolerance = " << format_double(p.rate_tolerance) << "\n";
}

std::vector<std::string> figure_ids() {
  return {"fig3",  "fig5a", "fig5b", "fig5c", "fig6",  "fig7",
          "fig8",  "fig9",  "fig10", "fig11", "fig12"};
}

ExperimentConfig figure_preset(const std::string& id) {
  ExperimentConfig c;
  ScenarioParams& p = c.params;
  p.scenario = id;

  auto single_user_defaults = [&] {
    p.kind = ScenarioKind::SingleUserPower;
    p.m = 4;
    p.d_v = 2.0;
    p.d0 = 51.0;
    p.path.alpha_ap_irs = 2.0;
    p.path.alpha_irs_user = 2.8;
    p.beta_ap_irs_db = std::numeric_limits<double>::infinity();   // LoS
    p.beta_irs_user_db = -std::numeric_limits<double>::infinity();  // Rayleigh
    p.gamma_db = 10.0;
    c.solvers = {"lower-bound", "sdr",          "alternating", "ap-user-mrt",
                 "ap-irs-mrt",  "random-phase", "no-irs"};
    c.trials = 300;
  };
  auto multi_user_defaults = [&] {
    p.kind = ScenarioKind::MultiUserPower;
    p.placement = "circles";
    p.d0 = 51.0;
    p.path.alpha_ap_irs = 2.8;
    p.path.alpha_irs_user = 2.8;
    p.beta_ap_irs_db = 3.0;
    p.beta_irs_user_db = 3.0;
    c.trials = 300;
  };
  auto rate_defaults = [&] {
    p.kind = ScenarioKind::MaxMinRate;
    p.placement = "two-disk";
    p.m = 20;
    p.n = 80;
    p.d0 = 51.0;
    p.path.alpha_ap_irs = 2.8;
    p.path.alpha_irs_user = 2.8;
    p.beta_ap_irs_db = 3.0;
    p.beta_irs_user_db = 3.0;
    p.max_iterations = 3;
    p.randomization = 300;
    p.rate_tolerance = 0.02;
  };

  if (id == "fig3") {
    single_user_defaults();
    p.n = 30;
    c.sweep_name = "d";
    for (int d = 20; d <= 51; ++d) c.sweep_values.push_back(d);
  } else if (id == "fig5a" || id == "fig5b" || id == "fig5c") {
    single_user_defaults();
    p.d = id == "fig5a" ? 50.0 : id == "fig5b" ? 41.0 : 15.0;
    c.sweep_name = "n";
    c.sweep_values = {10, 20, 30, 40, 50, 60};
  } else if (id == "fig6") {
    p.kind = ScenarioKind::RelayRate;
    p.m = 1;
    p.d0 = 100.0;
    p.d = 100.0;
    p.d_v = 1.0;
    p.path.alpha_ap_irs = 3.2;
    p.path.alpha_irs_user = 2.0;
    p.beta_ap_irs_db = -std::numeric_limits<double>::infinity();  // Rayleigh
    p.beta_irs_user_db = std::numeric_limits<double>::infinity();  // LoS
    p.ignore_direct = true;
    p.power_dbm = watt_to_dbm(5e-3);
    c.sweep_name = "n";
    c.sweep_values = {100, 200, 400, 800, 1600};
    c.solvers = {"irs", "fd-relay", "hd-relay"};
    c.trials = 300;
  } else if (id == "fig7") {
    multi_user_defaults();
    p.m = 4;
    p.n = 20;
    p.active_users = {1, 2, 3, 4};
    c.sweep_name = "gamma_db";
    c.sweep_values = {20};
    c.solvers = {"alternating", "alternating-feasibility"};
    c.trials = 50;
  } else if (id == "fig8" || id == "fig9") {
    multi_user_defaults();
    p.m = 4;
    p.n = 20;
    p.active_users = {1, 2};
    c.sweep_name = "gamma_db";
    c.sweep_values = {0, 5, 10, 15, 20, 25};
    if (id == "fig8") {
      c.solvers = {"alternating", "two-stage", "random-phase-mmse", "mmse-no-irs", "zf-no-irs"};
    } else {
      c.solvers = {"alternating", "mmse-no-irs"};
    }
  } else if (id == "fig10") {
    multi_user_defaults();
    p.m = 8;
    p.n = 40;
    p.active_users = {1, 2, 3, 4, 5, 6, 7, 8};
    p.gamma_db = 10.0;
    c.sweep_name = "beta_ap_irs_db";
    c.sweep_values = {-20, -10, 0, 10, 20};
    c.solvers = {"alternating", "two-stage", "random-phase-mmse", "mmse-no-irs"};
    c.trials = 100;
  } else if (id == "fig11") {
    rate_defaults();
    p.rho = 0.0;
    c.sweep_name = "power_dbm";
    c.sweep_values = {5, 10, 15, 20, 25};
    c.solvers = {"irs", "no-irs-m20", "no-irs-m40", "no-irs-m50"};
    c.trials = 2;
  } else if (id == "fig12") {
    rate_defaults();
    p.power_dbm = 15.0;
    c.sweep_name = "rho";
    c.sweep_values = {0, 0.03, 0.06, 0.09, 0.12, 0.15, 0.18, 0.21, 0.24, 0.27, 0.30};
    c.solvers = {"irs", "no-irs-m40"};
    c.trials = 3;
  } else {
    throw std::invalid_argument("unknown figure id '" + id + "'");
  }
  c.validate();
  return c;
}

std::vector<ResultRecord> run_experiment(const ExperimentConfig& config, int threads) {
  config.validate();
  if (threads < 1) threads = 1;
  const bool rho_cached =
      config.params.kind == ScenarioKind::MaxMinRate && config.sweep_name == "rho";

  std::vector<Task> tasks;
  if (rho_cached) {
    for (int t = 0; t < config.trials; ++t) tasks.push_back({0, t});
  } else {
    for (size_t s = 0; s < config.sweep_values.size(); ++s) {
      for (int t = 0; t < config.trials; ++t) tasks.push_back({static_cast<int>(s), t});
    }
  }

  std::vector<std::vector<ResultRecord>> slots(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      slots[i] = run_task(config, tasks[i]);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int count = std::min<int>(threads, static_cast<int>(tasks.size()));
    pool.reserve(count);
    for (int i = 0; i < count; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<ResultRecord> records;
  for (auto& slot : slots) {
    auto batch = rho_cached ? expand_rho(config, slot) : std::move(slot);
    for (auto& rec : batch) records.push_back(std::move(rec));
  }
  std::sort(records.begin(), records.end(), [](const ResultRecord& a, const ResultRecord& b) {
    if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
    if (a.trial != b.trial) return a.trial < b.trial;
    return a.solver < b.solver;
  });
  return records;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");
  std::map<std::pair<double, std::string>, std::vector<const ResultRecord*>> groups;
  for (const auto& rec : records) groups[{rec.sweep_value, rec.solver}].push_back(&rec);
  std::vector<SummaryRow> rows;
  for (const auto& [key, recs] : groups) {
    SummaryRow row;
    row.sweep_value = key.first;
    row.solver = key.second;
    std::vector<double> powers_w, rates;
    for (const ResultRecord* r : recs) {
      if (r->status == "infeasible" || r->status == "error") {
        ++row.excluded;
        continue;
      }
      ++row.count;
      if (std::isfinite(r->total_power_w)) powers_w.push_back(r->total_power_w);
      if (std::isfinite(r->rate)) rates.push_back(r->rate);
    }
    auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (const double x : v) s += x;
      return s / v.size();
    };
    auto stddev = [&](const std::vector<double>& v, double mu) {
      if (v.size() < 2) return 0.0;
      double s = 0.0;
      for (const double x : v) s += (x - mu) * (x - mu);
      return std::sqrt(s / (v.size() - 1));
    };
    if (!powers_w.empty()) {
      row.mean_power_dbm = watt_to_dbm(mean(powers_w));
      std::vector<double> dbs(powers_w.size());
      std::transform(powers_w.begin(), powers_w.end(), dbs.begin(), watt_to_dbm);
      row.std_power_db = stddev(dbs, mean(dbs));
    }
    if (!rates.empty()) {
      row.mean_rate = mean(rates);
      row.std_rate = stddev(rates, row.mean_rate);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_records_csv(std::ostream& out, const std::vector<ResultRecord>& records) {
  out << "scenario,sweep,sweep_value,trial,stream,solver,status,total_power_dbm,"
         "iterations,wall_time_ms,sinr_db,rho_k,rate_bps_hz,rate_phase1_bps_hz,"
         "rate_phase2_bps_hz,sig_combined_db,sig_direct_db,intf_combined_db,"
         "intf_direct_db,power_trace_dbm\r\n";
  for (const auto& r : records) {
    const double dbm = std::isfinite(r.total_power_w) && r.total_power_w > 0.0
                           ? watt_to_dbm(r.total_power_w)
                           : std::numeric_limits<double>::quiet_NaN();
    out << csv_quote(r.scenario) << ',' << csv_quote(r.sweep_name) << ','
        << format_double(r.sweep_value) << ',' << r.trial << ',' << r.stream << ','
        << csv_quote(r.solver) << ',' << csv_quote(r.status) << ',' << format_double(dbm) << ','
        << r.iterations << ',' << format_double(r.wall_ms) << ','
        << csv_quote(format_list(r.sinr_db)) << ',' << csv_quote(format_list(r.rho_k)) << ','
        << format_double(r.rate) << ',' << format_double(r.rate_phase1) << ','
        << format_double(r.rate_phase2) << ',' << csv_quote(format_list(r.sig_combined_db))
        << ',' << csv_quote(format_list(r.sig_direct_db)) << ','
        << csv_quote(format_list(r.intf_combined_db)) << ','
        << csv_quote(format_list(r.intf_direct_db)) << ','
        << csv_quote(format_list(r.power_trace_dbm)) << "\r\n";
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "sweep_value,solver,count,excluded,mean_power_dbm,std_power_db,"
         "mean_rate_bps_hz,std_rate_bps_hz\r\n";
  for (const auto& row : rows) {
    out << format_double(row.sweep_value) << ',' << csv_quote(row.solver) << ',' << row.count
        << ',' << row.excluded << ',' << format_double(row.mean_power_dbm) << ','
        << format_double(row.std_power_db) << ',' << format_double(row.mean_rate) << ','
        << format_double(row.std_rate) << "\r\n";
  }
}

void write_metadata(std::ostream& out, const ExperimentConfig& config) {
  out << "version = " << kVersion << "\n";
  out << "preset_version = " << kPresetVersion << "\n\n";
  write_config(out, config);
}

}  // namespace irsbf
