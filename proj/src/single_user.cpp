// SPDX-License-Identifier: Apache-2.0
#include "irsbf/single_user.hpp"

#include <cmath>

namespace irsbf {

namespace {

double combined_gain(const ChannelSet& ch, const PhaseConfig& phases) {
  return combined_channel(ch, phases, 0).squaredNorm();
}

SingleUserSolution finish_with_mrt(const ChannelSet& ch, double gamma, PhaseConfig phases) {
  const CVector h = combined_channel(ch, phases, 0);
  if (h.squaredNorm() <= 0.0) {
    throw std::runtime_error("single_user: combined channel is identically zero");
  }
  SingleUserSolution sol;
  sol.beam = mrt_beamformer(h);
  sol.phases = std::move(phases);
  sol.power = gamma * ch.noise_power.at(0) / h.squaredNorm();
  return sol;
}

}  // namespace

CVector mrt_beamformer(const CVector& h) {
  const double n = h.norm();
  if (n <= 0.0) throw std::domain_error("mrt_beamformer: zero channel");
  return h / n;
}

CMatrix effective_irs_channel(const ChannelSet& ch, int user) {
  return ch.h_r.at(user).conjugate().asDiagonal() * ch.g;
}

PhaseConfig optimal_phases_closed_form(const ChannelSet& ch, const CVector& beam) {
  const CVector a = effective_irs_channel(ch) * beam;  // diag(h_r^H) G w
  const Complex direct = ch.h_d.at(0).dot(beam);  // h_d^H w
  const double phi0 = std::abs(direct) > 0.0 ? std::arg(direct) : 0.0;
  RVector theta(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    theta[i] = std::abs(a[i]) > 0.0 ? phi0 - std::arg(a[i]) : 0.0;
  }
  return PhaseConfig(theta);
}

SingleUserSolution solve_p2_sdr(const ChannelSet& ch, double gamma, int randomization_count,
                                RngStream& rng) {
  const CMatrix phi = effective_irs_channel(ch);
  const CVector& h_d = ch.h_d.at(0);
  SdpProblem lifted = lift_single_user(phi, h_d);
  const SdpSolution sdp = solve_sdp(lifted);
  const double offset = h_d.squaredNorm();
  auto score = [&](const CVector& v) {
    return (v.adjoint() * phi + h_d.adjoint()).squaredNorm();
  };
  RandomizationResult rr = gaussian_randomization(sdp.x, score, randomization_count, rng);
  SingleUserSolution sol = finish_with_mrt(ch, gamma, std::move(rr.phases));
  const double sdp_gain = sdp.objective + offset;
  sol.lower_bound = gamma * ch.noise_power.at(0) / sdp_gain;
  sol.iterations = sdp.iterations;
  return sol;
}

SingleUserSolution solve_p2_alternating(const ChannelSet& ch, double gamma, double epsilon,
                                        int max_iterations,
                                        std::vector<double>* power_trace) {
  const CVector& h_d = ch.h_d.at(0);
  if (h_d.squaredNorm() <= 0.0 && effective_irs_channel(ch).squaredNorm() <= 0.0) {
    throw std::runtime_error("single_user: no usable channel");
  }
  CVector beam = h_d.squaredNorm() > 0.0
                     ? mrt_beamformer(h_d)
                     : mrt_beamformer(combined_channel(ch, PhaseConfig(ch.g.rows()), 0));
  SingleUserSolution sol;
  double prev_power = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iterations; ++it) {
    PhaseConfig phases = optimal_phases_closed_form(ch, beam);
    const CVector h = combined_channel(ch, phases, 0);
    beam = mrt_beamformer(h);
    const double power = gamma * ch.noise_power.at(0) / h.squaredNorm();
    if (power_trace) power_trace->push_back(power);
    sol.phases = std::move(phases);
    sol.beam = beam;
    sol.power = power;
    sol.iterations = it + 1;
    if (prev_power - power < epsilon * prev_power) break;
    prev_power = power;
  }
  return sol;
}

SingleUserSolution solve_fixed_beam(const ChannelSet& ch, double gamma, const CVector& beam) {
  PhaseConfig phases = optimal_phases_closed_form(ch, beam);
  const CVector h = combined_channel(ch, phases, 0);
  const double g = std::norm(h.dot(beam));
  if (g <= 0.0) throw std::runtime_error("single_user: fixed beam sees a zero channel");
  SingleUserSolution sol;
  sol.phases = std::move(phases);
  sol.beam = beam;
  sol.power = gamma * ch.noise_power.at(0) / g;
  return sol;
}

SingleUserSolution solve_ap_user_mrt(const ChannelSet& ch, double gamma) {
  return solve_fixed_beam(ch, gamma, mrt_beamformer(ch.h_d.at(0)));
}

SingleUserSolution solve_ap_irs_mrt(const ChannelSet& ch, double gamma) {
  // Any row of the (rank-one) AP-IRS channel fixes the beam direction.
  const CVector g0 = ch.g.row(0).adjoint();
  return solve_fixed_beam(ch, gamma, mrt_beamformer(g0));
}

SingleUserSolution solve_random_phase(const ChannelSet& ch, double gamma, RngStream& rng) {
  RVector theta(ch.g.rows());
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(0.0, 2.0 * M_PI);
  return finish_with_mrt(ch, gamma, PhaseConfig(theta));
}

SingleUserSolution solve_no_irs(const ChannelSet& ch, double gamma) {
  const CVector& h_d = ch.h_d.at(0);
  const double g = h_d.squaredNorm();
  if (g <= 0.0) throw std::runtime_error("single_user: zero direct channel");
  SingleUserSolution sol;
  sol.phases = PhaseConfig(ch.g.rows());
  sol.beam = mrt_beamformer(h_d);
  sol.power = gamma * ch.noise_power.at(0) / g;
  return sol;
}

double scaling_law_prediction(int n, double power, double rho_h_sq, double rho_g_sq,
                              PhaseMode mode) {
  if (n < 1 || power <= 0.0 || rho_h_sq <= 0.0 || rho_g_sq <= 0.0) {
    throw std::invalid_argument("scaling_law_prediction: inputs must be positive");
  }
  const double base = power * rho_h_sq * rho_g_sq;
  if (mode == PhaseMode::Optimal) {
    return static_cast<double>(n) * n * base * M_PI * M_PI / 16.0;
  }
  return static_cast<double>(n) * base;
}

double empirical_received_power(int n, double power, double rho_h_sq, double rho_g_sq,
                                PhaseMode mode, int trials, RngStream& rng) {
  double acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    const CVector h = sample_cscg(n, rho_h_sq, rng);
    const CVector g = sample_cscg(n, rho_g_sq, rng);
    Complex sum = 0.0;
    switch (mode) {
      case PhaseMode::Identity:
        sum = h.dot(g);  // h^H g
        break;
      case PhaseMode::Random: {
        for (int i = 0; i < n; ++i) {
          sum += std::conj(h[i]) * std::polar(1.0, rng.uniform(0.0, 2.0 * M_PI)) * g[i];
        }
        break;
      }
      case PhaseMode::Optimal: {
        double mag = 0.0;
        for (int i = 0; i < n; ++i) mag += std::abs(h[i]) * std::abs(g[i]);
        sum = mag;
        break;
      }
    }
    acc += power * std::norm(sum);
  }
  return acc / trials;
}

}  // namespace irsbf
