// SPDX-License-Identifier: Apache-2.0
//
// Single-user (K = 1) solvers: SDR pipeline, closed-form alternating
// optimization, fixed-beam MRT benchmarks and the received-power scaling laws.
#pragma once

#include "irsbf/channel.hpp"
#include "irsbf/sdp.hpp"

namespace irsbf {

struct SingleUserSolution {
  PhaseConfig phases;
  CVector beam;          // unit-norm direction w_bar
  double power = 0.0;    // W
  double lower_bound = 0.0;  // SDR transmit-power lower bound (SDR solver only)
  int iterations = 0;
};

// h / ||h||; throws std::domain_error on a zero channel.
CVector mrt_beamformer(const CVector& h);

// Phi = diag(h_r^H) G for the single (or indexed) user.
CMatrix effective_irs_channel(const ChannelSet& ch, int user = 0);

// Closed-form phases aligning every reflected element with the direct path:
// theta_n = phi0 - arg(h_rn^H) - arg(g_n^H w); elements with a vanishing
// product keep phase 0.
PhaseConfig optimal_phases_closed_form(const ChannelSet& ch, const CVector& beam);

struct SingleUserOptions {
  int randomization_count = 1000;
  double epsilon = 1e-4;   // fractional-decrease stop
  int max_iterations = 100;
};

SingleUserSolution solve_p2_sdr(const ChannelSet& ch, double gamma, int randomization_count,
                                RngStream& rng);

SingleUserSolution solve_p2_alternating(const ChannelSet& ch, double gamma,
                                        double epsilon = 1e-4, int max_iterations = 100,
                                        std::vector<double>* power_trace = nullptr);

// Fixed transmit-direction benchmarks: phases from the closed form, power
// scaled to meet the SNR target.
SingleUserSolution solve_fixed_beam(const ChannelSet& ch, double gamma, const CVector& beam);
SingleUserSolution solve_ap_user_mrt(const ChannelSet& ch, double gamma);
SingleUserSolution solve_ap_irs_mrt(const ChannelSet& ch, double gamma);
SingleUserSolution solve_random_phase(const ChannelSet& ch, double gamma, RngStream& rng);
// No-IRS benchmark: w = sqrt(gamma sigma^2) h_d / ||h_d||^2.
SingleUserSolution solve_no_irs(const ChannelSet& ch, double gamma);

enum class PhaseMode { Identity, Random, Optimal };

// Closed-form large-N received-power asymptote for the scalar (M = 1) model.
double scaling_law_prediction(int n, double power, double rho_h_sq, double rho_g_sq,
                              PhaseMode mode);

// Monte-Carlo mean of P |h_r^H Theta g|^2 over Rayleigh h_r, g.
double empirical_received_power(int n, double power, double rho_h_sq, double rho_g_sq,
                                PhaseMode mode, int trials, RngStream& rng);

}  // namespace irsbf
