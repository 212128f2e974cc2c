// SPDX-License-Identifier: Apache-2.0
//
// Multiuser solvers: duality fixed-point precoding, phase-shift SDR
// feasibility/residual problems, the alternating and two-stage algorithms,
// and the no-IRS benchmark precoders.
#pragma once

#include <optional>
#include <vector>

#include "irsbf/channel.hpp"
#include "irsbf/sdp.hpp"

namespace irsbf {

struct Precoder {
  std::vector<CVector> w;

  double total_power() const {
    double p = 0.0;
    for (const auto& wk : w) p += wk.squaredNorm();
    return p;
  }
};

enum class MultiUserStatus { Converged, P4Infeasible, MaxIterations };

struct MultiUserSolution {
  Precoder precoder;
  PhaseConfig phases;
  double total_power = 0.0;
  RVector sinr;
  std::vector<double> power_trace;
  MultiUserStatus status = MultiUserStatus::Converged;
  int iterations = 0;
};

// Constructive feasibility precoder of the rank-K sufficient condition:
// W = H (H^H H)^{-1} diag(gamma sigma^2)^{1/2} with Theta = I; hits every
// SINR target exactly. Throws std::runtime_error on rank deficiency.
Precoder feasibility_precoder(const ChannelSet& ch, const RVector& gamma);

struct P3Options {
  int max_iterations = 2000;
  double tolerance = 1e-12;
  double divergence_bound = 1e18;
};

// Downlink power minimization for fixed combined channels h_k via the
// uplink-downlink duality fixed point; all SINR constraints tight at the
// returned precoder. Throws std::runtime_error when the fixed point
// diverges (infeasible instance).
Precoder solve_p3(const std::vector<CVector>& h, const RVector& gamma,
                  const std::vector<double>& noise_power, const P3Options& opts = {});

enum class P4Mode { Feasibility, Residual };

struct P4Result {
  PhaseConfig phases;
  bool feasible = false;
  double sdp_margin = 0.0;     // optimal minimum constraint slack
  double best_min_margin = 0.0;  // min_k SINR_k/gamma_k of the best candidate
};

// Phase-shift subproblem for a fixed precoder: margin SDP (+ residual SDP in
// residual mode) followed by Gaussian randomization scored by the minimum
// per-user SINR margin.
P4Result solve_p4_phases(const Precoder& w, const ChannelSet& ch, const RVector& gamma,
                         P4Mode mode, int randomization_count, RngStream& rng);

struct Algorithm1Options {
  double epsilon = 1e-4;
  int max_iterations = 30;
  int randomization_count = 1000;
  P4Mode p4_mode = P4Mode::Residual;
};

MultiUserSolution algorithm1(const ChannelSet& ch, const RVector& gamma,
                             const PhaseConfig& theta_init, const Algorithm1Options& opts,
                             RngStream& rng);

// Stage 1: weighted combined-channel-gain SDR (weights 1/(gamma_k sigma_k^2));
// stage 2: one P3 solve.
MultiUserSolution two_stage(const ChannelSet& ch, const RVector& gamma,
                            int randomization_count, RngStream& rng);

// tr(P (H_d^H H_d)^{-1}) with P = diag(sigma_k^2 gamma_k).
double zf_power(const CMatrix& h_d, const RVector& gamma, const std::vector<double>& noise_power);

// |h_d^H w| / (||h_d|| ||w||), in [0, 1].
double effective_angle(const CVector& w, const CVector& h_d);

struct MaxMinRateResult {
  double rate = 0.0;          // bps/Hz, averaged over the two phases
  double rate_phase1 = 0.0;   // AP only
  double rate_phase2 = 0.0;   // AP + IRS
  Precoder precoder;          // phase-2 solution
  PhaseConfig phases;
};

struct MaxMinRateOptions {
  double rate_tolerance = 1e-3;  // bps/Hz bisection tolerance
  Algorithm1Options alg1;
};

// Max-min average rate r_k = rho R1_k + (1 - rho) R2_k under the AP power
// budget: bisection on a common rate target, with phase-1 feasibility checked
// by MMSE-only precoding and phase-2 by the alternating algorithm.
MaxMinRateResult max_min_rate(const ChannelSet& ch, double p_max, double rho,
                              const MaxMinRateOptions& opts, RngStream& rng);

}  // namespace irsbf
