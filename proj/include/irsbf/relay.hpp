// SPDX-License-Identifier: Apache-2.0
//
// Full/half-duplex amplify-and-forward relay baselines: receive SNR with
// optimal linear beamforming, its large-N asymptote, and the AP/relay power
// split search.
#pragma once

#include <utility>
#include <vector>

#include "irsbf/numerics.hpp"

namespace irsbf {

// Two-hop AF relay link (direct AP-user path ignored); perfect
// self-interference cancellation.
struct RelayInstance {
  CVector g;    // AP -> relay
  CVector h_r;  // relay -> user
  double p = 0.0;            // AP transmit power, W
  double p_r = 0.0;          // relay transmit power, W
  double noise_user = 1.0;   // sigma^2, W
  double noise_relay = 1.0;  // sigma_r^2, W

  void validate() const;
};

// Receive SNR for arbitrary unit-norm receive/transmit beamformers x_r, x_t.
double fd_relay_snr_beamformed(const RelayInstance& inst, const CVector& x_t, const CVector& x_r);

// Closed form at the optimal beamformers x_t = h_r/||h_r||, x_r = g/||g||:
// P P_r ||g||^2 ||h_r||^2 / (P_r s_r^2 ||h_r||^2 + P s^2 ||g||^2 + s_r^2 s^2).
double fd_relay_snr(const RelayInstance& inst);

// Large-N limit P P_r rho_g^2 rho_h^2 N / (P_r s_r^2 rho_h^2 + P s^2 rho_g^2).
double asymptotic_fd_snr(double p, double p_r, double rho_g_sq, double rho_h_sq,
                         double noise_user, double noise_relay, int n);

enum class Duplex { FD, HD };

// FD: log2(1 + snr); HD: two-slot operation, 0.5 log2(1 + snr).
double relay_rate(double snr, Duplex duplex);

struct PowerSplitResult {
  double p_ap = 0.0;
  double p_relay = 0.0;
  double mean_rate = 0.0;  // bps/Hz at the best split
};

// Exhaustive search over interior grid splits P_i = P_total i/(grid+1),
// maximizing the mean rate over the supplied (g, h_r) channel draws.
PowerSplitResult optimal_power_split(double p_total,
                                     const std::vector<std::pair<CVector, CVector>>& channels,
                                     int grid_points, double noise_user, double noise_relay,
                                     Duplex duplex);

}  // namespace irsbf
