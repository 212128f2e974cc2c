// SPDX-License-Identifier: Apache-2.0
#include "irsbf/relay.hpp"

#include <cmath>
#include <stdexcept>

namespace irsbf {

void RelayInstance::validate() const {
  if (g.size() < 1 || g.size() != h_r.size()) {
    throw std::invalid_argument("relay: g and h_r must be non-empty and equally sized");
  }
  if (p < 0.0 || p_r < 0.0) throw std::invalid_argument("relay: powers must be >= 0");
  if (noise_user <= 0.0 || noise_relay <= 0.0) {
    throw std::invalid_argument("relay: noise powers must be positive");
  }
}

double fd_relay_snr_beamformed(const RelayInstance& inst, const CVector& x_t,
                               const CVector& x_r) {
  inst.validate();
  if (x_t.size() != inst.g.size() || x_r.size() != inst.g.size()) {
    throw std::invalid_argument("relay: beamformer length mismatch");
  }
  const double rx_gain = std::norm(x_r.dot(inst.g));       // |x_r^H g|^2
  const double tx_gain = std::norm(inst.h_r.dot(x_t));     // |h_r^H x_t|^2
  const double xr2 = x_r.squaredNorm();
  const double xt2 = x_t.squaredNorm();
  const double num = inst.p * inst.p_r * rx_gain * tx_gain;
  const double den = inst.p_r * inst.noise_relay * xr2 * tx_gain +
                     inst.p * inst.noise_user * xt2 * rx_gain +
                     inst.noise_relay * inst.noise_user * xt2 * xr2;
  return num / den;
}

double fd_relay_snr(const RelayInstance& inst) {
  inst.validate();
  const double g2 = inst.g.squaredNorm();
  const double h2 = inst.h_r.squaredNorm();
  const double num = inst.p * inst.p_r * g2 * h2;
  const double den = inst.p_r * inst.noise_relay * h2 + inst.p * inst.noise_user * g2 +
                     inst.noise_relay * inst.noise_user;
  return num / den;
}

double asymptotic_fd_snr(double p, double p_r, double rho_g_sq, double rho_h_sq,
                         double noise_user, double noise_relay, int n) {
  if (p <= 0.0 || p_r <= 0.0 || rho_g_sq <= 0.0 || rho_h_sq <= 0.0 || noise_user <= 0.0 ||
      noise_relay <= 0.0 || n < 1) {
    throw std::invalid_argument("asymptotic_fd_snr: inputs must be positive");
  }
  return p * p_r * rho_g_sq * rho_h_sq * n /
         (p_r * noise_relay * rho_h_sq + p * noise_user * rho_g_sq);
}

double relay_rate(double snr, Duplex duplex) {
  if (snr < 0.0) throw std::invalid_argument("relay_rate: SNR must be >= 0");
  const double r = std::log2(1.0 + snr);
  return duplex == Duplex::FD ? r : 0.5 * r;
}

PowerSplitResult optimal_power_split(double p_total,
                                     const std::vector<std::pair<CVector, CVector>>& channels,
                                     int grid_points, double noise_user, double noise_relay,
                                     Duplex duplex) {
  if (p_total <= 0.0) throw std::invalid_argument("optimal_power_split: budget must be positive");
  if (grid_points < 2) throw std::invalid_argument("optimal_power_split: need >= 2 grid points");
  if (channels.empty()) throw std::invalid_argument("optimal_power_split: no channel draws");
  PowerSplitResult best;
  best.mean_rate = -1.0;
  for (int i = 1; i <= grid_points; ++i) {
    const double p_ap = p_total * i / (grid_points + 1.0);
    const double p_relay = p_total - p_ap;
    double acc = 0.0;
    for (const auto& [g, h_r] : channels) {
      RelayInstance inst{g, h_r, p_ap, p_relay, noise_user, noise_relay};
      acc += relay_rate(fd_relay_snr(inst), duplex);
    }
    const double mean = acc / channels.size();
    if (mean > best.mean_rate) {
      best.p_ap = p_ap;
      best.p_relay = p_relay;
      best.mean_rate = mean;
    }
  }
  return best;
}

}  // namespace irsbf
