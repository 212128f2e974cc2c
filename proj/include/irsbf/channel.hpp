// SPDX-License-Identifier: Apache-2.0
//
// Geometry, distance-dependent path loss and Rician fading channel
// generation for the AP / IRS / user layout.
#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "irsbf/numerics.hpp"

namespace irsbf {

using Point3 = Eigen::Vector3d;

// AP is a ULA along the x-axis, the IRS a URA in the x-z plane; spacing is
// given in wavelengths. Users are assumed at z = 0 unless placed otherwise.
struct Geometry {
  Point3 ap_position = Point3::Zero();
  Point3 irs_position = Point3::Zero();
  std::vector<Point3> user_positions;
  int num_ap_antennas = 1;  // M
  int irs_nx = 1;
  int irs_nz = 1;
  double antenna_spacing = 0.5;  // wavelengths

  int num_irs_elements() const { return irs_nx * irs_nz; }
  int num_users() const { return static_cast<int>(user_positions.size()); }
  double ap_irs_distance() const { return (irs_position - ap_position).norm(); }
  double ap_user_distance(int k) const { return (user_positions.at(k) - ap_position).norm(); }
  double irs_user_distance(int k) const { return (user_positions.at(k) - irs_position).norm(); }

  void validate() const;
};

struct PathLossParams {
  double c0 = 1e-3;  // linear gain at reference distance
  double d0_ref = 1.0;
  double alpha_ap_irs = 2.0;
  double alpha_irs_user = 2.8;
  double alpha_ap_user = 3.5;
};

constexpr double kRicianInf = std::numeric_limits<double>::infinity();

// Rician factors as linear power ratios; kRicianInf selects the pure LoS
// limit, 0 pure Rayleigh.
struct RicianParams {
  double beta_ap_irs = 0.0;
  double beta_irs_user = 0.0;
  double beta_ap_user = 0.0;
};

struct ChannelSet {
  CMatrix g;                       // N x M, AP -> IRS
  std::vector<CVector> h_r;        // per user, length N (IRS -> user)
  std::vector<CVector> h_d;        // per user, length M (AP -> user)
  std::vector<double> noise_power; // sigma_k^2, W

  int num_users() const { return static_cast<int>(h_r.size()); }
  int num_irs_elements() const { return static_cast<int>(g.rows()); }
  int num_ap_antennas() const { return static_cast<int>(g.cols()); }
};

// IRS reflection: N phases in [0, 2pi), unit amplitude.
struct PhaseConfig {
  RVector theta;

  explicit PhaseConfig(Eigen::Index n = 0) : theta(RVector::Zero(n)) {}
  explicit PhaseConfig(RVector t);

  Eigen::Index size() const { return theta.size(); }
  // diag entries e^{j theta_n}
  CVector reflection() const;
};

enum class Link { ApIrs, IrsUser, ApUser };

// C0 (d / D0)^(-alpha)
double path_loss(double d, const PathLossParams& params, double alpha);

// Deterministic far-field LoS component of a link (unit-modulus entries;
// rank one for the AP-IRS link). For user links pass the user index.
CMatrix los_component(const Geometry& geom, Link link, int user = 0);

ChannelSet sample_channel(const Geometry& geom, const PathLossParams& path,
                          const RicianParams& rician,
                          const std::vector<double>& noise_power, RngStream& rng);

// Row vector h_k^H = h_{r,k}^H Theta G + h_{d,k}^H, returned as the column
// vector h_k (so h^H w = h.dot(w) with Eigen's conjugating dot).
CVector combined_channel(const ChannelSet& ch, const PhaseConfig& phases, int user);

// Per-user SINR for precoder columns w_k.
RVector sinr(const ChannelSet& ch, const PhaseConfig& phases,
             const std::vector<CVector>& precoder);

}  // namespace irsbf
