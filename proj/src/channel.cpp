// SPDX-License-Identifier: Apache-2.0
#include "irsbf/channel.hpp"

#include <cmath>

namespace irsbf {

namespace {

// Far-field steering vector of the AP ULA (x-axis) toward unit direction u.
CVector ap_steering(const Geometry& g, const Point3& u) {
  const int m_count = g.num_ap_antennas;
  CVector a(m_count);
  for (int m = 0; m < m_count; ++m) {
    const double x = g.antenna_spacing * (m - 0.5 * (m_count - 1));
    a[m] = std::polar(1.0, 2.0 * M_PI * x * u.x());
  }
  return a;
}

// Steering vector of the IRS URA (x-z plane), element order x-major.
CVector irs_steering(const Geometry& g, const Point3& u) {
  CVector a(g.num_irs_elements());
  int n = 0;
  for (int iz = 0; iz < g.irs_nz; ++iz) {
    const double z = g.antenna_spacing * (iz - 0.5 * (g.irs_nz - 1));
    for (int ix = 0; ix < g.irs_nx; ++ix, ++n) {
      const double x = g.antenna_spacing * (ix - 0.5 * (g.irs_nx - 1));
      a[n] = std::polar(1.0, 2.0 * M_PI * (x * u.x() + z * u.z()));
    }
  }
  return a;
}

Point3 unit_dir(const Point3& from, const Point3& to) {
  const Point3 d = to - from;
  const double n = d.norm();
  if (n <= 0.0) throw std::invalid_argument("geometry: coincident endpoints");
  return d / n;
}

// Mixes the LoS and Rayleigh components for one link and applies sqrt
// path loss. beta = inf is the exact LoS limit (no random draws).
CMatrix rician_mix(const CMatrix& los, double beta, double gain, RngStream& rng) {
  const double s = std::sqrt(gain);
  if (std::isinf(beta)) return s * los;
  CMatrix nlos = sample_cscg_matrix(los.rows(), los.cols(), 1.0, rng);
  if (beta == 0.0) return s * nlos;
  const double c_los = std::sqrt(beta / (1.0 + beta));
  const double c_nlos = std::sqrt(1.0 / (1.0 + beta));
  return s * (c_los * los + c_nlos * nlos);
}

}  // namespace

void Geometry::validate() const {
  if (irs_nx < 1 || irs_nz < 1 || num_ap_antennas < 1) {
    throw std::invalid_argument("geometry: element counts must be >= 1");
  }
  if (!ap_position.allFinite() || !irs_position.allFinite()) {
    throw std::invalid_argument("geometry: non-finite positions");
  }
  if (ap_irs_distance() <= 0.0) throw std::invalid_argument("geometry: d0 must be > 0");
  for (int k = 0; k < num_users(); ++k) {
    if (!user_positions[k].allFinite() || ap_user_distance(k) <= 0.0 ||
        irs_user_distance(k) <= 0.0) {
      throw std::invalid_argument("geometry: invalid user position");
    }
  }
}

PhaseConfig::PhaseConfig(RVector t) : theta(std::move(t)) {
  const double two_pi = 2.0 * M_PI;
  for (Eigen::Index n = 0; n < theta.size(); ++n) {
    double v = std::fmod(theta[n], two_pi);
    if (v < 0.0) v += two_pi;
    theta[n] = v;
  }
}

CVector PhaseConfig::reflection() const {
  CVector v(theta.size());
  for (Eigen::Index n = 0; n < theta.size(); ++n) v[n] = std::polar(1.0, theta[n]);
  return v;
}

double path_loss(double d, const PathLossParams& params, double alpha) {
  if (d <= 0.0) throw std::domain_error("path_loss: distance must be > 0");
  return params.c0 * std::pow(d / params.d0_ref, -alpha);
}

CMatrix los_component(const Geometry& geom, Link link, int user) {
  switch (link) {
    case Link::ApIrs: {
      const CVector b = irs_steering(geom, unit_dir(geom.irs_position, geom.ap_position));
      const CVector a = ap_steering(geom, unit_dir(geom.ap_position, geom.irs_position));
      return b * a.adjoint();
    }
    case Link::IrsUser:
      return irs_steering(geom, unit_dir(geom.irs_position, geom.user_positions.at(user)));
    case Link::ApUser:
      return ap_steering(geom, unit_dir(geom.ap_position, geom.user_positions.at(user)));
  }
  throw std::invalid_argument("los_component: unknown link");
}

ChannelSet sample_channel(const Geometry& geom, const PathLossParams& path,
                          const RicianParams& rician,
                          const std::vector<double>& noise_power, RngStream& rng) {
  geom.validate();
  const int k_count = geom.num_users();
  if (static_cast<int>(noise_power.size()) != k_count) {
    throw std::invalid_argument("sample_channel: noise power count mismatch");
  }
  ChannelSet ch;
  ch.noise_power = noise_power;
  ch.g = rician_mix(los_component(geom, Link::ApIrs), rician.beta_ap_irs,
                    path_loss(geom.ap_irs_distance(), path, path.alpha_ap_irs), rng);
  ch.h_r.reserve(k_count);
  ch.h_d.reserve(k_count);
  for (int k = 0; k < k_count; ++k) {
    ch.h_r.push_back(rician_mix(los_component(geom, Link::IrsUser, k), rician.beta_irs_user,
                                path_loss(geom.irs_user_distance(k), path, path.alpha_irs_user),
                                rng));
    ch.h_d.push_back(rician_mix(los_component(geom, Link::ApUser, k), rician.beta_ap_user,
                                path_loss(geom.ap_user_distance(k), path, path.alpha_ap_user),
                                rng));
  }
  return ch;
}

CVector combined_channel(const ChannelSet& ch, const PhaseConfig& phases, int user) {
  if (phases.size() != ch.g.rows()) {
    throw std::invalid_argument("combined_channel: phase count mismatch");
  }
  // h^H = h_r^H Theta G + h_d^H; return h = G^H Theta^H h_r + h_d.
  const CVector refl = phases.reflection();
  return ch.g.adjoint() * refl.conjugate().cwiseProduct(ch.h_r.at(user)) + ch.h_d.at(user);
}

RVector sinr(const ChannelSet& ch, const PhaseConfig& phases,
             const std::vector<CVector>& precoder) {
  const int k_count = ch.num_users();
  RVector out(k_count);
  for (int k = 0; k < k_count; ++k) {
    const CVector h = combined_channel(ch, phases, k);
    double sig = 0.0, intf = 0.0;
    for (int j = 0; j < static_cast<int>(precoder.size()); ++j) {
      const double p = std::norm(h.dot(precoder[j]));
      if (j == k) {
        sig = p;
      } else {
        intf += p;
      }
    }
    out[k] = sig / (intf + ch.noise_power.at(k));
  }
  return out;
}

}  // namespace irsbf
