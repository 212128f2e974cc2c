// SPDX-License-Identifier: Apache-2.0
#include "irsbf/multi_user.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "irsbf/single_user.hpp"

namespace irsbf {

namespace {

void validate_targets(const ChannelSet& ch, const RVector& gamma) {
  if (gamma.size() != ch.num_users()) {
    throw std::invalid_argument("multi_user: target count must match user count");
  }
  if ((gamma.array() <= 0.0).any()) {
    throw std::invalid_argument("multi_user: SINR targets must be positive");
  }
}

CMatrix unit_diag(Eigen::Index n, Eigen::Index i) {
  CMatrix a = CMatrix::Zero(n, n);
  a(i, i) = 1.0;
  return a;
}

std::vector<CVector> combined_channels(const ChannelSet& ch, const PhaseConfig& phases) {
  std::vector<CVector> h(ch.num_users());
  for (int k = 0; k < ch.num_users(); ++k) h[k] = combined_channel(ch, phases, k);
  return h;
}

// Weighted combined-channel-gain SDR over the phase shifts: maximizes
// sum_k t_k ||Phi_k^H x + h_{d,k}||^2 over unit-modulus x.
PhaseConfig stage1_phases(const ChannelSet& ch, const RVector& weights,
                          int randomization_count, RngStream& rng) {
  const Eigen::Index n = ch.num_irs_elements();
  std::vector<CMatrix> phi(ch.num_users());
  SdpProblem p;
  p.n = n + 1;
  p.c = CMatrix::Zero(p.n, p.n);
  for (int k = 0; k < ch.num_users(); ++k) {
    phi[k] = effective_irs_channel(ch, k);
    p.c.topLeftCorner(n, n) += weights[k] * (phi[k] * phi[k].adjoint());
    const CVector border = weights[k] * (phi[k] * ch.h_d.at(k));
    p.c.topRightCorner(n, 1) += border;
    p.c.bottomLeftCorner(1, n) += border.adjoint();
  }
  for (Eigen::Index i = 0; i < p.n; ++i) {
    p.constraints.push_back({unit_diag(p.n, i), 1.0, ConstraintSense::Equal});
  }
  const SdpSolution sdp = solve_sdp(p);
  auto score = [&](const CVector& x) {
    double s = 0.0;
    for (int k = 0; k < ch.num_users(); ++k) {
      s += weights[k] * (phi[k].adjoint() * x + ch.h_d.at(k)).squaredNorm();
    }
    return s;
  };
  return gaussian_randomization(sdp.x, score, randomization_count, rng).phases;
}

}  // namespace

Precoder feasibility_precoder(const ChannelSet& ch, const RVector& gamma) {
  validate_targets(ch, gamma);
  const int k_users = ch.num_users();
  const int m = ch.num_ap_antennas();
  if (m < k_users) throw std::runtime_error("feasibility_precoder: fewer antennas than users");
  CMatrix h(m, k_users);
  const PhaseConfig identity(ch.num_irs_elements());
  for (int k = 0; k < k_users; ++k) h.col(k) = combined_channel(ch, identity, k);
  Eigen::ColPivHouseholderQR<CMatrix> qr(h);
  qr.setThreshold(1e-12);
  if (qr.rank() < k_users) throw std::runtime_error("feasibility_precoder: rank-deficient channel");
  CMatrix gram_inv = (h.adjoint() * h).inverse();
  Precoder w;
  w.w.resize(k_users);
  const CMatrix base = h * gram_inv;
  for (int k = 0; k < k_users; ++k) {
    w.w[k] = base.col(k) * std::sqrt(gamma[k] * ch.noise_power.at(k));
  }
  return w;
}

Precoder solve_p3(const std::vector<CVector>& h, const RVector& gamma,
                  const std::vector<double>& noise_power, const P3Options& opts) {
  const int k_users = static_cast<int>(h.size());
  if (k_users < 1 || gamma.size() != k_users ||
      static_cast<int>(noise_power.size()) != k_users) {
    throw std::invalid_argument("solve_p3: inconsistent dimensions");
  }
  if ((gamma.array() <= 0.0).any()) throw std::invalid_argument("solve_p3: targets must be positive");
  const Eigen::Index m = h[0].size();
  std::vector<CVector> ht(k_users);
  for (int k = 0; k < k_users; ++k) {
    if (h[k].size() != m) throw std::invalid_argument("solve_p3: mismatched channel lengths");
    if (noise_power[k] <= 0.0) throw std::invalid_argument("solve_p3: noise power must be positive");
    ht[k] = h[k] / std::sqrt(noise_power[k]);
    if (ht[k].squaredNorm() <= 0.0) throw std::runtime_error("solve_p3: zero channel");
  }

  // Uplink-duality fixed point on the virtual uplink powers lambda_k.
  RVector lam(k_users);
  for (int k = 0; k < k_users; ++k) lam[k] = gamma[k] / ht[k].squaredNorm();
  Eigen::LLT<CMatrix> llt;
  bool converged = false;
  for (int it = 0; it < opts.max_iterations && !converged; ++it) {
    CMatrix a = CMatrix::Identity(m, m);
    for (int k = 0; k < k_users; ++k) a += lam[k] * (ht[k] * ht[k].adjoint());
    llt.compute(a);
    if (llt.info() != Eigen::Success) throw std::runtime_error("solve_p3: factorization failed");
    double delta = 0.0;
    for (int k = 0; k < k_users; ++k) {
      const double q = ht[k].dot(llt.solve(ht[k])).real();
      const double denom = 1.0 - lam[k] * q;
      // q = h^H A^{-1} h with A >= I + lam h h^H keeps denom > 0 in exact
      // arithmetic; the guard only absorbs roundoff at divergence.
      const double x = q / std::max(denom, 1e-300);
      const double next = gamma[k] / x;
      if (!(next > 0.0) || next > opts.divergence_bound) {
        throw std::runtime_error("solve_p3: fixed point diverged (targets infeasible)");
      }
      delta = std::max(delta, std::abs(next - lam[k]) / next);
      lam[k] = next;
    }
    converged = delta < opts.tolerance;
  }
  if (!converged) throw std::runtime_error("solve_p3: fixed point did not converge");

  // MMSE directions and exact downlink power allocation.
  CMatrix a = CMatrix::Identity(m, m);
  for (int k = 0; k < k_users; ++k) a += lam[k] * (ht[k] * ht[k].adjoint());
  llt.compute(a);
  std::vector<CVector> u(k_users);
  for (int k = 0; k < k_users; ++k) {
    u[k] = llt.solve(ht[k]);
    u[k] /= u[k].norm();
  }
  RMatrix lin = RMatrix::Zero(k_users, k_users);
  for (int k = 0; k < k_users; ++k) {
    for (int j = 0; j < k_users; ++j) {
      const double g = std::norm(ht[k].dot(u[j]));
      lin(k, j) = (j == k) ? g / gamma[k] : -g;
    }
  }
  const RVector p = lin.partialPivLu().solve(RVector::Ones(k_users));
  if ((p.array() <= 0.0).any()) throw std::runtime_error("solve_p3: negative power allocation");
  Precoder w;
  w.w.resize(k_users);
  for (int k = 0; k < k_users; ++k) w.w[k] = std::sqrt(p[k]) * u[k];
  return w;
}

P4Result solve_p4_phases(const Precoder& w, const ChannelSet& ch, const RVector& gamma,
                         P4Mode mode, int randomization_count, RngStream& rng) {
  validate_targets(ch, gamma);
  const int k_users = ch.num_users();
  if (static_cast<int>(w.w.size()) != k_users) {
    throw std::invalid_argument("solve_p4_phases: precoder/user count mismatch");
  }
  const Eigen::Index n = ch.num_irs_elements();
  if (n < 1) throw std::invalid_argument("solve_p4_phases: no reflecting elements");

  // Lifted per-user constraint tr(Q_k X) >= c_k from the SINR targets.
  std::vector<CMatrix> q(k_users);
  RVector rhs(k_users);
  for (int k = 0; k < k_users; ++k) {
    const CMatrix phi = effective_irs_channel(ch, k);
    CMatrix qk = CMatrix::Zero(n + 1, n + 1);
    double ck = gamma[k] * ch.noise_power.at(k);
    for (int j = 0; j < k_users; ++j) {
      const CVector a = phi * w.w[j];
      const Complex b = ch.h_d.at(k).dot(w.w[j]);
      if (j == k) {
        qk += lift_outer(a, b);
        ck -= std::norm(b);
      } else {
        qk -= gamma[k] * lift_outer(a, b);
        ck += gamma[k] * std::norm(b);
      }
    }
    q[k] = 0.5 * (qk + CMatrix(qk.adjoint()));
    rhs[k] = ck;
    // Normalize so both the margin variable and the residual slacks are O(1)
    // regardless of the absolute channel-gain scale.
    const double scale = q[k].cwiseAbs().maxCoeff();
    if (scale > 0.0) {
      q[k] /= scale;
      rhs[k] /= scale;
    }
  }

  SdpProblem margin_problem;
  margin_problem.n = n + 1;
  margin_problem.c = CMatrix::Zero(n + 1, n + 1);
  margin_problem.feasibility_only = true;
  for (Eigen::Index i = 0; i <= n; ++i) {
    margin_problem.constraints.push_back({unit_diag(n + 1, i), 1.0, ConstraintSense::Equal});
  }
  for (int k = 0; k < k_users; ++k) {
    margin_problem.constraints.push_back({q[k], rhs[k], ConstraintSense::GreaterEqual});
  }
  const SdpSolution margin_sol = solve_sdp(margin_problem);

  CMatrix x = margin_sol.x;
  bool used_residual = false;
  if (mode == P4Mode::Residual && margin_sol.margin > 1e-9) {
    // Maximize the total constraint slack sum_k alpha_k, with each alpha_k a
    // diagonal entry of the augmented PSD variable.
    SdpProblem residual;
    residual.n = n + 1 + k_users;
    residual.c = CMatrix::Zero(residual.n, residual.n);
    for (int k = 0; k < k_users; ++k) residual.c(n + 1 + k, n + 1 + k) = 1.0;
    for (Eigen::Index i = 0; i <= n; ++i) {
      residual.constraints.push_back({unit_diag(residual.n, i), 1.0, ConstraintSense::Equal});
    }
    for (int k = 0; k < k_users; ++k) {
      CMatrix a = CMatrix::Zero(residual.n, residual.n);
      a.topLeftCorner(n + 1, n + 1) = q[k];
      a(n + 1 + k, n + 1 + k) = -1.0;
      residual.constraints.push_back({std::move(a), rhs[k], ConstraintSense::GreaterEqual});
    }
    const SdpSolution residual_sol = solve_sdp(residual);
    if (residual_sol.status != SdpStatus::Infeasible) {
      x = residual_sol.x.topLeftCorner(n + 1, n + 1);
      used_residual = true;
    }
  }

  auto min_margin = [&](const CVector& cand) {
    RVector theta(n);
    for (Eigen::Index i = 0; i < n; ++i) theta[i] = -std::arg(cand[i]);
    const RVector s = sinr(ch, PhaseConfig(theta), w.w);
    return (s.array() / gamma.array()).minCoeff();
  };
  // The margin optimizer doubles as a candidate source: in residual mode the
  // randomization pools candidates from both solutions (margin first, so the
  // common draws match feasibility mode), which keeps residual mode at least
  // as strong as the plain margin search.
  RandomizationResult rr =
      gaussian_randomization(margin_sol.x, min_margin, randomization_count, rng);
  if (used_residual) {
    RandomizationResult extra = gaussian_randomization(x, min_margin, randomization_count, rng);
    if (extra.best_score > rr.best_score) rr = std::move(extra);
  }

  P4Result res;
  res.phases = std::move(rr.phases);
  res.sdp_margin = margin_sol.margin;
  res.best_min_margin = rr.best_score;
  res.feasible = rr.best_score >= 1.0 - 1e-9;
  return res;
}

MultiUserSolution algorithm1(const ChannelSet& ch, const RVector& gamma,
                             const PhaseConfig& theta_init, const Algorithm1Options& opts,
                             RngStream& rng) {
  validate_targets(ch, gamma);
  if (theta_init.size() != ch.num_irs_elements()) {
    throw std::invalid_argument("algorithm1: phase initializer has wrong length");
  }
  MultiUserSolution sol;
  sol.phases = theta_init;
  sol.status = MultiUserStatus::MaxIterations;
  double prev_power = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iterations; ++it) {
    sol.precoder = solve_p3(combined_channels(ch, sol.phases), gamma, ch.noise_power);
    sol.total_power = sol.precoder.total_power();
    sol.power_trace.push_back(sol.total_power);
    sol.iterations = it + 1;
    if (prev_power - sol.total_power < opts.epsilon * prev_power) {
      sol.status = MultiUserStatus::Converged;
      break;
    }
    prev_power = sol.total_power;
    const P4Result p4 =
        solve_p4_phases(sol.precoder, ch, gamma, opts.p4_mode, opts.randomization_count, rng);
    if (p4.feasible) {
      sol.phases = p4.phases;
    } else if (p4.sdp_margin < 0.0) {
      // Certified infeasible for this precoder; keep the last feasible pair.
      sol.status = MultiUserStatus::P4Infeasible;
      break;
    }
    // Otherwise the randomization merely failed to beat the incumbent phases
    // (which stay feasible: P3 leaves every SINR tight); keep them and let
    // the fractional-decrease test terminate.
  }
  sol.sinr = sinr(ch, sol.phases, sol.precoder.w);
  return sol;
}

MultiUserSolution two_stage(const ChannelSet& ch, const RVector& gamma,
                            int randomization_count, RngStream& rng) {
  validate_targets(ch, gamma);
  RVector weights(ch.num_users());
  for (int k = 0; k < ch.num_users(); ++k) weights[k] = 1.0 / (gamma[k] * ch.noise_power.at(k));
  MultiUserSolution sol;
  sol.phases = stage1_phases(ch, weights, randomization_count, rng);
  sol.precoder = solve_p3(combined_channels(ch, sol.phases), gamma, ch.noise_power);
  sol.total_power = sol.precoder.total_power();
  sol.power_trace.push_back(sol.total_power);
  sol.sinr = sinr(ch, sol.phases, sol.precoder.w);
  sol.status = MultiUserStatus::Converged;
  sol.iterations = 1;
  return sol;
}

double zf_power(const CMatrix& h_d, const RVector& gamma, const std::vector<double>& noise_power) {
  const Eigen::Index k_users = h_d.cols();
  if (gamma.size() != k_users || static_cast<Eigen::Index>(noise_power.size()) != k_users) {
    throw std::invalid_argument("zf_power: inconsistent dimensions");
  }
  const CMatrix gram = h_d.adjoint() * h_d;
  Eigen::FullPivLU<CMatrix> lu(gram);
  if (!lu.isInvertible()) throw std::runtime_error("zf_power: rank-deficient channel");
  const CMatrix gram_inv = lu.inverse();
  double power = 0.0;
  for (Eigen::Index k = 0; k < k_users; ++k) {
    power += gamma[k] * noise_power[k] * gram_inv(k, k).real();
  }
  return power;
}

double effective_angle(const CVector& w, const CVector& h_d) {
  const double denom = w.norm() * h_d.norm();
  if (denom <= 0.0) throw std::domain_error("effective_angle: zero vector");
  return std::abs(h_d.dot(w)) / denom;
}

MaxMinRateResult max_min_rate(const ChannelSet& ch, double p_max, double rho,
                              const MaxMinRateOptions& opts, RngStream& rng) {
  if (p_max <= 0.0) throw std::invalid_argument("max_min_rate: power budget must be positive");
  if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("max_min_rate: rho must be in [0, 1]");
  const int k_users = ch.num_users();
  if (k_users < 1) throw std::invalid_argument("max_min_rate: no users");

  auto bisect = [&](double hi, const std::function<bool(double)>& feasible) {
    double lo = 0.0;
    if (hi <= opts.rate_tolerance) return 0.0;
    if (feasible(hi)) return hi;
    while (hi - lo > opts.rate_tolerance) {
      const double mid = 0.5 * (lo + hi);
      if (feasible(mid)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return lo;
  };

  // Phase 1: AP only, MMSE precoding on the direct channels.
  std::vector<CVector> direct(k_users);
  double hi1 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < k_users; ++k) {
    direct[k] = ch.h_d.at(k);
    hi1 = std::min(hi1, std::log2(1.0 + p_max * direct[k].squaredNorm() / ch.noise_power.at(k)));
  }
  MaxMinRateResult res;
  auto phase1_feasible = [&](double r) {
    const RVector gamma = RVector::Constant(k_users, std::exp2(r) - 1.0);
    try {
      return solve_p3(direct, gamma, ch.noise_power).total_power() <= p_max;
    } catch (const std::runtime_error&) {
      return false;
    }
  };
  res.rate_phase1 = bisect(hi1, phase1_feasible);

  // Phase 2: AP + IRS via the alternating algorithm, initialized once by the
  // weighted-gain SDR (target-independent up to a common scale).
  if (ch.num_irs_elements() == 0) {
    res.rate_phase2 = res.rate_phase1;
  } else {
    RVector unit_weights(k_users);
    for (int k = 0; k < k_users; ++k) unit_weights[k] = 1.0 / ch.noise_power.at(k);
    const PhaseConfig init =
        stage1_phases(ch, unit_weights, opts.alg1.randomization_count, rng);
    double hi2 = std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_users; ++k) {
      double reach = ch.h_d.at(k).norm();
      for (int i = 0; i < ch.num_irs_elements(); ++i) {
        reach += std::abs(ch.h_r.at(k)[i]) * ch.g.row(i).norm();
      }
      hi2 = std::min(hi2, std::log2(1.0 + p_max * reach * reach / ch.noise_power.at(k)));
    }
    auto phase2_feasible = [&](double r) {
      const RVector gamma = RVector::Constant(k_users, std::exp2(r) - 1.0);
      try {
        MultiUserSolution sol = algorithm1(ch, gamma, init, opts.alg1, rng);
        if (sol.total_power <= p_max) {
          res.precoder = std::move(sol.precoder);
          res.phases = std::move(sol.phases);
          return true;
        }
      } catch (const std::runtime_error&) {
      }
      return false;
    };
    res.rate_phase2 = bisect(hi2, phase2_feasible);
  }

  res.rate = rho * res.rate_phase1 + (1.0 - rho) * res.rate_phase2;
  return res;
}

}  // namespace irsbf
