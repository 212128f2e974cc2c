// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "irsbf/channel.hpp"
#include "irsbf/multi_user.hpp"
#include "irsbf/sdp.hpp"
#include "irsbf/single_user.hpp"

using namespace irsbf;

namespace {

ChannelSet random_instance(int k, int n, int m, RngStream& rng, double noise = 1.0) {
  ChannelSet ch;
  ch.g = sample_cscg_matrix(n, m, 1.0, rng);
  for (int u = 0; u < k; ++u) {
    ch.h_r.push_back(n > 0 ? sample_cscg(n, 1.0, rng) : CVector(0));
    ch.h_d.push_back(sample_cscg(m, 1.0, rng));
    ch.noise_power.push_back(noise);
  }
  return ch;
}

// Independent SDP formulation of P3 on the block-diagonal lifting
// X = diag(W_1, ..., W_K); the relaxation is tight for this problem class.
double p3_sdp_oracle(const std::vector<CVector>& h, const RVector& gamma,
                     const std::vector<double>& noise) {
  const int k = static_cast<int>(h.size());
  const Eigen::Index m = h[0].size();
  SdpProblem p;
  p.n = k * m;
  p.c = -CMatrix::Identity(p.n, p.n);  // maximize -power
  for (int i = 0; i < k; ++i) {
    SdpConstraint c;
    c.a = CMatrix::Zero(p.n, p.n);
    const CMatrix outer = h[i] * h[i].adjoint();
    for (int j = 0; j < k; ++j) {
      const double w = (j == i) ? 1.0 / gamma[i] : -1.0;
      c.a.block(j * m, j * m, m, m) = w * outer;
    }
    c.b = noise[i];
    c.sense = ConstraintSense::GreaterEqual;
    p.constraints.push_back(c);
  }
  const SdpSolution sol = solve_sdp(p);
  REQUIRE(sol.status == SdpStatus::Optimal);
  return -sol.objective;
}

std::vector<CVector> combined(const ChannelSet& ch, const PhaseConfig& ph) {
  std::vector<CVector> h;
  for (int u = 0; u < ch.num_users(); ++u) h.push_back(combined_channel(ch, ph, u));
  return h;
}

}  // namespace

TEST_CASE("feasibility_precoder hits every target exactly") {
  RngStream rng(41, 0);
  for (int t = 0; t < 10; ++t) {
    const ChannelSet ch = random_instance(4, 6, 8, rng);
    RVector gamma(4);
    for (int u = 0; u < 4; ++u) gamma[u] = db_to_linear(rng.uniform(0.0, 20.0));
    const Precoder w = feasibility_precoder(ch, gamma);
    const RVector s = sinr(ch, PhaseConfig(6), w.w);
    for (int u = 0; u < 4; ++u) CHECK(s[u] == doctest::Approx(gamma[u]).epsilon(1e-9));
  }
}

TEST_CASE("feasibility_precoder single-user reduction") {
  RngStream rng(42, 0);
  const ChannelSet ch = random_instance(1, 3, 4, rng, 2.0);
  RVector gamma(1);
  gamma << 5.0;
  const Precoder w = feasibility_precoder(ch, gamma);
  const CVector h = combined_channel(ch, PhaseConfig(3), 0);
  const CVector expect = std::sqrt(gamma[0] * 2.0) * h / h.squaredNorm();
  CHECK((w.w[0] - expect).norm() <= 1e-9 * expect.norm());
}

TEST_CASE("aligned direct channels: feasible with IRS, rank error without") {
  RngStream rng(43, 0);
  ChannelSet ch = random_instance(2, 4, 4, rng);
  ch.h_d[1] = 2.0 * ch.h_d[0];  // aligned direct channels
  RVector gamma(2);
  gamma << 2.0, 2.0;
  CHECK_NOTHROW(feasibility_precoder(ch, gamma));  // IRS separates the users

  ChannelSet no_irs = ch;
  no_irs.h_r[0].setZero();
  no_irs.h_r[1].setZero();
  no_irs.g.setZero();
  CHECK_THROWS_AS(feasibility_precoder(no_irs, gamma), std::runtime_error);
}

TEST_CASE("solve_p3 single-user reduction is MRT") {
  RngStream rng(44, 0);
  const CVector h = sample_cscg(5, 1.0, rng);
  RVector gamma(1);
  gamma << db_to_linear(10.0);
  const Precoder w = solve_p3({h}, gamma, {3.0});
  CHECK(w.total_power() == doctest::Approx(gamma[0] * 3.0 / h.squaredNorm()).epsilon(1e-9));
  // Direction parallel to h.
  CHECK(std::abs(h.dot(w.w[0])) == doctest::Approx(h.norm() * w.w[0].norm()).epsilon(1e-9));
}

TEST_CASE("solve_p3 orthogonal channels decouple") {
  CVector h1 = CVector::Zero(4), h2 = CVector::Zero(4);
  h1[0] = 2.0;
  h2[1] = Complex(0.0, 1.5);
  RVector gamma(2);
  gamma << 3.0, 7.0;
  const Precoder w = solve_p3({h1, h2}, gamma, {1.0, 0.5});
  const double expect = 3.0 * 1.0 / h1.squaredNorm() + 7.0 * 0.5 / h2.squaredNorm();
  CHECK(w.total_power() == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("solve_p3 matches the SDP cross-oracle with tight constraints") {
  RngStream rng(45, 0);
  for (int t = 0; t < 5; ++t) {
    const int k = 2 + t % 3;
    const int m = 4 + t % 5;
    std::vector<CVector> h;
    std::vector<double> noise;
    RVector gamma(k);
    for (int u = 0; u < k; ++u) {
      h.push_back(sample_cscg(m, 1.0, rng));
      noise.push_back(1.0);
      gamma[u] = db_to_linear(rng.uniform(0.0, 12.0));
    }
    const Precoder w = solve_p3(h, gamma, noise);
    const double oracle = p3_sdp_oracle(h, gamma, noise);
    CHECK(w.total_power() == doctest::Approx(oracle).epsilon(1e-4));
    // All SINR constraints are met with equality.
    for (int u = 0; u < k; ++u) {
      double intf = noise[u];
      for (int j = 0; j < k; ++j) {
        if (j != u) intf += std::norm(h[u].dot(w.w[j]));
      }
      const double s = std::norm(h[u].dot(w.w[u])) / intf;
      CHECK(s == doctest::Approx(gamma[u]).epsilon(1e-5));
    }
  }
}

TEST_CASE("solve_p4_phases single-user reduction matches the closed form") {
  RngStream rng(46, 0);
  ChannelSet ch = random_instance(1, 6, 3, rng);
  const CVector beam = mrt_beamformer(ch.h_d[0]);
  const PhaseConfig opt = optimal_phases_closed_form(ch, beam);
  const double best_gain = std::norm(combined_channel(ch, opt, 0).dot(beam));
  // Power chosen so the optimal phases exceed the target with 20% slack.
  RVector gamma(1);
  gamma << 0.8 * best_gain / ch.noise_power[0];
  Precoder w;
  w.w = {beam};
  RngStream solver_rng(46, 1);
  const P4Result res = solve_p4_phases(w, ch, gamma, P4Mode::Residual, 1000, solver_rng);
  CHECK(res.feasible);
  const double got = std::norm(combined_channel(ch, res.phases, 0).dot(beam));
  CHECK(got >= best_gain * 0.97);  // randomization tolerance
}

TEST_CASE("solve_p4_phases with dead IRS mirrors the direct-link SINRs") {
  RngStream rng(47, 0);
  ChannelSet ch = random_instance(2, 2, 4, rng);
  ch.h_r[0].setZero();
  ch.h_r[1].setZero();
  RVector gamma(2);
  gamma << 1.0, 1.0;
  const Precoder w = feasibility_precoder(ch, gamma);
  RngStream solver_rng(47, 1);
  const P4Result res = solve_p4_phases(w, ch, gamma, P4Mode::Residual, 50, solver_rng);
  CHECK(res.feasible);  // W already meets the targets; phases are irrelevant
  CHECK(res.best_min_margin == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("solve_p4_phases matches a two-element phase grid") {
  RngStream rng(48, 0);
  const ChannelSet ch = random_instance(2, 2, 4, rng);
  RVector gamma(2);
  gamma << 2.0, 2.0;
  const Precoder w = feasibility_precoder(ch, gamma);
  const int grid = 180;
  double best = 0.0;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      RVector t(2);
      t << 2.0 * M_PI * i / grid, 2.0 * M_PI * j / grid;
      const RVector s = sinr(ch, PhaseConfig(t), w.w);
      best = std::max(best, (s.array() / gamma.array()).minCoeff());
    }
  }
  RngStream solver_rng(48, 1);
  const P4Result res = solve_p4_phases(w, ch, gamma, P4Mode::Residual, 1000, solver_rng);
  CHECK(res.best_min_margin >= best * (1.0 - 0.02));
}

TEST_CASE("algorithm1 vanishing targets need vanishing power") {
  RngStream rng(49, 0);
  const ChannelSet ch = random_instance(2, 4, 4, rng);
  RVector gamma = RVector::Constant(2, 1e-8);
  RngStream solver_rng(49, 1);
  const MultiUserSolution sol = algorithm1(ch, gamma, PhaseConfig(4), {}, solver_rng);
  CHECK(sol.status == MultiUserStatus::Converged);
  CHECK(sol.total_power <= 1e-6);
}

TEST_CASE("algorithm1 power trace is non-increasing and targets are met") {
  RngStream rng(50, 0);
  const ChannelSet ch = random_instance(2, 8, 4, rng);
  RVector gamma = RVector::Constant(2, db_to_linear(10.0));
  RngStream solver_rng(50, 1);
  const MultiUserSolution sol = algorithm1(ch, gamma, PhaseConfig(8), {}, solver_rng);
  REQUIRE(!sol.power_trace.empty());
  for (std::size_t i = 1; i < sol.power_trace.size(); ++i) {
    CHECK(sol.power_trace[i] <= sol.power_trace[i - 1] * (1.0 + 1e-12));
  }
  for (int u = 0; u < 2; ++u) CHECK(sol.sinr[u] >= gamma[u] * (1.0 - 1e-5));
}

TEST_CASE("residual mode converges at least as low as feasibility mode") {
  RngStream rng(51, 0);
  double res_total = 0.0, feas_total = 0.0;
  for (int t = 0; t < 5; ++t) {
    const ChannelSet ch = random_instance(3, 8, 4, rng);
    RVector gamma = RVector::Constant(3, db_to_linear(10.0));
    Algorithm1Options opts;
    opts.randomization_count = 300;
    opts.p4_mode = P4Mode::Residual;
    RngStream r1(51, 10 + t);
    res_total += algorithm1(ch, gamma, PhaseConfig(8), opts, r1).total_power;
    opts.p4_mode = P4Mode::Feasibility;
    RngStream r2(51, 10 + t);
    feas_total += algorithm1(ch, gamma, PhaseConfig(8), opts, r2).total_power;
  }
  CHECK(res_total <= feas_total * 1.02);
}

TEST_CASE("two_stage single-user case matches the SDR solver") {
  RngStream rng(52, 0);
  const ChannelSet ch = random_instance(1, 6, 3, rng);
  RVector gamma(1);
  gamma << db_to_linear(10.0);
  RngStream r1(52, 1), r2(52, 2);
  const MultiUserSolution ts = two_stage(ch, gamma, 1000, r1);
  const SingleUserSolution sdr = solve_p2_sdr(ch, gamma[0], 1000, r2);
  CHECK(ts.total_power == doctest::Approx(sdr.power).epsilon(0.02));
}

TEST_CASE("two_stage is invariant under user relabeling") {
  RngStream rng(53, 0);
  ChannelSet ch = random_instance(2, 4, 4, rng);
  RVector gamma(2);
  gamma << 4.0, 4.0;
  RngStream r1(53, 1), r2(53, 1);
  const MultiUserSolution a = two_stage(ch, gamma, 500, r1);
  std::swap(ch.h_r[0], ch.h_r[1]);
  std::swap(ch.h_d[0], ch.h_d[1]);
  const MultiUserSolution b = two_stage(ch, gamma, 500, r2);
  CHECK(a.total_power == doctest::Approx(b.total_power).epsilon(1e-9));
}

TEST_CASE("zf_power closed forms and dominance") {
  RVector gamma(3);
  gamma << 2.0, 3.0, 4.0;
  const std::vector<double> noise = {1.0, 1.0, 1.0};
  CHECK(zf_power(CMatrix::Identity(3, 3), gamma, noise) == doctest::Approx(9.0).epsilon(1e-12));

  RngStream rng(54, 0);
  for (int t = 0; t < 5; ++t) {
    CMatrix hd = sample_cscg_matrix(6, 3, 1.0, rng);  // M x K columns h_k
    std::vector<CVector> h;
    for (int u = 0; u < 3; ++u) h.push_back(hd.col(u));
    const double zf = zf_power(hd, gamma, noise);
    const double mmse = solve_p3(h, gamma, noise).total_power();
    CHECK(zf >= mmse * (1.0 - 1e-9));
  }
}

TEST_CASE("effective_angle endpoints and scale invariance") {
  RngStream rng(55, 0);
  const CVector h = sample_cscg(4, 1.0, rng);
  CHECK(effective_angle(h, h) == doctest::Approx(1.0).epsilon(1e-12));
  CVector perp = sample_cscg(4, 1.0, rng);
  perp -= h * (h.dot(perp) / h.squaredNorm());
  CHECK(effective_angle(perp, h) <= 1e-12);
  const CVector w = sample_cscg(4, 1.0, rng);
  const double base = effective_angle(w, h);
  CHECK(base > 0.0);
  CHECK(base < 1.0);
  CHECK(effective_angle(3.0 * w, 0.5 * h) == doctest::Approx(base).epsilon(1e-12));
  CHECK_THROWS_AS(effective_angle(CVector::Zero(4), h), std::domain_error);
}

TEST_CASE("max_min_rate reductions and monotonicity in rho") {
  RngStream rng(56, 0);
  const ChannelSet ch = random_instance(2, 4, 3, rng);
  MaxMinRateOptions opts;
  opts.rate_tolerance = 0.01;
  opts.alg1.randomization_count = 200;
  opts.alg1.max_iterations = 5;

  RngStream r0(56, 1);
  const MaxMinRateResult at0 = max_min_rate(ch, 10.0, 0.0, opts, r0);
  CHECK(at0.rate == doctest::Approx(at0.rate_phase2).epsilon(1e-12));
  CHECK(at0.rate_phase2 >= at0.rate_phase1 - opts.rate_tolerance);

  RngStream r5(56, 1);
  const MaxMinRateResult at5 = max_min_rate(ch, 10.0, 0.5, opts, r5);
  CHECK(at5.rate ==
        doctest::Approx(0.5 * at5.rate_phase1 + 0.5 * at5.rate_phase2).epsilon(1e-12));
  CHECK(at5.rate <= at0.rate + opts.rate_tolerance);

  // Without reflecting elements the two phases coincide.
  ChannelSet bare = ch;
  bare.g = CMatrix::Zero(0, 3);
  bare.h_r = {CVector(0), CVector(0)};
  RngStream rb(56, 2);
  const MaxMinRateResult none = max_min_rate(bare, 10.0, 0.3, opts, rb);
  CHECK(none.rate_phase2 == doctest::Approx(none.rate_phase1).epsilon(1e-12));
}
