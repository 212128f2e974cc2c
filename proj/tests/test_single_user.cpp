// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "irsbf/channel.hpp"
#include "irsbf/single_user.hpp"

using namespace irsbf;

namespace {

ChannelSet random_instance(int n, int m, RngStream& rng, double scale = 1.0) {
  ChannelSet ch;
  ch.g = sample_cscg_matrix(n, m, scale, rng);
  ch.h_r = {n > 0 ? sample_cscg(n, scale, rng) : CVector(0)};
  ch.h_d = {sample_cscg(m, scale, rng)};
  ch.noise_power = {1.0};
  return ch;
}

double combined_gain(const ChannelSet& ch, const PhaseConfig& ph, const CVector& beam) {
  return std::norm(combined_channel(ch, ph, 0).dot(beam));
}

// Best combined gain over an exhaustive per-phase grid (M = 1 only). The
// innermost phase is optimized in closed form over the grid, keeping the
// total cost at grid^(N-1).
double grid_best_gain(const ChannelSet& ch, int grid) {
  const int n = ch.num_irs_elements();
  std::vector<Complex> a(n);
  for (int i = 0; i < n; ++i) a[i] = std::conj(ch.h_r[0][i]) * ch.g(i, 0);
  const Complex b = std::conj(ch.h_d[0][0]);
  double best = 0.0;
  auto grid_cos_max = [&](double phase) {
    // max over k of cos(2 pi k / grid + phase): attained at the grid point
    // nearest to -phase.
    const long k0 = std::lround(-phase * grid / (2.0 * M_PI));
    double m = -1.0;
    for (long k = k0 - 1; k <= k0 + 1; ++k) m = std::max(m, std::cos(2.0 * M_PI * k / grid + phase));
    return m;
  };
  std::vector<int> idx(std::max(0, n - 1), 0);
  for (;;) {
    Complex partial = b;
    for (int i = 0; i + 1 < n; ++i) {
      partial += std::exp(Complex(0.0, 2.0 * M_PI * idx[i] / grid)) * a[i];
    }
    double gain;
    if (n == 0) {
      gain = std::norm(partial);
    } else {
      const Complex last = a[n - 1];
      const double c = std::norm(partial) + std::norm(last);
      const double r = 2.0 * std::abs(partial) * std::abs(last);
      const double phase = std::arg(last) - std::arg(partial);
      gain = c + r * grid_cos_max(phase);
    }
    best = std::max(best, gain);
    int i = 0;
    for (; i + 1 < n; ++i) {
      if (++idx[i] < grid) break;
      idx[i] = 0;
    }
    if (n <= 1 || i + 1 >= n) break;
  }
  return best;
}

}  // namespace

TEST_CASE("mrt_beamformer basics and optimality") {
  CVector h(2);
  h << 1.0, 0.0;
  CHECK((mrt_beamformer(h) - h).norm() <= 1e-12);

  h << 0.0, Complex(0.0, 1.0);
  const CVector w = mrt_beamformer(h);
  CHECK(std::abs(h.dot(w) - Complex(1.0)) <= 1e-12);

  RngStream rng(31, 0);
  const CVector hr = sample_cscg(6, 1.0, rng);
  const CVector wr = mrt_beamformer(hr);
  CHECK(std::abs(hr.dot(wr)) == doctest::Approx(hr.norm()).epsilon(1e-12));
  for (int t = 0; t < 1000; ++t) {
    CVector u = sample_cscg(6, 1.0, rng);
    u /= u.norm();
    CHECK(std::abs(hr.dot(u)) <= hr.norm() * (1.0 + 1e-12));
  }
  CHECK_THROWS_AS(mrt_beamformer(CVector::Zero(3)), std::domain_error);
}

TEST_CASE("optimal_phases_closed_form scalar example") {
  ChannelSet ch;
  ch.g = CMatrix::Ones(1, 1);
  ch.h_r = {CVector::Ones(1)};
  CVector hd(1);
  // Stored as the column h_d; the direct row term is h_d^H = e^{j pi/4}.
  hd << std::exp(Complex(0.0, -M_PI / 4.0));
  ch.h_d = {hd};
  ch.noise_power = {1.0};
  const PhaseConfig ph = optimal_phases_closed_form(ch, CVector::Ones(1));
  CHECK(ph.theta[0] == doctest::Approx(M_PI / 4.0).epsilon(1e-12));
}

TEST_CASE("optimal_phases_closed_form achieves the triangle equality") {
  RngStream rng(32, 0);
  const ChannelSet ch = random_instance(6, 3, rng);
  const CVector beam = mrt_beamformer(ch.h_d[0]);
  const PhaseConfig ph = optimal_phases_closed_form(ch, beam);
  const CVector a = effective_irs_channel(ch) * beam;
  double expect = std::abs(std::conj(Complex(ch.h_d[0].dot(beam))));
  for (int i = 0; i < 6; ++i) expect += std::abs(a[i]);
  const double got = std::abs(combined_channel(ch, ph, 0).dot(beam));
  CHECK(got == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("closed-form phases ignore reflected amplitudes") {
  RngStream rng(33, 0);
  ChannelSet ch = random_instance(5, 2, rng);
  const CVector beam = mrt_beamformer(ch.h_d[0]);
  const PhaseConfig ph1 = optimal_phases_closed_form(ch, beam);
  ch.h_r[0] *= 7.5;  // positive rescale of every amplitude
  const PhaseConfig ph2 = optimal_phases_closed_form(ch, beam);
  CHECK((ph1.theta - ph2.theta).norm() <= 1e-12);
}

TEST_CASE("solve_p2_sdr degenerates to the no-IRS benchmark without an IRS path") {
  RngStream rng(34, 0);
  ChannelSet ch = random_instance(3, 4, rng);
  ch.h_r[0].setZero();
  RngStream solver_rng(34, 1);
  const SingleUserSolution sdr = solve_p2_sdr(ch, db_to_linear(10.0), 100, solver_rng);
  const SingleUserSolution no_irs = solve_no_irs(ch, db_to_linear(10.0));
  CHECK(sdr.power == doctest::Approx(no_irs.power).epsilon(1e-6));
}

TEST_CASE("solvers match an exhaustive phase grid at M = 1") {
  RngStream rng(35, 0);
  const double gamma = db_to_linear(10.0);
  for (int t = 0; t < 8; ++t) {
    const int n = 1 + t % 3;
    const ChannelSet ch = random_instance(n, 1, rng);
    const double best = grid_best_gain(ch, 360);
    RngStream solver_rng = rng.derive(t);
    const SingleUserSolution sdr = solve_p2_sdr(ch, gamma, 500, solver_rng);
    const SingleUserSolution alt = solve_p2_alternating(ch, gamma, 1e-8, 200);
    const double sdr_gain = gamma * ch.noise_power[0] / sdr.power;
    const double alt_gain = gamma * ch.noise_power[0] / alt.power;
    CHECK(sdr_gain >= best * (1.0 - 2e-3));
    CHECK(alt_gain >= best * (1.0 - 2e-3));
  }
}

TEST_CASE("alternating solver: monotone trace, feasibility, bound soundness") {
  RngStream rng(36, 0);
  const double gamma = db_to_linear(10.0);
  for (int t = 0; t < 5; ++t) {
    const ChannelSet ch = random_instance(12, 4, rng, 1e-6);
    std::vector<double> trace;
    const SingleUserSolution alt = solve_p2_alternating(ch, gamma, 1e-6, 100, &trace);
    REQUIRE(!trace.empty());
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] * (1.0 + 1e-12));
    const double snr = combined_gain(ch, alt.phases, alt.beam) * alt.power / ch.noise_power[0];
    CHECK(snr >= gamma * (1.0 - 1e-6));

    RngStream solver_rng = rng.derive(100 + t);
    const SingleUserSolution sdr = solve_p2_sdr(ch, gamma, 500, solver_rng);
    // The SDR transmit-power lower bound is sound for every solver.
    CHECK(sdr.lower_bound <= alt.power * (1.0 + 1e-5));
    CHECK(sdr.lower_bound <= sdr.power * (1.0 + 1e-5));
    CHECK(sdr.lower_bound <= solve_ap_user_mrt(ch, gamma).power * (1.0 + 1e-5));
    CHECK(sdr.lower_bound <= solve_no_irs(ch, gamma).power * (1.0 + 1e-5));
  }
}

TEST_CASE("alternating solver with a dead IRS converges immediately") {
  RngStream rng(37, 0);
  ChannelSet ch = random_instance(4, 3, rng);
  ch.g.setZero();
  std::vector<double> trace;
  const SingleUserSolution alt = solve_p2_alternating(ch, 2.0, 1e-4, 100, &trace);
  const SingleUserSolution no_irs = solve_no_irs(ch, 2.0);
  CHECK(alt.power == doctest::Approx(no_irs.power).epsilon(1e-9));
  CHECK(trace.size() <= 2);
}

TEST_CASE("fixed-beam benchmarks meet the SNR target exactly") {
  RngStream rng(38, 0);
  const ChannelSet ch = random_instance(6, 4, rng);
  const double gamma = db_to_linear(12.0);
  RngStream phase_rng = rng.derive(1);
  for (const SingleUserSolution& s :
       {solve_ap_user_mrt(ch, gamma), solve_ap_irs_mrt(ch, gamma),
        solve_random_phase(ch, gamma, phase_rng)}) {
    const double snr = combined_gain(ch, s.phases, s.beam) * s.power / ch.noise_power[0];
    CHECK(snr == doctest::Approx(gamma).epsilon(1e-9));
  }
  // The no-IRS benchmark is scored on the direct link alone.
  const SingleUserSolution bare = solve_no_irs(ch, gamma);
  const double direct = std::norm(ch.h_d[0].dot(bare.beam)) * bare.power / ch.noise_power[0];
  CHECK(direct == doctest::Approx(gamma).epsilon(1e-9));
}

TEST_CASE("scaling law closed forms") {
  CHECK(scaling_law_prediction(100, 1.0, 1.0, 1.0, PhaseMode::Optimal) ==
        doctest::Approx(1e4 * M_PI * M_PI / 16.0).epsilon(1e-12));
  CHECK(scaling_law_prediction(100, 1.0, 1.0, 1.0, PhaseMode::Identity) ==
        doctest::Approx(100.0).epsilon(1e-12));
  const double ratio = scaling_law_prediction(64, 2.0, 0.5, 0.25, PhaseMode::Optimal) /
                       scaling_law_prediction(64, 2.0, 0.5, 0.25, PhaseMode::Random);
  CHECK(ratio == doctest::Approx(64.0 * M_PI * M_PI / 16.0).epsilon(1e-12));
}

TEST_CASE("empirical received power approaches the asymptotes") {
  RngStream rng(39, 0);
  const double opt = empirical_received_power(2000, 1.0, 1.0, 1.0, PhaseMode::Optimal, 200, rng);
  CHECK(opt / scaling_law_prediction(2000, 1.0, 1.0, 1.0, PhaseMode::Optimal) ==
        doctest::Approx(1.0).epsilon(0.05));
  const double rnd = empirical_received_power(2000, 1.0, 1.0, 1.0, PhaseMode::Random, 200, rng);
  CHECK(rnd / scaling_law_prediction(2000, 1.0, 1.0, 1.0, PhaseMode::Random) ==
        doctest::Approx(1.0).epsilon(0.15));
}
