// SPDX-License-Identifier: Apache-2.0
//
// Dense complex Hermitian SDP solver (primal-dual interior point on the real
// symmetric embedding) plus the SDR lifting and Gaussian randomization used
// by the phase-shift optimizations.
#pragma once

#include <functional>
#include <vector>

#include "irsbf/channel.hpp"
#include "irsbf/numerics.hpp"

namespace irsbf {

enum class ConstraintSense { Equal, GreaterEqual };

struct SdpConstraint {
  CMatrix a;  // Hermitian
  double b = 0.0;
  ConstraintSense sense = ConstraintSense::Equal;
};

// maximize tr(C X)  s.t.  tr(A_i X) {=, >=} b_i,  X >= 0.
struct SdpProblem {
  Eigen::Index n = 0;
  CMatrix c;
  std::vector<SdpConstraint> constraints;
  bool feasibility_only = false;

  void validate() const;
};

enum class SdpStatus { Optimal, Infeasible, MaxIterations };

struct SdpSolution {
  CMatrix x;
  double objective = 0.0;
  // One multiplier per constraint; sum_i duals_i A_i - C is PSD at the
  // optimum and sum_i b_i duals_i equals the objective.
  std::vector<double> duals;
  SdpStatus status = SdpStatus::MaxIterations;
  double relative_gap = 0.0;
  double feasibility_residual = 0.0;
  int iterations = 0;
  // Feasibility problems: optimal value of the minimum constraint slack.
  double margin = 0.0;
};

struct SdpOptions {
  double gap_tol = 1e-6;       // relative duality gap
  double feas_tol = 2e-8;      // absolute feasibility residual
  int max_iterations = 200;
};

SdpSolution solve_sdp(const SdpProblem& p, const SdpOptions& opts = {});

// Problem (N+1)-dim: maximize tr(R V) + ||h_d||^2 with diag(V) = 1, V >= 0,
// where R stacks Phi Phi^H with the Phi h_d border (Phi = diag(h_r^H) G).
SdpProblem lift_single_user(const CMatrix& phi, const CVector& h_d);

// Border block matrix used by both the single-user lift and the multiuser
// constraint matrices: [[a a^H, a conj(b)], [b a^H, 0]].
CMatrix lift_outer(const CVector& a, Complex b);

// Draws candidates r = U Lambda^{1/2} xi, de-lifts by the last entry and
// projects entrywise to unit modulus; returns the best-scoring phase vector.
// The principal-eigenvector de-lift is always included as a candidate. The
// score callback receives the unit-modulus lifted variable x (entries
// e^{-j theta_n}); lifted objectives evaluate directly on it.
struct RandomizationResult {
  PhaseConfig phases;
  double best_score = 0.0;
};
RandomizationResult gaussian_randomization(const CMatrix& v,
                                           const std::function<double(const CVector&)>& score,
                                           int count, RngStream& rng);

}  // namespace irsbf
