// SPDX-License-Identifier: Apache-2.0
#include "irsbf/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace irsbf {

namespace {

// ---------------------------------------------------------------------------
// Internal real symmetric IPM.
//
// Solves   min <C, X>  s.t.  <A_i, X> {=, >=} b_i,  X >= 0   (X real sym)
// with an infeasible-start Mehrotra predictor-corrector using the HKM
// direction. Inequality rows carry a primal slack s_i >= 0 whose dual
// multiplier is y_i >= 0; equality rows have free y_i.
// ---------------------------------------------------------------------------

struct RealConstraint {
  bool diagonal = false;
  // diagonal: sparse (index, value) entries; dense: full matrix.
  std::vector<std::pair<int, double>> diag_entries;
  RMatrix a;
  double b = 0.0;
  bool inequality = false;
};

struct RealProblem {
  int n = 0;
  RMatrix c;  // minimized
  std::vector<RealConstraint> constraints;
};

struct RealResult {
  RMatrix x;
  RVector y;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double relative_gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

double inner(const RealConstraint& c, const RMatrix& s) {
  if (c.diagonal) {
    double acc = 0.0;
    for (const auto& [p, v] : c.diag_entries) acc += v * s(p, p);
    return acc;
  }
  return c.a.cwiseProduct(s).sum();
}

void accumulate(RMatrix& dst, const RealConstraint& c, double w) {
  if (w == 0.0) return;
  if (c.diagonal) {
    for (const auto& [p, v] : c.diag_entries) dst(p, p) += w * v;
  } else {
    dst += w * c.a;
  }
}

RMatrix sym(const RMatrix& m) { return 0.5 * (m + m.transpose()); }

// Max step alpha so that P + alpha * D stays PSD, given the Cholesky factor
// of P. Returns +inf when D has no negative curvature in P's metric.
double max_psd_step(const Eigen::LLT<RMatrix>& llt, const RMatrix& d) {
  RMatrix w = llt.matrixL().solve(d);
  w = llt.matrixL().solve(RMatrix(w.transpose()));
  Eigen::SelfAdjointEigenSolver<RMatrix> es(w, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

RealResult solve_real_sdp(const RealProblem& prob, const SdpOptions& opts) {
  const int n = prob.n;
  const int m = static_cast<int>(prob.constraints.size());
  RealResult res;

  double data_scale = prob.c.cwiseAbs().maxCoeff();
  double b_scale = 0.0;
  for (const auto& c : prob.constraints) {
    b_scale = std::max(b_scale, std::abs(c.b));
    data_scale = std::max(data_scale, c.diagonal ? 1.0 : c.a.cwiseAbs().maxCoeff());
  }

  RMatrix x = RMatrix::Identity(n, n) * std::max(1.0, b_scale);
  RMatrix z = RMatrix::Identity(n, n) * std::max(1.0, data_scale);
  RVector y = RVector::Zero(m);
  RVector s = RVector::Zero(m);
  int m_ineq = 0;
  for (int i = 0; i < m; ++i) {
    if (prob.constraints[i].inequality) {
      ++m_ineq;
      s[i] = std::max(1.0, b_scale);
      y[i] = std::max(1.0, data_scale);
    }
  }
  const double nu = n + m_ineq;

  RVector rp(m);
  RMatrix rd(n, n);
  std::vector<int> dense_idx;
  for (int i = 0; i < m; ++i) {
    if (!prob.constraints[i].diagonal) dense_idx.push_back(i);
  }

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter;
    // Residuals and objective values.
    for (int i = 0; i < m; ++i) {
      rp[i] = prob.constraints[i].b - inner(prob.constraints[i], x) + s[i];
    }
    rd = prob.c - z;
    for (int i = 0; i < m; ++i) accumulate(rd, prob.constraints[i], -y[i]);

    const double pobj = prob.c.cwiseProduct(x).sum();
    double dobj = 0.0;
    for (int i = 0; i < m; ++i) dobj += prob.constraints[i].b * y[i];
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double pres = m > 0 ? rp.cwiseAbs().maxCoeff() : 0.0;
    const double dres = rd.cwiseAbs().maxCoeff();
    res.primal_obj = pobj;
    res.dual_obj = dobj;
    res.relative_gap = gap;
    res.primal_residual = pres;
    res.dual_residual = dres;
    res.x = x;
    res.y = y;
    if (pres <= opts.feas_tol * (1.0 + b_scale) &&
        dres <= 100.0 * opts.feas_tol * (1.0 + data_scale) && gap <= opts.gap_tol) {
      res.converged = true;
      return res;
    }

    const double mu = (x.cwiseProduct(z).sum() + s.dot(y)) / nu;

    Eigen::LLT<RMatrix> llt_z(z);
    Eigen::LLT<RMatrix> llt_x(x);
    if (llt_z.info() != Eigen::Success || llt_x.info() != Eigen::Success) return res;
    const RMatrix zinv = llt_z.solve(RMatrix::Identity(n, n));

    // Schur complement M_ij = <A_i, H(A_j)>, H(M) = sym(Zinv M X).
    RMatrix schur = RMatrix::Zero(m, m);
    const RMatrix pelem = zinv.cwiseProduct(x);
    for (int i = 0; i < m; ++i) {
      const auto& ci = prob.constraints[i];
      if (!ci.diagonal) continue;
      for (int j = 0; j <= i; ++j) {
        const auto& cj = prob.constraints[j];
        if (!cj.diagonal) continue;
        double acc = 0.0;
        for (const auto& [p, vp] : ci.diag_entries) {
          for (const auto& [q, vq] : cj.diag_entries) acc += vp * vq * pelem(p, q);
        }
        schur(i, j) = acc;
        schur(j, i) = acc;
      }
    }
    for (int j : dense_idx) {
      const RMatrix t = sym(zinv * prob.constraints[j].a * x);
      for (int i = 0; i < m; ++i) {
        const double v = inner(prob.constraints[i], t);
        schur(i, j) = v;
        schur(j, i) = v;
      }
    }
    for (int i = 0; i < m; ++i) {
      if (prob.constraints[i].inequality) schur(i, i) += s[i] / y[i];
    }
    Eigen::LDLT<RMatrix> ldlt(schur);
    if (ldlt.info() != Eigen::Success) {
      schur.diagonal().array() += 1e-12 * (1.0 + schur.diagonal().cwiseAbs().maxCoeff());
      ldlt.compute(schur);
      if (ldlt.info() != Eigen::Success) return res;
    }

    const RMatrix h_rd = sym(zinv * rd * x);

    RMatrix dx(n, n), dz(n, n);
    RVector dy(m), ds(m);
    auto direction = [&](double sigma, const RMatrix& corr_sdp, const RVector& corr_lp) {
      // G0 = sigma*mu*Zinv - X - corr_sdp
      RMatrix g0 = sigma * mu * zinv - x - corr_sdp;
      RVector rhs(m);
      for (int i = 0; i < m; ++i) {
        const auto& c = prob.constraints[i];
        double v = inner(c, g0) - inner(c, h_rd);
        if (c.inequality) v += -sigma * mu / y[i] + s[i] + corr_lp[i] / y[i];
        rhs[i] = rp[i] - v;
      }
      dy = ldlt.solve(rhs);
      dz = rd;
      for (int i = 0; i < m; ++i) accumulate(dz, prob.constraints[i], -dy[i]);
      dx = sym(g0 - sym(zinv * dz * x));
      for (int i = 0; i < m; ++i) {
        const auto& c = prob.constraints[i];
        ds[i] = c.inequality
                    ? sigma * mu / y[i] - s[i] - (s[i] / y[i]) * dy[i] - corr_lp[i] / y[i]
                    : 0.0;
      }
    };

    auto step_lengths = [&](double& ap, double& ad) {
      ap = max_psd_step(llt_x, dx);
      ad = max_psd_step(llt_z, dz);
      for (int i = 0; i < m; ++i) {
        if (!prob.constraints[i].inequality) continue;
        if (ds[i] < 0.0) ap = std::min(ap, -s[i] / ds[i]);
        if (dy[i] < 0.0) ad = std::min(ad, -y[i] / dy[i]);
      }
    };

    // Predictor.
    direction(0.0, RMatrix::Zero(n, n), RVector::Zero(m));
    double ap, ad;
    step_lengths(ap, ad);
    const double ap_aff = std::min(1.0, ap);
    const double ad_aff = std::min(1.0, ad);
    double mu_aff = ((x + ap_aff * dx).cwiseProduct(z + ad_aff * dz)).sum();
    for (int i = 0; i < m; ++i) {
      if (prob.constraints[i].inequality) {
        mu_aff += (s[i] + ap_aff * ds[i]) * (y[i] + ad_aff * dy[i]);
      }
    }
    mu_aff = std::max(mu_aff / nu, 0.0);
    double sigma = std::pow(mu_aff / mu, 3.0);
    sigma = std::clamp(sigma, 1e-8, 1.0);

    // Corrector.
    const RMatrix corr_sdp = sym(zinv * dz * dx);
    RVector corr_lp(m);
    for (int i = 0; i < m; ++i) corr_lp[i] = dy[i] * ds[i];
    direction(sigma, corr_sdp, corr_lp);
    step_lengths(ap, ad);
    const double tau = 0.98;
    ap = std::min(1.0, tau * ap);
    ad = std::min(1.0, tau * ad);
    if (ap < 1e-10 && ad < 1e-10) return res;  // numerical stall

    x += ap * dx;
    z += ad * dz;
    y += ad * dy;
    for (int i = 0; i < m; ++i) {
      if (prob.constraints[i].inequality) s[i] += ap * ds[i];
    }
  }
  res.iterations = opts.max_iterations;
  return res;
}

// ---------------------------------------------------------------------------
// Complex Hermitian front end via the real symmetric embedding
// E(A) = [[Re A, -Im A], [Im A, Re A]],  <E(A), E(X)> = 2 <A, X>.
// ---------------------------------------------------------------------------

RMatrix embed(const CMatrix& a) {
  const Eigen::Index n = a.rows();
  RMatrix e(2 * n, 2 * n);
  e.topLeftCorner(n, n) = a.real();
  e.bottomRightCorner(n, n) = a.real();
  e.topRightCorner(n, n) = -a.imag();
  e.bottomLeftCorner(n, n) = a.imag();
  return e;
}

CMatrix unembed(const RMatrix& y) {
  const Eigen::Index n = y.rows() / 2;
  CMatrix x =
      0.5 * (y.topLeftCorner(n, n) + y.bottomRightCorner(n, n)).cast<Complex>() +
      Complex(0, 0.5) * (y.bottomLeftCorner(n, n) - y.topRightCorner(n, n)).cast<Complex>();
  return 0.5 * (x + CMatrix(x.adjoint()));
}

bool complex_diagonal(const CMatrix& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j && std::abs(a(i, j)) > 0.0) return false;
    }
  }
  return true;
}

RealConstraint embed_constraint(const SdpConstraint& c, Eigen::Index n) {
  RealConstraint rc;
  rc.b = 2.0 * c.b;
  rc.inequality = c.sense == ConstraintSense::GreaterEqual;
  if (complex_diagonal(c.a)) {
    rc.diagonal = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = c.a(i, i).real();
      if (v != 0.0) {
        rc.diag_entries.emplace_back(static_cast<int>(i), v);
        rc.diag_entries.emplace_back(static_cast<int>(i + n), v);
      }
    }
  } else {
    rc.a = embed(c.a);
  }
  return rc;
}

SdpSolution solve_complex(const SdpProblem& p, const SdpOptions& opts) {
  // Normalize the objective and each constraint row to O(1): the IPM's
  // relative stopping rules are otherwise meaningless when the data spans
  // many orders of magnitude (e.g. path-loss-scaled channel products).
  double c_scale = p.c.cwiseAbs().maxCoeff();
  if (!(c_scale > 0.0)) c_scale = 1.0;
  std::vector<double> a_scale(p.constraints.size(), 1.0);

  RealProblem rp;
  rp.n = static_cast<int>(2 * p.n);
  rp.c = -embed(p.c) / c_scale;  // maximize -> minimize
  rp.constraints.reserve(p.constraints.size());
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    SdpConstraint scaled = p.constraints[i];
    const double s = scaled.a.cwiseAbs().maxCoeff();
    if (s > 0.0) {
      a_scale[i] = s;
      scaled.a /= s;
      scaled.b /= s;
    }
    rp.constraints.push_back(embed_constraint(scaled, p.n));
  }

  const RealResult rr = solve_real_sdp(rp, opts);

  SdpSolution sol;
  sol.x = unembed(rr.x);
  sol.objective = p.c.cwiseProduct(sol.x.conjugate()).sum().real();
  sol.iterations = rr.iterations;
  sol.relative_gap = rr.relative_gap;
  sol.duals.resize(p.constraints.size());
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    // Max-convention duals: sum_i d_i A_i - C is PSD and sum_i b_i d_i
    // equals the optimal objective.
    sol.duals[i] = -rr.y[i] * c_scale / a_scale[i];
  }
  double feas = 0.0;
  for (const auto& c : p.constraints) {
    const double v = c.a.cwiseProduct(sol.x.conjugate()).sum().real();
    const double viol = c.sense == ConstraintSense::Equal ? std::abs(v - c.b)
                                                          : std::max(0.0, c.b - v);
    feas = std::max(feas, viol);
  }
  sol.feasibility_residual = feas;
  sol.status = rr.converged ? SdpStatus::Optimal : SdpStatus::MaxIterations;
  return sol;
}

// Margin reformulation of a feasibility problem: append one auxiliary
// diagonal entry t' >= 0 encoding the margin t = t' - shift, and maximize t.
// Always strictly feasible, so plain IPM convergence decides feasibility by
// the sign of the optimal margin.
SdpSolution solve_feasibility(const SdpProblem& p, const SdpOptions& opts) {
  // Inequality rows are normalized by their largest entry so the shared
  // margin variable couples O(1) quantities; the reported margin is therefore
  // relative to each row's scale (only its sign is contractual).
  std::vector<SdpConstraint> rows = p.constraints;
  for (auto& c : rows) {
    if (c.sense != ConstraintSense::GreaterEqual) continue;
    const double s = c.a.cwiseAbs().maxCoeff();
    if (s > 0.0) {
      c.a /= s;
      c.b /= s;
    }
  }
  double shift = 1.0;
  for (const auto& c : rows) {
    if (c.sense == ConstraintSense::GreaterEqual) {
      shift = std::max(shift, std::abs(c.b) + c.a.norm() * static_cast<double>(p.n) + 1.0);
    }
  }
  SdpProblem aug;
  aug.n = p.n + 1;
  aug.c = CMatrix::Zero(aug.n, aug.n);
  aug.c(p.n, p.n) = 1.0;
  for (const auto& c : rows) {
    SdpConstraint cc;
    cc.a = CMatrix::Zero(aug.n, aug.n);
    cc.a.topLeftCorner(p.n, p.n) = c.a;
    cc.sense = c.sense;
    if (c.sense == ConstraintSense::GreaterEqual) {
      cc.a(p.n, p.n) = -1.0;
      cc.b = c.b - shift;
    } else {
      cc.b = c.b;
    }
    aug.constraints.push_back(std::move(cc));
  }
  SdpSolution sol = solve_complex(aug, opts);
  const double margin = sol.x(p.n, p.n).real() - shift;
  sol.margin = margin;
  sol.x = sol.x.topLeftCorner(p.n, p.n).eval();
  sol.objective = margin;
  if (sol.status == SdpStatus::Optimal && margin < 0.0) sol.status = SdpStatus::Infeasible;
  return sol;
}

}  // namespace

void SdpProblem::validate() const {
  if (n < 1) throw std::invalid_argument("sdp: dimension must be >= 1");
  if (c.rows() != n || c.cols() != n || !is_hermitian(c, 1e-9)) {
    throw std::invalid_argument("sdp: objective must be Hermitian of dimension n");
  }
  for (const auto& cons : constraints) {
    if (cons.a.rows() != n || cons.a.cols() != n || !is_hermitian(cons.a, 1e-9)) {
      throw std::invalid_argument("sdp: constraint matrix must be Hermitian of dimension n");
    }
  }
}

SdpSolution solve_sdp(const SdpProblem& p, const SdpOptions& opts) {
  p.validate();
  return p.feasibility_only ? solve_feasibility(p, opts) : solve_complex(p, opts);
}

CMatrix lift_outer(const CVector& a, Complex b) {
  const Eigen::Index n = a.size();
  CMatrix r = CMatrix::Zero(n + 1, n + 1);
  r.topLeftCorner(n, n) = a * a.adjoint();
  r.topRightCorner(n, 1) = a * std::conj(b);
  r.bottomLeftCorner(1, n) = (a * std::conj(b)).adjoint();
  return r;
}

SdpProblem lift_single_user(const CMatrix& phi, const CVector& h_d) {
  const Eigen::Index n = phi.rows();
  if (phi.cols() != h_d.size()) {
    throw std::invalid_argument("lift_single_user: dimension mismatch");
  }
  SdpProblem p;
  p.n = n + 1;
  p.c = CMatrix::Zero(p.n, p.n);
  p.c.topLeftCorner(n, n) = phi * phi.adjoint();
  p.c.topRightCorner(n, 1) = phi * h_d;
  p.c.bottomLeftCorner(1, n) = (phi * h_d).adjoint();
  for (Eigen::Index i = 0; i < p.n; ++i) {
    SdpConstraint c;
    c.a = CMatrix::Zero(p.n, p.n);
    c.a(i, i) = 1.0;
    c.b = 1.0;
    c.sense = ConstraintSense::Equal;
    p.constraints.push_back(std::move(c));
  }
  return p;
}

RandomizationResult gaussian_randomization(const CMatrix& v,
                                           const std::function<double(const CVector&)>& score,
                                           int count, RngStream& rng) {
  if (count < 1) throw std::invalid_argument("gaussian_randomization: count must be >= 1");
  const Eigen::Index dim = v.rows();
  const Eigen::Index n = dim - 1;
  const HermitianEig eig = hermitian_eig(0.5 * (v + CMatrix(v.adjoint())));
  RVector lam = eig.eigenvalues.cwiseMax(0.0);
  const CMatrix factor = eig.eigenvectors * lam.cwiseSqrt().asDiagonal();

  // The lifted variable carries e^{-j theta}, hence the sign flip.
  auto delift = [n](const CVector& r) {
    const Complex last = r[n];
    RVector theta(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Complex w = std::abs(last) > 1e-300 ? r[i] / last : r[i];
      theta[i] = std::abs(w) > 0.0 ? -std::arg(w) : 0.0;
    }
    return PhaseConfig(theta);
  };

  RandomizationResult best;
  best.best_score = -std::numeric_limits<double>::infinity();
  auto consider = [&](const CVector& r) {
    PhaseConfig ph = delift(r);
    const double s = score(ph.reflection().conjugate());
    if (s > best.best_score) {
      best.best_score = s;
      best.phases = std::move(ph);
    }
  };

  // Deterministic candidate from the principal eigenvector (exact when the
  // relaxation is tight).
  consider(eig.eigenvectors.col(dim - 1));
  for (int i = 0; i < count; ++i) consider(factor * sample_cscg(dim, 1.0, rng));
  return best;
}

}  // namespace irsbf
