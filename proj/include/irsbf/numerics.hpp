// SPDX-License-Identifier: Apache-2.0
//
// Dense complex linear-algebra kernels and seeded random sampling shared by
// all solver modules.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace irsbf {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// Counter-derived random stream: the sequence is fully determined by
// (seed, stream_id), independent of thread count or call-site ordering.
// Gaussian draws use an explicit Box-Muller so replay is bit-identical
// across standard-library implementations.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);
  // Standard normal N(0, 1).
  double normal();
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Deterministically derived child stream (for per-solver sub-streams).
  RngStream derive(std::uint64_t salt) const;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t state_[4] = {0, 0, 0, 0};  // xoshiro256++
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

// i.i.d. CN(0, variance) vector; variance must be positive.
CVector sample_cscg(Eigen::Index n, double variance, RngStream& rng);
// CN(0, variance) matrix, column-major draw order.
CMatrix sample_cscg_matrix(Eigen::Index rows, Eigen::Index cols, double variance,
                           RngStream& rng);

bool is_hermitian(const CMatrix& a, double tol = 1e-12);

struct HermitianEig {
  RVector eigenvalues;   // ascending
  CMatrix eigenvectors;  // unitary, columns match eigenvalues
};

// Eigendecomposition of a Hermitian matrix; throws std::invalid_argument on
// non-Hermitian input.
HermitianEig hermitian_eig(const CMatrix& a);

// Solves A x = b for Hermitian positive-definite A; throws std::runtime_error
// when the Cholesky factorization fails.
CVector solve_hermitian_linear(const CMatrix& a, const CVector& b);

// dB / dBm conversions.
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

}  // namespace irsbf
