// SPDX-License-Identifier: Apache-2.0
#include "irsbf/numerics.hpp"

#include <cmath>

namespace irsbf {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::uint64_t sm = seed ^ rotl(stream_id, 32) ^ 0xd1b54a32d192ed03ULL;
  for (auto& s : state_) s = splitmix64(sm);
  // All-zero state is invalid for xoshiro; splitmix output makes this
  // practically impossible, but guard anyway.
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double RngStream::normal() {
  if (have_cached_normal_) {
    have_cached_normal_ = false;
    return cached_normal_;
  }
  // Box-Muller; reject u1 == 0 to keep log finite.
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(a);
  have_cached_normal_ = true;
  return r * std::cos(a);
}

RngStream RngStream::derive(std::uint64_t salt) const {
  std::uint64_t mix = stream_id_;
  std::uint64_t h = splitmix64(mix) ^ salt;
  return RngStream(seed_, splitmix64(h));
}

CVector sample_cscg(Eigen::Index n, double variance, RngStream& rng) {
  if (variance <= 0.0) throw std::invalid_argument("sample_cscg: variance must be > 0");
  const double s = std::sqrt(variance / 2.0);
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    v[i] = Complex(s * re, s * im);
  }
  return v;
}

CMatrix sample_cscg_matrix(Eigen::Index rows, Eigen::Index cols, double variance,
                           RngStream& rng) {
  CMatrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) m.col(c) = sample_cscg(rows, variance, rng);
  return m;
}

bool is_hermitian(const CMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, a.cwiseAbs().maxCoeff());
}

HermitianEig hermitian_eig(const CMatrix& a) {
  if (a.rows() < 1 || !is_hermitian(a, 1e-12)) {
    throw std::invalid_argument("hermitian_eig: input is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("hermitian_eig: eigensolver failed to converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

CVector solve_hermitian_linear(const CMatrix& a, const CVector& b) {
  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("solve_hermitian_linear: matrix is not positive definite");
  }
  return llt.solve(b);
}

}  // namespace irsbf
