// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "irsbf/numerics.hpp"

using namespace irsbf;

namespace {

CMatrix random_hermitian(Eigen::Index n, RngStream& rng) {
  CMatrix a = sample_cscg_matrix(n, n, 1.0, rng);
  return 0.5 * (a + CMatrix(a.adjoint()));
}

}  // namespace

TEST_CASE("hermitian_eig identity") {
  const HermitianEig e = hermitian_eig(CMatrix::Identity(3, 3));
  for (int i = 0; i < 3; ++i) CHECK(e.eigenvalues[i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hermitian_eig diagonal ascending order") {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = -1.0;
  const HermitianEig e = hermitian_eig(a);
  CHECK(e.eigenvalues[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(e.eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("hermitian_eig reconstruction and unitarity") {
  RngStream rng(7, 0);
  for (const Eigen::Index n : {8, 32, 128}) {
    const CMatrix a = random_hermitian(n, rng);
    const HermitianEig e = hermitian_eig(a);
    const CMatrix recon =
        e.eigenvectors * e.eigenvalues.asDiagonal() * e.eigenvectors.adjoint();
    CHECK((recon - a).norm() <= 1e-9 * a.norm());
    const CMatrix gram = e.eigenvectors.adjoint() * e.eigenvectors;
    CHECK((gram - CMatrix::Identity(n, n)).norm() <= 1e-9 * std::sqrt(double(n)));
    for (Eigen::Index i = 1; i < n; ++i) CHECK(e.eigenvalues[i] >= e.eigenvalues[i - 1]);
  }
}

TEST_CASE("hermitian_eig rejects non-Hermitian input") {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 1) = 1.0;
  CHECK_THROWS_AS(hermitian_eig(a), std::invalid_argument);
}

TEST_CASE("solve_hermitian_linear basics") {
  RngStream rng(11, 0);
  const CVector b = sample_cscg(5, 1.0, rng);
  CHECK((solve_hermitian_linear(CMatrix::Identity(5, 5), b) - b).norm() <= 1e-12);

  CMatrix two = 2.0 * CMatrix::Identity(2, 2);
  CVector rhs(2);
  rhs << 4.0, 6.0;
  const CVector x = solve_hermitian_linear(two, rhs);
  CHECK(std::abs(x[0] - Complex(2.0)) <= 1e-12);
  CHECK(std::abs(x[1] - Complex(3.0)) <= 1e-12);
}

TEST_CASE("solve_hermitian_linear residual on random PD systems") {
  RngStream rng(12, 0);
  for (int t = 0; t < 10; ++t) {
    const CMatrix m = sample_cscg_matrix(16, 16, 1.0, rng);
    const CMatrix a = m * m.adjoint() + 1e-3 * CMatrix::Identity(16, 16);
    const CVector b = sample_cscg(16, 1.0, rng);
    const CVector x = solve_hermitian_linear(a, b);
    CHECK((a * x - b).norm() <= 1e-9 * b.norm());
  }
}

TEST_CASE("solve_hermitian_linear rejects indefinite matrices") {
  CMatrix a = -CMatrix::Identity(3, 3);
  CHECK_THROWS_AS(solve_hermitian_linear(a, CVector::Ones(3)), std::runtime_error);
}

TEST_CASE("sample_cscg moments and determinism") {
  RngStream rng(3, 5);
  const CVector v = sample_cscg(1000000, 1.0, rng);
  const double mean_sq = v.squaredNorm() / double(v.size());
  CHECK(mean_sq >= 0.995);
  CHECK(mean_sq <= 1.005);
  // Real and imaginary parts each carry half the variance.
  const double re_var = v.real().squaredNorm() / double(v.size());
  CHECK(re_var == doctest::Approx(0.5).epsilon(0.01));

  RngStream r1(42, 9), r2(42, 9);
  const CVector a = sample_cscg(64, 2.0, r1);
  const CVector b = sample_cscg(64, 2.0, r2);
  CHECK((a - b).norm() == 0.0);  // bit-identical replay

  RngStream r3(42, 9);
  CHECK_THROWS_AS(sample_cscg(4, 0.0, r3), std::invalid_argument);
}

TEST_CASE("rng streams are reproducible and decorrelated") {
  RngStream a(100, 1), a2(100, 1), b(100, 2);
  std::vector<double> xs, ys;
  double sxy = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = a.uniform();
    const double y = b.uniform();
    CHECK(a2.uniform() == x);
    sx += x;
    sy += y;
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double corr =
      cov / std::sqrt((sxx / n - (sx / n) * (sx / n)) * (syy / n - (sy / n) * (sy / n)));
  CHECK(std::abs(corr) < 0.01);
}

TEST_CASE("rng derive gives distinct deterministic children") {
  RngStream parent(5, 7);
  RngStream c1 = parent.derive(1);
  RngStream c1b = parent.derive(1);
  RngStream c2 = parent.derive(2);
  const double v1 = c1.uniform();
  CHECK(c1b.uniform() == v1);
  CHECK(c2.uniform() != v1);
}

TEST_CASE("db conversions") {
  CHECK(db_to_linear(-30.0) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(db_to_linear(0.0) == 1.0);
  CHECK(dbm_to_watt(-80.0) == doctest::Approx(1e-11).epsilon(1e-12));
  CHECK(linear_to_db(db_to_linear(-17.3)) == doctest::Approx(-17.3).epsilon(1e-12));
  CHECK(watt_to_dbm(dbm_to_watt(13.0)) == doctest::Approx(13.0).epsilon(1e-12));
}
