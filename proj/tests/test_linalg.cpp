#include <doctest.h>

#include <cmath>

#include "blockcert/kernels.hpp"
#include "blockcert/linalg.hpp"
#include "blockcert/rng.hpp"

using namespace blockcert;

namespace {

Mat random_mat(std::size_t r, std::size_t c, std::uint64_t seed,
               double scale = 1.0) {
  Mat m(r, c);
  SplitMix64 rng(seed);
  for (double& v : m.values()) v = scale * rng.normal();
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("linalg");

TEST_CASE("spectral norm basics") {
  CHECK(spectral_norm(Mat::identity(4)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spectral_norm(Mat::identity(40)) ==
        doctest::Approx(1.0).epsilon(1e-9));  // power-iteration path
  CHECK(spectral_norm(Mat(5, 7)) == 0.0);

  // Rank one u v^T with ||u|| = 2, ||v|| = 3 has spectral norm 6.
  Mat uv(3, 2);
  const double u[3] = {2, 0, 0};
  const double v[2] = {0, 3};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) uv(i, j) = u[i] * v[j];
  CHECK(spectral_norm(uv) == doctest::Approx(6.0).epsilon(1e-12));

  Mat m = random_mat(5, 3, 42);
  const double svd_top = singular_values(m)[0];
  CHECK(spectral_norm(m) == doctest::Approx(svd_top).epsilon(1e-8));
}

TEST_CASE("spectral norm agrees with the SVD oracle on 1000 random matrices") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t r = 1 + rng.below(50);
    const std::size_t c = 1 + rng.below(50);
    Mat m = random_mat(r, c, rng.next());
    const double pi = spectral_norm(m, 1e-9);
    const double sv = singular_values(m)[0];
    CHECK(std::abs(pi - sv) <= 1e-8 * std::max(1.0, sv));
  }
}

TEST_CASE("top singular pair is consistent") {
  Mat m = random_mat(30, 22, 7);
  const TopSingularPair tp = top_singular_pair(m);
  CHECK(std::abs(norm2(tp.left) - 1.0) <= 1e-9);
  CHECK(std::abs(norm2(tp.right) - 1.0) <= 1e-9);
  // sigma = u^T M v
  std::vector<double> mv = matvec(m, tp.right);
  CHECK(dot(tp.left, mv) == doctest::Approx(tp.sigma).epsilon(1e-9));
}

TEST_CASE("jacobi eigendecomposition") {
  Mat s(5, 5);
  SplitMix64 rng(11);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i; j < 5; ++j) s(i, j) = s(j, i) = rng.normal();
  std::vector<double> ev;
  Mat vecs;
  jacobi_eig_sym(s, ev, vecs);
  for (std::size_t k = 0; k < 5; ++k) {
    std::vector<double> v(5);
    for (std::size_t i = 0; i < 5; ++i) v[i] = vecs(i, k);
    std::vector<double> sv = matvec(s, v);
    for (std::size_t i = 0; i < 5; ++i)
      CHECK(sv[i] == doctest::Approx(ev[k] * v[i]).epsilon(1e-9).scale(1.0));
  }
  for (std::size_t k = 1; k < 5; ++k) CHECK(ev[k - 1] >= ev[k]);
}

TEST_CASE("pivoted QR factors and ranks") {
  Mat x = random_mat(8, 5, 3);
  PivotedQr f = qr_pivoted(x);
  CHECK(f.rank == 5);
  // Q^T Q = I
  Mat qtq = matmul_tn(f.q, f.q);
  for (std::size_t i = 0; i < qtq.rows(); ++i)
    for (std::size_t j = 0; j < qtq.cols(); ++j)
      CHECK(std::abs(qtq(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);
  // Q R = X P
  Mat qr = matmul(f.q, f.r);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      CHECK(qr(i, j) == doctest::Approx(x(i, f.perm[j])).epsilon(1e-11));

  // Duplicate a column: rank drops.
  Mat y = x;
  for (std::size_t i = 0; i < y.rows(); ++i) y(i, 4) = y(i, 0);
  CHECK(qr_pivoted(y, 1e-10).rank == 4);
}

TEST_CASE("kernel basis spans the kernel") {
  Mat a = random_mat(4, 9, 21);
  Mat kb = kernel_basis(a);
  CHECK(kb.cols() == 5);
  for (std::size_t c = 0; c < kb.cols(); ++c) {
    std::vector<double> z(9);
    for (std::size_t r = 0; r < 9; ++r) z[r] = kb(r, c);
    CHECK(norm2(matvec(a, z)) <= 1e-10);
    CHECK(std::abs(norm2(z) - 1.0) <= 1e-10);
  }
}

TEST_CASE("cholesky solve") {
  Mat b = random_mat(4, 4, 5);
  Mat s = gram(b);
  for (int i = 0; i < 4; ++i) s(i, i) += 1.0;
  Mat rhs = random_mat(4, 2, 6);
  Mat x = rhs;
  REQUIRE(cholesky_solve_spd(s, x));
  Mat sx = matmul(s, x);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(sx(i, j) == doctest::Approx(rhs(i, j)).epsilon(1e-10));

  Mat notpd(2, 2);
  notpd(0, 0) = 1;
  notpd(1, 1) = -1;
  Mat r2emp = Mat(2, 1);
  CHECK(!cholesky_solve_spd(notpd, r2emp));
}

TEST_CASE("least squares residual") {
  // Consistent wide system: residual ~ 0.
  Mat a = random_mat(3, 6, 9);
  std::vector<double> z(6);
  SplitMix64 rng(10);
  for (double& v : z) v = rng.normal();
  CHECK(least_squares_residual(a, matvec(a, z)) <= 1e-9);

  // Hand instance: rows (1) and (1), y = (0, 2): best fit z = 1,
  // residual sqrt(2).
  Mat t(2, 1);
  t(0, 0) = 1;
  t(1, 0) = 1;
  CHECK(least_squares_residual(t, {0, 2}) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("parallel kernels match the serial reference bit for bit") {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t r = 150 + rng.below(200);
    const std::size_t c = 150 + rng.below(200);
    Mat a = random_mat(r, c, rng.next());
    std::vector<double> x(c), xt(r);
    for (double& v : x) v = rng.normal();
    for (double& v : xt) v = rng.normal();

    std::vector<double> y1(r), y2(r);
    kernels::matvec_serial(a.data(), r, c, x.data(), y1.data());
    kernels::matvec(a.data(), r, c, x.data(), y2.data());
    CHECK(y1 == y2);

    std::vector<double> z1(c), z2(c);
    kernels::matvec_t_serial(a.data(), r, c, xt.data(), z1.data());
    kernels::matvec_t(a.data(), r, c, xt.data(), z2.data());
    CHECK(z1 == z2);
  }
  // gemm: C = A^T B.
  Mat a = random_mat(120, 60, 1);
  Mat b = random_mat(120, 80, 2);
  Mat c1(60, 80), c2(60, 80);
  kernels::gemm_tn_serial(a.data(), 120, 60, b.data(), 80, c1.data());
  kernels::gemm_tn(a.data(), 120, 60, b.data(), 80, c2.data());
  CHECK(c1.values() == c2.values());
}

TEST_SUITE_END();
