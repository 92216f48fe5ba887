#include "doctest.h"

#include <cmath>
#include <numeric>

#include "rsbl/linalg.hpp"
#include "support.hpp"

using namespace rsbl;
using testing_support::norm2;

TEST_CASE("DenseMatrix rejects non-finite entries and bad shapes") {
  CHECK_THROWS_AS(DenseMatrix(1, 2, {1.0, std::nan("")}), Error);
  CHECK_THROWS_AS(DenseMatrix(1, 2, {1.0, INFINITY}), Error);
  CHECK_THROWS_AS(DenseMatrix(2, 2, {1.0, 2.0, 3.0}), Error);
  const DenseMatrix m = DenseMatrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(1, 0) == 4.0);
  CHECK(m.data().size() == 6);
  CHECK(m.data()[2] == 3.0);  // row-major
}

TEST_CASE("gaussian_matrix is deterministic per (seed, stream)") {
  RngStream a(7, 0), b(7, 0), c(7, 1);
  const auto ma = gaussian_matrix(4, 5, a);
  const auto mb = gaussian_matrix(4, 5, b);
  const auto mc = gaussian_matrix(4, 5, c);
  CHECK(std::equal(ma.data().begin(), ma.data().end(), mb.data().begin()));
  CHECK_FALSE(std::equal(ma.data().begin(), ma.data().end(), mc.data().begin()));

  RngStream r(1, 2);
  const auto small = gaussian_matrix(2, 3, r);
  CHECK(small.rows() == 2);
  CHECK(small.cols() == 3);
  for (double x : small.data()) CHECK(std::isfinite(x));
}

TEST_CASE("gaussian moments over 1e6 draws") {
  RngStream rng(2024, 9);
  const auto m = gaussian_matrix(1000, 1000, rng);
  const auto v = m.data();
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size() - 1);
  CHECK(std::abs(mean) <= 4e-3);
  CHECK(std::abs(var - 1.0) <= 1e-2);
}

TEST_CASE("uniform draws lie in [0, 1)") {
  RngStream rng(5, 5);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("qr_factor examples") {
  const auto q3 = qr_factor(DenseMatrix::identity(3));
  CHECK((q3.q.eigen() - Eigen::MatrixXd::Identity(3, 3)).norm() == doctest::Approx(0.0));
  CHECK((q3.r.eigen() - Eigen::MatrixXd::Identity(3, 3)).norm() == doctest::Approx(0.0));

  const auto v = qr_factor(DenseMatrix::from_rows({{3}, {4}}));
  CHECK(v.r(0, 0) == doctest::Approx(5.0).epsilon(1e-15));

  CHECK_THROWS_AS(qr_factor(DenseMatrix::from_rows({{1, 2}, {2, 4}, {3, 6}})), Error);
}

TEST_CASE("qr_factor property: orthonormal, triangular, reconstructs") {
  RngStream rng(31, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t cols = testing_support::uniform_index(rng, 1, 10);
    const std::size_t rows = cols + testing_support::uniform_index(rng, 0, 40);
    const auto m = gaussian_matrix(rows, cols, rng);
    const auto qr = qr_factor(m);
    const Eigen::MatrixXd& q = qr.q.eigen();
    const Eigen::MatrixXd& r = qr.r.eigen();
    const double c = static_cast<double>(cols);
    REQUIRE(norm2(q.transpose() * q - Eigen::MatrixXd::Identity(q.cols(), q.cols())) <=
            1e-13 * std::sqrt(c));
    REQUIRE(norm2(q * r - m.eigen()) <= 1e-13 * norm2(m.eigen()));
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
      REQUIRE(r(i, i) >= 0.0);
      for (Eigen::Index j = 0; j < i; ++j) REQUIRE(r(i, j) == 0.0);
    }
  }
}

TEST_CASE("sym_eig examples") {
  const auto e = sym_eig(DenseMatrix::diagonal(std::vector<double>{3, 1, 2}));
  CHECK(e.values == std::vector<double>{1, 2, 3});
  const auto s = sym_eig(DenseMatrix::from_rows({{0, 1}, {1, 0}}));
  CHECK(s.values[0] == doctest::Approx(-1.0));
  CHECK(s.values[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(sym_eig(DenseMatrix::from_rows({{0, 1}, {0, 0}})), Error);
}

TEST_CASE("sym_eig property: residual, orthonormality, order, trace") {
  RngStream rng(32, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = testing_support::uniform_index(rng, 1, 20);
    const auto s = testing_support::random_symmetric(n, rng);
    const auto e = sym_eig(s);
    const double snorm = norm2(s.eigen());
    const Eigen::MatrixXd& v = e.vectors.eigen();
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::VectorXd col = v.col(static_cast<Eigen::Index>(i));
      REQUIRE((s.eigen() * col - e.values[i] * col).norm() <= 1e-11 * snorm);
      if (i > 0) REQUIRE(e.values[i - 1] <= e.values[i]);
    }
    REQUIRE(norm2(v.transpose() * v - Eigen::MatrixXd::Identity(v.cols(), v.cols())) <= 1e-12);
    const double sum = std::accumulate(e.values.begin(), e.values.end(), 0.0);
    REQUIRE(std::abs(sum - s.eigen().trace()) <= 1e-12 * std::max(1.0, s.eigen().cwiseAbs().sum()));
  }
}

TEST_CASE("spectral_norm examples and Gram oracle") {
  CHECK(spectral_norm(DenseMatrix::diagonal(std::vector<double>{1, -3})) == doctest::Approx(3.0));
  CHECK(spectral_norm(DenseMatrix(3, 2)) == 0.0);
  RngStream rng(33, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = gaussian_matrix(30, 20, rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram(m.eigen().transpose() * m.eigen());
    const double oracle = std::sqrt(gram.eigenvalues().maxCoeff());
    REQUIRE(testing_support::rel_diff(spectral_norm(m), oracle) <= 1e-10);
  }
}

TEST_CASE("smallest_singular examples and inverse oracle") {
  CHECK(smallest_singular(DenseMatrix::from_rows({{1, 1}, {1, 1}})) <= 1e-14);
  CHECK(smallest_singular(DenseMatrix::identity(4)) == doctest::Approx(1.0));
  const auto sv = singular_values(DenseMatrix::diagonal(std::vector<double>{2, -5, 1}));
  CHECK(sv == std::vector<double>{5, 2, 1});
  RngStream rng(34, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = gaussian_matrix(10, 10, rng);
    const double inv_norm = norm2(m.eigen().inverse());
    REQUIRE(std::abs(smallest_singular(m) * inv_norm - 1.0) <= 1e-8);
  }
}

TEST_CASE("solve_linear examples") {
  const auto rhs = DenseMatrix::from_rows({{1, 2}, {3, 4}});
  const auto id = solve_linear(DenseMatrix::identity(2), rhs);
  CHECK((id.x.eigen() - rhs.eigen()).norm() == 0.0);
  CHECK(id.cond_estimate == doctest::Approx(1.0));

  const auto d = solve_linear(DenseMatrix::diagonal(std::vector<double>{2, 4}), DenseMatrix::identity(2));
  CHECK(d.x(0, 0) == doctest::Approx(0.5));
  CHECK(d.x(1, 1) == doctest::Approx(0.25));
  CHECK(d.x(0, 1) == 0.0);

  CHECK_THROWS_AS(solve_linear(DenseMatrix::from_rows({{1, 2}, {2, 4}}), DenseMatrix::identity(2)),
                  Error);
  try {
    solve_linear(DenseMatrix::from_rows({{1, 2}, {2, 4}}), DenseMatrix::identity(2));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularMatrix);
  }
  CHECK_THROWS_AS(solve_linear(DenseMatrix::identity(2), DenseMatrix::identity(3)), Error);
}

TEST_CASE("solve_linear residual on random well-conditioned systems") {
  RngStream rng(35, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = testing_support::tame_gaussian(15, rng, 1e3);
    const auto b = gaussian_matrix(15, 3, rng);
    const auto s = solve_linear(m, b);
    const double res = norm2(m.eigen() * s.x.eigen() - b.eigen());
    REQUIRE(res <= 1e-10 * norm2(b.eigen()));
    REQUIRE(s.cond_estimate >= 1.0);
  }
}

TEST_CASE("splitmix64 reference values") {
  // First output of the reference generator seeded with 0.
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(0) != splitmix64(1));
}
