#pragma once

// Hand-rolled generators and reference oracles shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rsbl/linalg.hpp"
#include "rsbl/matpoly.hpp"

namespace testing_support {

using rsbl::DenseMatrix;
using rsbl::RngStream;

inline std::size_t uniform_index(RngStream& rng, std::size_t lo, std::size_t hi) {
  const double u = rng.uniform();
  return lo + std::min(hi - lo, static_cast<std::size_t>(u * static_cast<double>(hi - lo + 1)));
}

inline double uniform_in(RngStream& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform();
}

inline DenseMatrix random_symmetric(std::size_t n, RngStream& rng) {
  const auto g = rsbl::gaussian_matrix(n, n, rng).eigen();
  return DenseMatrix(0.5 * (g + g.transpose()));
}

/// Gaussian b x b with condition number at most `max_cond` (redrawn until so).
inline DenseMatrix tame_gaussian(std::size_t b, RngStream& rng, double max_cond = 50.0) {
  for (;;) {
    auto m = rsbl::gaussian_matrix(b, b, rng);
    const auto sv = rsbl::singular_values(m);
    if (sv.back() * max_cond >= sv.front()) return m;
  }
}

/// d node spectra of size b, all b*d values pairwise separated by at least
/// `sep` and shuffled across nodes so node spectra interleave.
inline std::vector<std::vector<double>> random_spectra(std::size_t b, std::size_t d,
                                                       double sep, RngStream& rng) {
  std::vector<double> values;
  double x = uniform_in(rng, -1.0, 0.0);
  for (std::size_t i = 0; i < b * d; ++i) {
    values.push_back(x);
    x += sep + uniform_in(rng, 0.0, 0.5);
  }
  for (std::size_t i = values.size(); i > 1; --i) {
    std::swap(values[i - 1], values[uniform_index(rng, 0, i - 1)]);
  }
  std::vector<std::vector<double>> out(d);
  for (std::size_t k = 0; k < d; ++k) {
    out[k].assign(values.begin() + static_cast<long>(k * b),
                  values.begin() + static_cast<long>((k + 1) * b));
  }
  return out;
}

inline rsbl::matpoly::NodeSet random_nodes(std::size_t b, std::size_t d, double sep,
                                           RngStream& rng, double max_cond = 50.0) {
  auto spectra = random_spectra(b, d, sep, rng);
  std::vector<DenseMatrix> omegas;
  for (std::size_t k = 0; k < d; ++k) omegas.push_back(tame_gaussian(b, rng, max_cond));
  return rsbl::matpoly::NodeSet(std::move(spectra), std::move(omegas));
}

inline rsbl::matpoly::MatrixPolynomial random_poly(std::size_t b, std::size_t degree,
                                                   RngStream& rng) {
  std::vector<DenseMatrix> c;
  for (std::size_t i = 0; i <= degree; ++i) c.push_back(rsbl::gaussian_matrix(b, b, rng));
  return rsbl::matpoly::MatrixPolynomial(std::move(c));
}

/// sum_i X^i C_i with explicit powers.
inline Eigen::MatrixXd naive_eval(const rsbl::matpoly::MatrixPolynomial& p,
                                  const Eigen::MatrixXd& x) {
  const auto b = x.rows();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(b, b);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(b, b);
  for (const auto& c : p.coeffs()) {
    sum += power * c.eigen();
    power = power * x;
  }
  return sum;
}

/// Classical Lagrange basis l_k(x) over scalar nodes.
inline double lagrange(const std::vector<double>& nodes, std::size_t k, double x) {
  double v = 1.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (j != k) v *= (x - nodes[j]) / (nodes[k] - nodes[j]);
  }
  return v;
}

// Scalar nodes with random 1x1 Omegas.
inline rsbl::matpoly::NodeSet scalar_nodes(const std::vector<double>& xs, RngStream& rng) {
  std::vector<std::vector<double>> spectra;
  std::vector<DenseMatrix> omegas;
  for (double x : xs) {
    spectra.push_back({x});
    omegas.push_back(DenseMatrix::from_rows({{0.5 + rng.uniform()}}));
  }
  return rsbl::matpoly::NodeSet(std::move(spectra), std::move(omegas));
}

inline double sample_lambda(const rsbl::matpoly::NodeSet& nodes, RngStream& rng) {
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < nodes.count(); ++i)
    for (double x : nodes.lambda(i)) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  return uniform_in(rng, lo - 1.0, hi + 1.0);
}

inline double norm2(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace testing_support
