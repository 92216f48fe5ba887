#include "rsbl/matpoly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rsbl::matpoly {

namespace {

DenseMatrix scaled_identity(std::size_t b, double s) {
  return s * DenseMatrix::identity(b);
}

double max_abs_shift(std::span<const double> values, double shift) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(shift - v));
  return m;
}

std::vector<double> diagonal_of(const DenseMatrix& m) {
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = m(i, i);
  return out;
}

void require_square(const DenseMatrix& x, std::size_t b, const char* what) {
  if (x.rows() != b || x.cols() != b) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(what) + ": expected " + std::to_string(b) + "x" +
                    std::to_string(b));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// MatrixPolynomial

MatrixPolynomial::MatrixPolynomial(std::vector<DenseMatrix> coeffs)
    : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) {
    throw Error(ErrorKind::InvalidArgument, "matrix polynomial needs >= 1 coefficient");
  }
  b_ = coeffs_.front().rows();
  for (const auto& c : coeffs_) require_square(c, b_, "coefficient block");
}

MatrixPolynomial MatrixPolynomial::zero(std::size_t block_size, std::size_t degree) {
  return MatrixPolynomial(
      std::vector<DenseMatrix>(degree + 1, DenseMatrix(block_size, block_size)));
}

DenseMatrix eval_matrix(const MatrixPolynomial& p, const DenseMatrix& x) {
  require_square(x, p.block_size(), "eval_matrix argument");
  RowMajorMatrix h = p.coeff(p.degree()).eigen();
  for (std::size_t i = p.degree(); i-- > 0;) {
    h = p.coeff(i).eigen() + x.eigen() * h;
  }
  return DenseMatrix(h);
}

DenseMatrix eval_lambda(const MatrixPolynomial& p, double lambda) {
  RowMajorMatrix h = p.coeff(p.degree()).eigen();
  for (std::size_t i = p.degree(); i-- > 0;) {
    h = p.coeff(i).eigen() + lambda * h;
  }
  return DenseMatrix(h);
}

double solvent_residual(const MatrixPolynomial& p, const DenseMatrix& b) {
  return spectral_norm(eval_matrix(p, b));
}

BezoutResult bezout_quotient(const MatrixPolynomial& p, const DenseMatrix& b) {
  const std::size_t bs = p.block_size();
  require_square(b, bs, "bezout_quotient divisor");
  const std::size_t d = p.degree();
  if (d == 0) return {MatrixPolynomial::zero(bs, 0), p.coeff(0)};

  std::vector<DenseMatrix> q(d);
  q[d - 1] = p.coeff(d);
  for (std::size_t i = d - 1; i >= 1; --i) q[i - 1] = p.coeff(i) + b * q[i];
  DenseMatrix remainder = p.coeff(0) + b * q[0];
  return {MatrixPolynomial(std::move(q)), std::move(remainder)};
}

// ---------------------------------------------------------------------------
// NodeSet

NodeSet::NodeSet(std::vector<std::vector<double>> lambdas,
                 std::vector<DenseMatrix> omegas)
    : lambdas_(std::move(lambdas)), omegas_(std::move(omegas)) {
  if (lambdas_.empty() || lambdas_.size() != omegas_.size()) {
    throw Error(ErrorKind::InvalidArgument, "node set needs matching nonempty lists");
  }
  b_ = lambdas_.front().size();
  if (b_ == 0) throw Error(ErrorKind::InvalidArgument, "empty node block");
  for (std::size_t i = 0; i < lambdas_.size(); ++i) {
    if (lambdas_[i].size() != b_) {
      throw Error(ErrorKind::DimensionMismatch, "node spectrum size differs");
    }
    require_square(omegas_[i], b_, "node Omega");
    for (std::size_t j = 0; j < i; ++j) {
      for (double x : lambdas_[i]) {
        if (std::find(lambdas_[j].begin(), lambdas_[j].end(), x) != lambdas_[j].end()) {
          throw Error(ErrorKind::InvalidArgument,
                      "node spectra " + std::to_string(j) + " and " +
                          std::to_string(i) + " intersect");
        }
      }
    }
  }
  solvents_.reserve(lambdas_.size());
  for (std::size_t i = 0; i < lambdas_.size(); ++i) {
    const auto sv = singular_values(omegas_[i]);
    if (!(sv.back() > 1e-12 * sv.front())) {
      throw Error(ErrorKind::SingularBlock, "Omega_" + std::to_string(i) + " is singular",
                  i);
    }
    // A 1x1 similarity is the identity map; skip the rounding.
    solvents_.push_back(b_ == 1 ? lambda_matrix(i)
                                : solve_linear(omegas_[i], lambda_matrix(i) * omegas_[i]).x);
  }
}

DenseMatrix NodeSet::lambda_matrix(std::size_t i) const {
  return DenseMatrix::diagonal(lambda(i));
}

double NodeSet::min_gap() const {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count(); ++i)
    for (std::size_t j = 0; j < count(); ++j) {
      if (i == j) continue;
      for (double a : lambdas_[i])
        for (double c : lambdas_[j]) gap = std::min(gap, std::abs(a - c));
    }
  return gap;
}

// ---------------------------------------------------------------------------
// Vandermonde route

DenseMatrix block_vandermonde(std::span<const DenseMatrix> solvents) {
  if (solvents.empty()) throw Error(ErrorKind::InvalidArgument, "no solvents");
  const std::size_t b = solvents.front().rows();
  const std::size_t d = solvents.size();
  RowMajorMatrix van(static_cast<Eigen::Index>(b * d), static_cast<Eigen::Index>(b * d));
  for (std::size_t i = 0; i < d; ++i) {
    require_square(solvents[i], b, "Vandermonde node");
    RowMajorMatrix power = RowMajorMatrix::Identity(static_cast<Eigen::Index>(b),
                                                    static_cast<Eigen::Index>(b));
    for (std::size_t j = 0; j < d; ++j) {
      van.block(static_cast<Eigen::Index>(i * b), static_cast<Eigen::Index>(j * b),
                static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)) = power;
      if (j + 1 < d) power = power * solvents[i].eigen();
    }
  }
  return DenseMatrix(van);
}

DenseMatrix block_vandermonde(const NodeSet& nodes) {
  return block_vandermonde(nodes.solvents());
}

MatrixPolynomial fundamental_via_solve(std::span<const DenseMatrix> solvents,
                                       std::size_t k) {
  const std::size_t d = solvents.size();
  if (k >= d) throw Error(ErrorKind::InvalidArgument, "node index out of range");
  const std::size_t b = solvents.front().rows();
  const DenseMatrix van = block_vandermonde(solvents);
  RowMajorMatrix rhs = RowMajorMatrix::Zero(static_cast<Eigen::Index>(b * d),
                                            static_cast<Eigen::Index>(b));
  rhs.middleRows(static_cast<Eigen::Index>(k * b), static_cast<Eigen::Index>(b)).setIdentity();
  DenseMatrix coeffs;
  try {
    coeffs = solve_linear(van, DenseMatrix(rhs)).x;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SingularMatrix) throw;
    throw Error(ErrorKind::SingularVandermonde, e.what());
  }
  std::vector<DenseMatrix> c;
  c.reserve(d);
  for (std::size_t i = 0; i < d; ++i) c.push_back(coeffs.block(i * b, 0, b, b));
  return MatrixPolynomial(std::move(c));
}

MatrixPolynomial fundamental_via_solve(const NodeSet& nodes, std::size_t k) {
  return fundamental_via_solve(nodes.solvents(), k);
}

double vandermonde_condition(const NodeSet& nodes) {
  const DenseMatrix van = block_vandermonde(nodes);
  try {
    return solve_linear(van, DenseMatrix::identity(van.rows())).cond_estimate;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SingularMatrix) throw;
    return std::numeric_limits<double>::infinity();
  }
}

// ---------------------------------------------------------------------------
// Chain route

double SolventChain::max_condition() const {
  double m = 1.0;
  for (double c : condition) m = std::max(m, c);
  return m;
}

std::vector<std::size_t> chain_order(std::size_t d, std::size_t k) {
  if (k >= d) throw Error(ErrorKind::InvalidArgument, "node index out of range");
  std::vector<std::size_t> order(d);
  order[0] = k;
  for (std::size_t p = 1; p <= k; ++p) order[p] = p - 1;
  for (std::size_t p = k + 1; p < d; ++p) order[p] = p;
  return order;
}

SolventChain solvent_chain(const NodeSet& nodes, std::size_t k) {
  const std::size_t d = nodes.count();
  const std::size_t b = nodes.block_size();
  SolventChain chain;
  chain.k = k;
  chain.order = chain_order(d, k);
  chain.lambdas.reserve(d);
  for (std::size_t p = 0; p < d; ++p) chain.lambdas.push_back(nodes.lambda_matrix(chain.order[p]));
  chain.omega_hat.resize(d);
  chain.b_hat.resize(d);
  chain.s.resize(d);
  chain.condition.resize(d + 1, 1.0);

  const DenseMatrix eye = DenseMatrix::identity(b);
  for (std::size_t p = d; p-- > 0;) {
    const DenseMatrix& bp = nodes.solvent(chain.order[p]);
    auto& row = chain.s[p];
    row.reserve(d - p);
    row.push_back(eye);
    for (std::size_t j = d - 1; j > p; --j) {
      const DenseMatrix& prev = row.back();
      row.push_back(bp * prev - prev * chain.b_hat[j]);
    }
    const DenseMatrix& s_last = row.back();
    const auto sv = singular_values(s_last);
    if (!(sv.back() >= 1e-12 * sv.front())) {
      throw Error(ErrorKind::ChainBreakdown,
                  "S_{" + std::to_string(p) + ",d} is numerically singular", p);
    }
    chain.omega_hat[p] = nodes.omega(chain.order[p]) * s_last;
    try {
      auto solved = solve_linear(chain.omega_hat[p], chain.lambdas[p] * chain.omega_hat[p]);
      chain.b_hat[p] = b == 1 ? chain.lambdas[p] : std::move(solved.x);
      chain.condition[p] = solved.cond_estimate;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularMatrix) throw;
      throw Error(ErrorKind::ChainBreakdown, e.what(), p);
    }
  }
  try {
    auto inv = solve_linear(chain.s[0].back(), eye);
    chain.s_inverse = std::move(inv.x);
    chain.condition[d] = inv.cond_estimate;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SingularMatrix) throw;
    throw Error(ErrorKind::ChainBreakdown, e.what(), 0);
  }
  return chain;
}

std::vector<SolventChain> all_chains(const NodeSet& nodes) {
  std::vector<SolventChain> chains;
  chains.reserve(nodes.count());
  for (std::size_t k = 0; k < nodes.count(); ++k) chains.push_back(solvent_chain(nodes, k));
  return chains;
}

DenseMatrix fundamental_via_chain(const SolventChain& chain, double lambda) {
  const std::size_t b = chain.block_size();
  RowMajorMatrix prod = RowMajorMatrix::Identity(static_cast<Eigen::Index>(b),
                                                 static_cast<Eigen::Index>(b));
  for (std::size_t p = chain.order.size() - 1; p >= 1; --p) {
    RowMajorMatrix factor = -chain.b_hat[p].eigen();
    factor.diagonal().array() += lambda;
    prod = prod * factor;
  }
  return DenseMatrix(prod * chain.s_inverse.eigen());
}

MatrixPolynomial fundamental_polynomial(const SolventChain& chain) {
  const std::size_t b = chain.block_size();
  std::vector<RowMajorMatrix> c{RowMajorMatrix::Identity(static_cast<Eigen::Index>(b),
                                                         static_cast<Eigen::Index>(b))};
  for (std::size_t p = chain.order.size() - 1; p >= 1; --p) {
    const RowMajorMatrix& bh = chain.b_hat[p].eigen();
    std::vector<RowMajorMatrix> next(c.size() + 1,
                                     RowMajorMatrix::Zero(static_cast<Eigen::Index>(b),
                                                          static_cast<Eigen::Index>(b)));
    for (std::size_t a = 0; a < c.size(); ++a) {
      next[a + 1] += c[a];
      next[a] -= c[a] * bh;
    }
    c = std::move(next);
  }
  std::vector<DenseMatrix> coeffs;
  coeffs.reserve(c.size());
  for (const auto& m : c) coeffs.emplace_back(m * chain.s_inverse.eigen());
  return MatrixPolynomial(std::move(coeffs));
}

// ---------------------------------------------------------------------------
// Growth quantities

ChiQuantities chi_quantities(const NodeSet& nodes, std::span<const SolventChain> chains,
                             double cl_min, double cl_max) {
  const std::size_t d = nodes.count();
  const std::size_t b = nodes.block_size();
  if (chains.size() != d) throw Error(ErrorKind::InvalidArgument, "need one chain per node");
  if (!(cl_min <= cl_max)) throw Error(ErrorKind::InvalidArgument, "empty cluster interval");
  for (std::size_t i = 0; i < d; ++i)
    for (double x : nodes.lambda(i))
      if (x < cl_min || x > cl_max) {
        throw Error(ErrorKind::InvalidArgument, "node spectrum outside cluster interval");
      }

  ChiQuantities chi;
  chi.mono_per_node.assign(d, 1.0);
  chi.coef_per_node.assign(d, 1.0);
  if (d == 1) {
    chi.coef = 1.0;
    return chi;
  }
  chi.coef = 0.0;
  const double exponent = 1.0 / static_cast<double>(d - 1);
  for (std::size_t k = 0; k < d; ++k) {
    const SolventChain& chain = chains[k];
    double mono = 1.0;
    double gap = std::numeric_limits<double>::infinity();
    const auto lam0 = diagonal_of(chain.lambdas[0]);
    for (std::size_t p = 1; p < d; ++p) {
      const auto lam = diagonal_of(chain.lambdas[p]);
      for (double endpoint : {cl_min, cl_max}) {
        const double denom = max_abs_shift(lam, endpoint);
        if (denom == 0.0) {
          throw Error(ErrorKind::DegenerateEndpoint,
                      "node block equals cluster endpoint times identity", p);
        }
        const double num = spectral_norm(scaled_identity(b, endpoint) - chain.b_hat[p]);
        mono = std::max(mono, num / denom);
      }
      for (double a : lam0)
        for (double c : lam) gap = std::min(gap, std::abs(a - c));
    }
    // ||S^{-1}|| = 1 / sigma_min(S); at b = 1, d = 2 this makes coef exactly 1.
    const double coef = gap / std::pow(smallest_singular(chain.s[0].back()), exponent);
    chi.mono_per_node[k] = mono;
    chi.coef_per_node[k] = coef;
    chi.mono = std::max(chi.mono, mono);
    chi.coef = std::max(chi.coef, coef);
  }
  return chi;
}

std::vector<GrowthSample> growth_bound_check(const NodeSet& nodes,
                                             std::span<const SolventChain> chains,
                                             double cl_min, double cl_max,
                                             std::span<const double> samples) {
  const std::size_t d = nodes.count();
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "growth estimate needs d >= 2");
  const ChiQuantities chi = chi_quantities(nodes, chains, cl_min, cl_max);
  const double gap = nodes.min_gap();
  const double exponent = 1.0 / static_cast<double>(d - 1);

  std::vector<GrowthSample> out;
  out.reserve(samples.size());
  for (double lambda : samples) {
    if (lambda >= cl_min && lambda <= cl_max) {
      throw Error(ErrorKind::InvalidArgument, "sample inside cluster interval");
    }
    GrowthSample s;
    s.lambda = lambda;
    for (const auto& chain : chains) {
      s.lhs = std::max(s.lhs, std::pow(spectral_norm(fundamental_via_chain(chain, lambda)),
                                       exponent));
    }
    s.rhs = std::max(cl_max - lambda, lambda - cl_min) / gap * chi.mono * chi.coef;
    s.holds = s.lhs <= s.rhs * (1.0 + 1e-10);
    out.push_back(s);
  }
  return out;
}

NormBoundCheck norm_bound_check(const MatrixPolynomial& p,
                                std::span<const double> lambda0,
                                const DenseMatrix& omega0, std::size_t grid_size) {
  const std::size_t b = p.block_size();
  if (lambda0.size() != b) throw Error(ErrorKind::DimensionMismatch, "lambda0 size");
  require_square(omega0, b, "Omega0");
  const DenseMatrix lam = DenseMatrix::diagonal(lambda0);
  const DenseMatrix b0 = solve_linear(omega0, lam * omega0).x;

  const auto [lo, hi] = std::minmax_element(lambda0.begin(), lambda0.end());
  double sup = 0.0;
  for (double x : lambda0) sup = std::max(sup, spectral_norm(eval_lambda(p, x)));
  if (grid_size >= 2 && *hi > *lo) {
    for (std::size_t g = 0; g < grid_size; ++g) {
      const double t = static_cast<double>(g) / static_cast<double>(grid_size - 1);
      sup = std::max(sup, spectral_norm(eval_lambda(p, *lo + t * (*hi - *lo))));
    }
  }
  NormBoundCheck r;
  r.lhs = spectral_norm(eval_matrix(p, b0));
  r.rhs = std::sqrt(static_cast<double>(b)) * spectral_norm(inverse(omega0)) *
          spectral_norm(omega0) * sup;
  r.holds = r.lhs <= r.rhs * (1.0 + 1e-10);
  return r;
}

}  // namespace rsbl::matpoly
