#pragma once

// Matrix polynomials with right-side coefficients, block Vandermonde
// interpolation, and the chain-of-solvents construction of fundamental
// matrix polynomials.
//
// Node and chain indices are 0-based throughout: node k of a NodeSet with
// d nodes has k in [0, d).

#include <cstddef>
#include <span>
#include <vector>

#include "rsbl/linalg.hpp"

namespace rsbl::matpoly {

/// Phi(X) = C_0 + X C_1 + ... + X^d C_d with b x b coefficients.
class MatrixPolynomial {
 public:
  explicit MatrixPolynomial(std::vector<DenseMatrix> coeffs);

  static MatrixPolynomial zero(std::size_t block_size, std::size_t degree);

  std::size_t block_size() const noexcept { return b_; }
  std::size_t degree() const noexcept { return coeffs_.size() - 1; }
  const DenseMatrix& coeff(std::size_t i) const { return coeffs_.at(i); }
  const std::vector<DenseMatrix>& coeffs() const noexcept { return coeffs_; }

 private:
  std::size_t b_ = 0;
  std::vector<DenseMatrix> coeffs_;
};

/// Right-coefficient Horner: H = C_d, then H = C_i + X H.
DenseMatrix eval_matrix(const MatrixPolynomial& p, const DenseMatrix& x);

/// Phi(lambda I).
DenseMatrix eval_lambda(const MatrixPolynomial& p, double lambda);

/// ||Phi(B)||.
double solvent_residual(const MatrixPolynomial& p, const DenseMatrix& b);

struct BezoutResult {
  MatrixPolynomial quotient;  // degree d-1 (zero polynomial for constant p)
  DenseMatrix remainder;      // equals Phi(B)
};

/// Phi(lambda) = (lambda I - B) q(lambda) + remainder for every lambda.
BezoutResult bezout_quotient(const MatrixPolynomial& p, const DenseMatrix& b);

/// Interpolation nodes B_i = Omega_i^{-1} Lambda_i Omega_i with diagonal
/// Lambda_i given explicitly. Node spectra must be pairwise disjoint and every
/// Omega_i nonsingular (smallest singular value > 1e-12 ||Omega_i||).
class NodeSet {
 public:
  NodeSet(std::vector<std::vector<double>> lambdas, std::vector<DenseMatrix> omegas);

  std::size_t block_size() const noexcept { return b_; }
  std::size_t count() const noexcept { return lambdas_.size(); }

  std::span<const double> lambda(std::size_t i) const { return lambdas_.at(i); }
  DenseMatrix lambda_matrix(std::size_t i) const;
  const DenseMatrix& omega(std::size_t i) const { return omegas_.at(i); }
  const DenseMatrix& solvent(std::size_t i) const { return solvents_.at(i); }
  const std::vector<DenseMatrix>& solvents() const noexcept { return solvents_; }

  /// Smallest |lambda_i - lambda_j| over distinct nodes i != j.
  double min_gap() const;

 private:
  std::size_t b_ = 0;
  std::vector<std::vector<double>> lambdas_;
  std::vector<DenseMatrix> omegas_;
  std::vector<DenseMatrix> solvents_;
};

/// Block rows [I, B_i, ..., B_i^{d-1}].
DenseMatrix block_vandermonde(std::span<const DenseMatrix> solvents);
DenseMatrix block_vandermonde(const NodeSet& nodes);

/// The degree d-1 polynomial F with F(B_j) = delta_kj I, obtained by solving
/// Van [C_0; ...; C_{d-1}] = e_k (x) I. Throws SingularVandermonde.
MatrixPolynomial fundamental_via_solve(std::span<const DenseMatrix> solvents,
                                       std::size_t k);
MatrixPolynomial fundamental_via_solve(const NodeSet& nodes, std::size_t k);

/// 1-norm condition estimate of the block Vandermonde matrix.
double vandermonde_condition(const NodeSet& nodes);

/// Recursive quantities for the factored form
///   F_k(lambda) = (lambda I - Bhat_{d-1})...(lambda I - Bhat_2)(lambda I - Bhat_1) S_0^{-1}
/// where positions are a permutation of the nodes with node k first.
struct SolventChain {
  std::size_t k = 0;
  std::vector<std::size_t> order;      // order[p] = node at chain position p
  std::vector<DenseMatrix> lambdas;    // Lambda at each position (diagonal)
  std::vector<DenseMatrix> omega_hat;  // Omega_p S_p
  std::vector<DenseMatrix> b_hat;      // Omega_hat_p^{-1} Lambda_p Omega_hat_p
  /// s[p][0] = I and s[p][t] = B_p s[p][t-1] - s[p][t-1] Bhat_{d-t}, so the
  /// factors are taken from the far end of the chain inward; s[p].back() = S_p.
  std::vector<std::vector<DenseMatrix>> s;
  DenseMatrix s_inverse;               // S_0^{-1}
  /// Condition estimates, one per Omega_hat inversion plus the last entry for
  /// S_0.
  std::vector<double> condition;

  std::size_t degree() const noexcept { return order.size() - 1; }
  std::size_t block_size() const noexcept { return s_inverse.rows(); }
  double max_condition() const;
};

/// Chain position p -> node: p = 0 is node k, 1..k are nodes 0..k-1, and
/// positions above k keep their node.
std::vector<std::size_t> chain_order(std::size_t d, std::size_t k);

/// Builds the chain for node k. Throws ChainBreakdown(p) when S_p has
/// smallest singular value below 1e-12 ||S_p||.
SolventChain solvent_chain(const NodeSet& nodes, std::size_t k);

std::vector<SolventChain> all_chains(const NodeSet& nodes);

/// Evaluates the factored form at a scalar.
DenseMatrix fundamental_via_chain(const SolventChain& chain, double lambda);

/// Expands the factored form into right coefficients.
MatrixPolynomial fundamental_polynomial(const SolventChain& chain);

struct ChiQuantities {
  double mono = 1.0;
  double coef = 0.0;
  std::vector<double> mono_per_node;
  std::vector<double> coef_per_node;
};

/// Growth constants of the fundamental polynomials relative to the cluster
/// interval [cl_min, cl_max]. With d = 1 both constants are 1 (empty sets).
/// Throws DegenerateEndpoint when some Lambda_i equals cl * I at an endpoint.
ChiQuantities chi_quantities(const NodeSet& nodes,
                             std::span<const SolventChain> chains, double cl_min,
                             double cl_max);

struct GrowthSample {
  double lambda = 0.0;
  double lhs = 0.0;  // max_k ||F_k(lambda)||^{1/(d-1)}
  double rhs = 0.0;  // dist-to-far-endpoint / min gap * chi_mono * chi_coef
  bool holds = true;
};

/// Both sides of the growth estimate at each sample outside the interval.
std::vector<GrowthSample> growth_bound_check(const NodeSet& nodes,
                                             std::span<const SolventChain> chains,
                                             double cl_min, double cl_max,
                                             std::span<const double> samples);

struct NormBoundCheck {
  double lhs = 0.0;  // ||Phi(B0)||
  double rhs = 0.0;  // sqrt(b) ||Omega0^{-1}|| ||Omega0|| max ||Phi(lambda)||
  bool holds = true;
};

/// ||Phi(B0)|| against the eigenvalue-hull bound for B0 = Omega0^{-1} Lambda0
/// Omega0. The maximum over the hull uses a uniform grid plus the eigenvalues.
NormBoundCheck norm_bound_check(const MatrixPolynomial& p,
                                std::span<const double> lambda0,
                                const DenseMatrix& omega0,
                                std::size_t grid_size = 1000);

}  // namespace rsbl::matpoly
