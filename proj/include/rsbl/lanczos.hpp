#pragma once

// Block Lanczos with full reorthogonalization and Rayleigh-Ritz extraction.

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "rsbl/linalg.hpp"

namespace rsbl::lanczos {

/// Symmetric operator applied to n x b blocks. Counts single-vector
/// applications: each block apply adds its column count.
class LinearOperator {
 public:
  using ApplyFn = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

  LinearOperator(std::size_t n, ApplyFn apply);

  static LinearOperator diagonal(std::vector<double> diag);
  /// Throws NotSymmetric unless A = A^T to 1e-12 ||A||_F.
  static LinearOperator dense(const DenseMatrix& a);
  /// A = Ahat^T Ahat, applied as Ahat^T (Ahat X).
  static LinearOperator normal_equations(const DenseMatrix& ahat);

  std::size_t dimension() const noexcept { return n_; }
  std::size_t matvecs() const noexcept { return matvecs_; }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x);

  /// max |x^T(Ay) - y^T(Ax)| / (||A||_est ||x|| ||y||) over random probes.
  /// Probe applications are not counted.
  double symmetry_defect(RngStream& rng, std::size_t probes = 4) const;

 private:
  std::size_t n_;
  ApplyFn apply_;
  std::size_t matvecs_ = 0;
};

struct BlockKrylovBasis {
  std::size_t n = 0;
  std::size_t block_size = 0;
  std::size_t steps = 0;
  DenseMatrix v;                   // n x (b steps), orthonormal columns
  DenseMatrix t;                   // block tridiagonal projection
  Eigen::MatrixXd residual;        // A V_last - V T(:, last block), n x b
  /// Per step: smallest diag(R) of the next-block QR relative to the block norm
  /// before projection (the breakdown margin). Last step has no QR yet: NaN.
  std::vector<double> qr_margin;
};

/// Incremental block Lanczos. The QR that creates block j+1 is performed
/// lazily at the start of step j+1, so `steps()` blocks cost exactly
/// b * steps() operator applications and no more.
class BlockLanczos {
 public:
  /// Orthonormalizes Omega (no operator application).
  BlockLanczos(LinearOperator& op, const DenseMatrix& omega);

  /// Adds one block. Throws Breakdown(step) if the new block is rank-deficient
  /// at the 1e-12 gate, or InvalidArgument when the space is exhausted.
  void step();

  std::size_t steps() const noexcept { return steps_; }
  std::size_t block_size() const noexcept { return b_; }
  std::size_t columns() const noexcept { return b_ * steps_; }

  /// Current projected matrix (b steps x b steps).
  Eigen::MatrixXd projected() const;
  /// Orthonormal basis columns accumulated so far.
  Eigen::Ref<const Eigen::MatrixXd> basis_columns() const;

  BlockKrylovBasis basis() const;

 private:
  void orthonormalize_pending();

  LinearOperator* op_;
  std::size_t n_;
  std::size_t b_;
  std::size_t steps_ = 0;
  Eigen::MatrixXd v_;  // n x capacity
  Eigen::MatrixXd t_;  // capacity x capacity
  Eigen::MatrixXd pending_;  // residual block awaiting QR
  double pending_scale_ = 0.0;
  std::vector<double> margins_;
};

/// Runs `steps` block steps. Requires steps >= 1 and b * steps <= n.
BlockKrylovBasis block_lanczos(LinearOperator& op, const DenseMatrix& omega,
                               std::size_t steps);

enum class Which { Largest, Smallest };

struct RitzSet {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // n x how_many, column i pairs with values[i]
  std::vector<double> residuals;
};

RitzSet rayleigh_ritz(const BlockKrylovBasis& basis, std::size_t how_many, Which which);

struct ConvergenceResult {
  std::size_t matvecs = 0;
  std::size_t steps = 0;
  RitzSet ritz;
};

/// Steps one block at a time until the |targets| extreme Ritz values (on the
/// `which` end), sorted, match the sorted targets index-wise to within
/// absolute `tol`. Throws NoConvergence once `max_matvecs` would be exceeded
/// or the space is exhausted.
ConvergenceResult run_until_converged(LinearOperator& op, const DenseMatrix& omega,
                                      std::vector<double> targets, double tol = 1e-10,
                                      std::size_t max_matvecs =
                                          std::numeric_limits<std::size_t>::max(),
                                      Which which = Which::Largest);

}  // namespace rsbl::lanczos
