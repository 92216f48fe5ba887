#include "rsbl/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsbl/kernels.hpp"

namespace rsbl::lanczos {

namespace {

struct ThinQr {
  Eigen::MatrixXd q;
  Eigen::MatrixXd r;
};

ThinQr thin_qr(const Eigen::MatrixXd& w) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
  ThinQr out;
  out.q = qr.householderQ() * Eigen::MatrixXd::Identity(w.rows(), w.cols());
  out.r = qr.matrixQR().topRows(w.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < w.cols(); ++i) {
    if (out.r(i, i) < 0.0) {
      out.r.row(i) *= -1.0;
      out.q.col(i) *= -1.0;
    }
  }
  return out;
}

double block_norm(const Eigen::MatrixXd& w) {
  if (w.size() == 0) return 0.0;
  const Eigen::MatrixXd gram = w.transpose() * w;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

}  // namespace

// ---------------------------------------------------------------------------
// LinearOperator

LinearOperator::LinearOperator(std::size_t n, ApplyFn apply)
    : n_(n), apply_(std::move(apply)) {
  if (n_ == 0) throw Error(ErrorKind::InvalidArgument, "operator dimension must be >= 1");
}

LinearOperator LinearOperator::diagonal(std::vector<double> diag) {
  const std::size_t n = diag.size();
  auto d = std::make_shared<const std::vector<double>>(std::move(diag));
  return LinearOperator(n, [d](const Eigen::MatrixXd& x) { return kernels::scale_rows(*d, x); });
}

LinearOperator LinearOperator::dense(const DenseMatrix& a) {
  if (!a.square()) throw Error(ErrorKind::DimensionMismatch, "operator must be square");
  const auto& m = a.eigen();
  if ((m - m.transpose()).norm() > 1e-12 * m.norm()) {
    throw Error(ErrorKind::NotSymmetric, "dense operator is not symmetric");
  }
  auto mat = std::make_shared<const Eigen::MatrixXd>(m);
  return LinearOperator(a.rows(), [mat](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    return (*mat) * x;
  });
}

LinearOperator LinearOperator::normal_equations(const DenseMatrix& ahat) {
  auto mat = std::make_shared<const Eigen::MatrixXd>(ahat.eigen());
  return LinearOperator(ahat.cols(), [mat](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    const Eigen::MatrixXd y = (*mat) * x;
    return mat->transpose() * y;
  });
}

Eigen::MatrixXd LinearOperator::apply(const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.rows()) != n_) {
    throw Error(ErrorKind::DimensionMismatch, "operator apply");
  }
  matvecs_ += static_cast<std::size_t>(x.cols());
  return apply_(x);
}

double LinearOperator::symmetry_defect(RngStream& rng, std::size_t probes) const {
  double worst = 0.0;
  for (std::size_t p = 0; p < probes; ++p) {
    const Eigen::MatrixXd x = gaussian_matrix(n_, 1, rng).eigen();
    const Eigen::MatrixXd y = gaussian_matrix(n_, 1, rng).eigen();
    const Eigen::MatrixXd ax = apply_(x);
    const Eigen::MatrixXd ay = apply_(y);
    const double norm_est = std::max(ax.norm() / x.norm(), ay.norm() / y.norm());
    if (norm_est == 0.0) continue;
    const double defect = std::abs(x.col(0).dot(ay.col(0)) - y.col(0).dot(ax.col(0)));
    worst = std::max(worst, defect / (norm_est * x.norm() * y.norm()));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// BlockLanczos

BlockLanczos::BlockLanczos(LinearOperator& op, const DenseMatrix& omega)
    : op_(&op), n_(op.dimension()), b_(omega.cols()) {
  if (omega.rows() != n_) throw Error(ErrorKind::DimensionMismatch, "Omega rows != n");
  if (b_ == 0 || b_ > n_) throw Error(ErrorKind::InvalidArgument, "block size out of range");
  pending_ = omega.eigen();
  pending_scale_ = block_norm(pending_);
  const auto cap = static_cast<Eigen::Index>(std::min(n_, 8 * b_));
  v_.resize(static_cast<Eigen::Index>(n_), cap);
  t_ = Eigen::MatrixXd::Zero(cap, cap);
  orthonormalize_pending();
}

void BlockLanczos::orthonormalize_pending() {
  const auto b = static_cast<Eigen::Index>(b_);
  const auto col = static_cast<Eigen::Index>(b_ * steps_);
  if (static_cast<std::size_t>(col + b) > n_) {
    throw Error(ErrorKind::InvalidArgument, "Krylov space exhausted (b * steps > n)");
  }
  ThinQr qr = thin_qr(pending_);
  double margin = pending_scale_ > 0.0 ? qr.r.diagonal().minCoeff() / pending_scale_ : 0.0;
  if (steps_ > 0) margins_.back() = margin;
  if (!(margin >= 1e-12)) {
    throw Error(ErrorKind::Breakdown,
                "block " + std::to_string(steps_) + " is rank-deficient", steps_);
  }
  if (v_.cols() < col + b) {
    const Eigen::Index cap =
        std::min<Eigen::Index>(static_cast<Eigen::Index>(n_), std::max(2 * v_.cols(), col + b));
    v_.conservativeResize(Eigen::NoChange, cap);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(cap, cap);
    t.topLeftCorner(t_.rows(), t_.cols()) = t_;
    t_ = std::move(t);
  }
  v_.middleCols(col, b) = qr.q;
  if (steps_ > 0) {
    t_.block(col, col - b, b, b) = qr.r;
    t_.block(col - b, col, b, b) = qr.r.transpose();
  }
}

void BlockLanczos::step() {
  if (steps_ > 0) orthonormalize_pending();
  const auto b = static_cast<Eigen::Index>(b_);
  const auto col = static_cast<Eigen::Index>(b_ * steps_);
  Eigen::MatrixXd w = op_->apply(v_.middleCols(col, b));
  pending_scale_ = block_norm(w);
  const Eigen::MatrixXd coeffs = kernels::project_out(v_.leftCols(col + b), w);
  const Eigen::MatrixXd diag = coeffs.middleRows(col, b);
  t_.block(col, col, b, b) = 0.5 * (diag + diag.transpose());
  pending_ = std::move(w);
  margins_.push_back(std::numeric_limits<double>::quiet_NaN());
  ++steps_;
}

Eigen::MatrixXd BlockLanczos::projected() const {
  const auto c = static_cast<Eigen::Index>(columns());
  return t_.topLeftCorner(c, c);
}

Eigen::Ref<const Eigen::MatrixXd> BlockLanczos::basis_columns() const {
  return v_.leftCols(static_cast<Eigen::Index>(columns()));
}

BlockKrylovBasis BlockLanczos::basis() const {
  BlockKrylovBasis out;
  out.n = n_;
  out.block_size = b_;
  out.steps = steps_;
  out.v = DenseMatrix(Eigen::MatrixXd(basis_columns()));
  out.t = DenseMatrix(projected());
  out.residual = steps_ > 0 ? pending_ : Eigen::MatrixXd(n_, 0);
  out.qr_margin = margins_;
  return out;
}

BlockKrylovBasis block_lanczos(LinearOperator& op, const DenseMatrix& omega,
                               std::size_t steps) {
  if (steps == 0) throw Error(ErrorKind::InvalidArgument, "steps must be >= 1");
  if (omega.cols() * steps > op.dimension()) {
    throw Error(ErrorKind::InvalidArgument, "b * steps exceeds n");
  }
  BlockLanczos lan(op, omega);
  for (std::size_t s = 0; s < steps; ++s) lan.step();
  return lan.basis();
}

// ---------------------------------------------------------------------------
// Rayleigh-Ritz

RitzSet rayleigh_ritz(const BlockKrylovBasis& basis, std::size_t how_many, Which which) {
  const auto dim = static_cast<Eigen::Index>(basis.t.rows());
  if (how_many > static_cast<std::size_t>(dim)) {
    throw Error(ErrorKind::InvalidArgument, "how_many exceeds basis dimension");
  }
  const Eigen::MatrixXd t = basis.t.eigen();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  const auto k = static_cast<Eigen::Index>(how_many);
  const Eigen::Index first = which == Which::Largest ? dim - k : 0;
  const Eigen::MatrixXd y = es.eigenvectors().middleCols(first, k);

  RitzSet out;
  out.values.assign(es.eigenvalues().data() + first, es.eigenvalues().data() + first + k);
  const Eigen::MatrixXd v = basis.v.eigen();
  out.vectors = DenseMatrix(Eigen::MatrixXd(v * y));
  const auto b = static_cast<Eigen::Index>(basis.block_size);
  out.residuals.resize(how_many);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (basis.residual.cols() == 0) {
      out.residuals[static_cast<std::size_t>(i)] = 0.0;
      continue;
    }
    const Eigen::VectorXd tail = y.col(i).tail(b);
    out.residuals[static_cast<std::size_t>(i)] = (basis.residual * tail).norm();
  }
  return out;
}

ConvergenceResult run_until_converged(LinearOperator& op, const DenseMatrix& omega,
                                      std::vector<double> targets, double tol,
                                      std::size_t max_matvecs, Which which) {
  if (targets.empty()) throw Error(ErrorKind::InvalidArgument, "no target eigenvalues");
  std::sort(targets.begin(), targets.end());
  const std::size_t k = targets.size();
  const std::size_t b = omega.cols();
  BlockLanczos lan(op, omega);

  for (;;) {
    const std::size_t next = b * (lan.steps() + 1);
    if (next > max_matvecs || next > op.dimension()) {
      throw Error(ErrorKind::NoConvergence,
                  "no convergence within " + std::to_string(b * lan.steps()) + " matvecs");
    }
    lan.step();
    if (lan.columns() < k) continue;

    const Eigen::MatrixXd t = lan.projected();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& theta = es.eigenvalues();
    const auto first =
        which == Which::Largest ? theta.size() - static_cast<Eigen::Index>(k) : Eigen::Index{0};
    bool converged = true;
    for (std::size_t i = 0; i < k && converged; ++i) {
      converged = std::abs(theta(first + static_cast<Eigen::Index>(i)) - targets[i]) <= tol;
    }
    if (converged) {
      ConvergenceResult out;
      out.matvecs = lan.columns();
      out.steps = lan.steps();
      out.ritz = rayleigh_ritz(lan.basis(), k, which);
      return out;
    }
  }
}

}  // namespace rsbl::lanczos
