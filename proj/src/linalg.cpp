#include "rsbl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rsbl {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

double norm1(const RowMajorMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::SingularVandermonde: return "SingularVandermonde";
    case ErrorKind::ChainBreakdown: return "ChainBreakdown";
    case ErrorKind::DegenerateEndpoint: return "DegenerateEndpoint";
    case ErrorKind::Breakdown: return "Breakdown";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SingularK: return "SingularK";
    case ErrorKind::SingularBlock: return "SingularBlock";
    case ErrorKind::SingularDifference: return "SingularDifference";
    case ErrorKind::ZeroGap: return "ZeroGap";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what,
             std::optional<std::size_t> index)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what),
      kind_(kind),
      index_(index) {}

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : m_(RowMajorMatrix::Zero(idx(rows), idx(cols))) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> data) {
  if (data.size() != rows * cols) {
    throw Error(ErrorKind::DimensionMismatch,
                "data length " + std::to_string(data.size()) + " != " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  }
  m_ = Eigen::Map<const RowMajorMatrix>(data.data(), idx(rows), idx(cols));
  check_finite();
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  return DenseMatrix(RowMajorMatrix::Identity(idx(n), idx(n)));
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> values) {
  RowMajorMatrix m = RowMajorMatrix::Zero(idx(values.size()), idx(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) m(idx(i), idx(i)) = values[i];
  return DenseMatrix(m);
}

DenseMatrix DenseMatrix::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t nrows = rows.size();
  const std::size_t ncols = nrows == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(nrows * ncols);
  for (const auto& row : rows) {
    if (row.size() != ncols) {
      throw Error(ErrorKind::DimensionMismatch, "ragged row list");
    }
    data.insert(data.end(), row.begin(), row.end());
  }
  return DenseMatrix(nrows, ncols, std::move(data));
}

void DenseMatrix::check_finite() const {
  if (!m_.allFinite()) {
    throw Error(ErrorKind::NonFinite, "matrix has NaN or Inf entries");
  }
}

DenseMatrix DenseMatrix::block(std::size_t row, std::size_t col,
                               std::size_t nrows, std::size_t ncols) const {
  if (row + nrows > rows() || col + ncols > cols()) {
    throw Error(ErrorKind::DimensionMismatch, "block out of range");
  }
  return DenseMatrix(m_.block(idx(row), idx(col), idx(nrows), idx(ncols)));
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "operator+");
  }
  return DenseMatrix(a.m_ + b.m_);
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "operator-");
  }
  return DenseMatrix(a.m_ - b.m_);
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "operator*");
  }
  return DenseMatrix(a.m_ * b.m_);
}

DenseMatrix operator*(double s, const DenseMatrix& a) { return DenseMatrix(s * a.m_); }

DenseMatrix operator-(const DenseMatrix& a) { return DenseMatrix(-a.m_); }

// ---------------------------------------------------------------------------
// RngStream

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  engine_.seed(seq);
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  return u * scale;
}

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, RngStream& rng) {
  if (rows == 0 || cols == 0) {
    throw Error(ErrorKind::InvalidArgument, "gaussian_matrix needs rows, cols >= 1");
  }
  std::vector<double> data(rows * cols);
  for (double& x : data) x = rng.normal();
  return DenseMatrix(rows, cols, std::move(data));
}

// ---------------------------------------------------------------------------
// Factorizations

QrResult qr_factor(const DenseMatrix& m) {
  const auto rows = idx(m.rows());
  const auto cols = idx(m.cols());
  if (rows < cols) {
    throw Error(ErrorKind::InvalidArgument, "qr_factor needs rows >= cols");
  }
  const Eigen::MatrixXd a = m.eigen();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  Eigen::MatrixXd r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < cols; ++i) {
    if (r(i, i) < 0.0) {
      r.row(i) *= -1.0;
      q.col(i) *= -1.0;
    }
  }
  const double scale = spectral_norm(m);
  for (Eigen::Index i = 0; i < cols; ++i) {
    if (r(i, i) < 1e-12 * scale || scale == 0.0) {
      throw Error(ErrorKind::RankDeficient,
                  "R(" + std::to_string(i) + "," + std::to_string(i) +
                      ") below 1e-12 ||M||");
    }
  }
  return {DenseMatrix(q), DenseMatrix(r)};
}

SymEigResult sym_eig(const DenseMatrix& s) {
  if (!s.square()) throw Error(ErrorKind::DimensionMismatch, "sym_eig needs square");
  const auto& a = s.eigen();
  if ((a - a.transpose()).norm() > 1e-12 * a.norm()) {
    throw Error(ErrorKind::NotSymmetric, "sym_eig input not symmetric");
  }
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::VectorXd& w = es.eigenvalues();
  return {std::vector<double>(w.data(), w.data() + w.size()),
          DenseMatrix(es.eigenvectors())};
}

std::vector<double> singular_values(const DenseMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return {};
  const Eigen::MatrixXd a = m.eigen();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  const Eigen::VectorXd& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

double spectral_norm(const DenseMatrix& m) {
  const auto s = singular_values(m);
  return s.empty() ? 0.0 : s.front();
}

double smallest_singular(const DenseMatrix& m) {
  const auto s = singular_values(m);
  return s.empty() ? 0.0 : s.back();
}

SolveResult solve_linear(const DenseMatrix& m, const DenseMatrix& b) {
  if (!m.square()) throw Error(ErrorKind::DimensionMismatch, "solve_linear needs square M");
  if (b.rows() != m.rows()) throw Error(ErrorKind::DimensionMismatch, "solve_linear rhs rows");
  const Eigen::MatrixXd a = m.eigen();
  const double scale = norm1(m.eigen());
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::VectorXd pivots = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < pivots.size(); ++i) {
    if (!(std::abs(pivots(i)) >= 1e-14 * scale) || scale == 0.0) {
      throw Error(ErrorKind::SingularMatrix,
                  "pivot " + std::to_string(i) + " below 1e-14 ||M||_1");
    }
  }
  const double rcond = lu.rcond();
  const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd rhs = b.eigen();
  return {DenseMatrix(lu.solve(rhs)), cond};
}

DenseMatrix inverse(const DenseMatrix& m) {
  return solve_linear(m, DenseMatrix::identity(m.rows())).x;
}

}  // namespace rsbl
