#pragma once

// Dense double-precision kernels and seeded Gaussian sampling.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rsbl/errors.hpp"

namespace rsbl {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-major real matrix whose entries are all finite. Immutable once built;
/// arithmetic produces new matrices.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  template <typename Derived>
  DenseMatrix(const Eigen::MatrixBase<Derived>& m) : m_(m) {  // NOLINT
    check_finite();
  }

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> values);
  static DenseMatrix from_rows(
      std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(m_.cols()); }
  bool square() const noexcept { return m_.rows() == m_.cols(); }

  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  std::span<const double> data() const noexcept {
    return {m_.data(), static_cast<std::size_t>(m_.size())};
  }
  const RowMajorMatrix& eigen() const noexcept { return m_; }

  DenseMatrix block(std::size_t row, std::size_t col, std::size_t nrows,
                    std::size_t ncols) const;
  DenseMatrix transpose() const { return DenseMatrix(m_.transpose()); }

  friend DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
  friend DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
  friend DenseMatrix operator*(double s, const DenseMatrix& a);
  friend DenseMatrix operator-(const DenseMatrix& a);

 private:
  void check_finite() const;

  RowMajorMatrix m_;
};

/// Seeded source of standard normal and uniform draws. A (seed, stream-id)
/// pair fully determines the sequence. Single owner; derive new streams by id
/// rather than sharing one across threads.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via the Marsaglia polar method.
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// 64-bit mixer used for stream-id derivation.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, RngStream& rng);

struct QrResult {
  DenseMatrix q;  // rows x cols, orthonormal columns
  DenseMatrix r;  // cols x cols, upper triangular, nonnegative diagonal
};

/// Thin QR. Throws RankDeficient if some |R_ii| < 1e-12 ||M||.
QrResult qr_factor(const DenseMatrix& m);

struct SymEigResult {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // columns are eigenvectors
};

/// Throws NotSymmetric unless ||S - S^T||_F <= 1e-12 ||S||_F.
SymEigResult sym_eig(const DenseMatrix& s);

double spectral_norm(const DenseMatrix& m);
double smallest_singular(const DenseMatrix& m);
std::vector<double> singular_values(const DenseMatrix& m);  // descending

struct SolveResult {
  DenseMatrix x;
  double cond_estimate;  // 1-norm condition estimate of M
};

/// Solves M X = B by partially pivoted LU. Throws SingularMatrix when a pivot
/// falls below 1e-14 ||M||_1.
SolveResult solve_linear(const DenseMatrix& m, const DenseMatrix& b);

DenseMatrix inverse(const DenseMatrix& m);

}  // namespace rsbl
