#include "rsbl/kernels.hpp"

#include <omp.h>

#include <vector>

#include "rsbl/errors.hpp"

namespace rsbl::kernels {

namespace {

Eigen::Index chunk_count(Eigen::Index rows) {
  return (rows + kChunkRows - 1) / kChunkRows;
}

}  // namespace

int max_threads() noexcept { return omp_get_max_threads(); }

Eigen::MatrixXd scale_rows(std::span<const double> d, const Eigen::MatrixXd& x) {
  if (static_cast<Eigen::Index>(d.size()) != x.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "scale_rows");
  }
  Eigen::MatrixXd y(x.rows(), x.cols());
  const Eigen::Index rows = x.rows();
  const Eigen::Index cols = x.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) y(i, j) = d[static_cast<std::size_t>(i)] * x(i, j);
  }
  return y;
}

Eigen::MatrixXd block_dot(const Eigen::Ref<const Eigen::MatrixXd>& v,
                          const Eigen::Ref<const Eigen::MatrixXd>& w) {
  if (v.rows() != w.rows()) throw Error(ErrorKind::DimensionMismatch, "block_dot");
  const Eigen::Index chunks = chunk_count(v.rows());
  std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index r0 = c * kChunkRows;
    const Eigen::Index len = std::min(kChunkRows, v.rows() - r0);
    partial[static_cast<std::size_t>(c)].noalias() =
        v.middleRows(r0, len).transpose() * w.middleRows(r0, len);
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(v.cols(), w.cols());
  for (const auto& p : partial) out += p;
  return out;
}

void block_subtract(const Eigen::Ref<const Eigen::MatrixXd>& v,
                    const Eigen::Ref<const Eigen::MatrixXd>& c,
                    Eigen::Ref<Eigen::MatrixXd> w) {
  if (v.rows() != w.rows() || v.cols() != c.rows() || c.cols() != w.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "block_subtract");
  }
  const Eigen::Index chunks = chunk_count(v.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < chunks; ++k) {
    const Eigen::Index r0 = k * kChunkRows;
    const Eigen::Index len = std::min(kChunkRows, v.rows() - r0);
    w.middleRows(r0, len).noalias() -= v.middleRows(r0, len) * c;
  }
}

Eigen::MatrixXd project_out(const Eigen::Ref<const Eigen::MatrixXd>& v,
                            Eigen::Ref<Eigen::MatrixXd> w) {
  Eigen::MatrixXd total = block_dot(v, w);
  block_subtract(v, total, w);
  const Eigen::MatrixXd second = block_dot(v, w);
  block_subtract(v, second, w);
  total += second;
  return total;
}

namespace serial {

Eigen::MatrixXd scale_rows(std::span<const double> d, const Eigen::MatrixXd& x) {
  if (static_cast<Eigen::Index>(d.size()) != x.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "scale_rows");
  }
  Eigen::MatrixXd y(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) y(i, j) = d[static_cast<std::size_t>(i)] * x(i, j);
  return y;
}

Eigen::MatrixXd block_dot(const Eigen::Ref<const Eigen::MatrixXd>& v,
                          const Eigen::Ref<const Eigen::MatrixXd>& w) {
  if (v.rows() != w.rows()) throw Error(ErrorKind::DimensionMismatch, "block_dot");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(v.cols(), w.cols());
  for (Eigen::Index a = 0; a < v.cols(); ++a)
    for (Eigen::Index b = 0; b < w.cols(); ++b) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < v.rows(); ++i) s += v(i, a) * w(i, b);
      out(a, b) = s;
    }
  return out;
}

void block_subtract(const Eigen::Ref<const Eigen::MatrixXd>& v,
                    const Eigen::Ref<const Eigen::MatrixXd>& c,
                    Eigen::Ref<Eigen::MatrixXd> w) {
  if (v.rows() != w.rows() || v.cols() != c.rows() || c.cols() != w.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "block_subtract");
  }
  for (Eigen::Index b = 0; b < w.cols(); ++b)
    for (Eigen::Index a = 0; a < v.cols(); ++a) {
      const double coef = c(a, b);
      for (Eigen::Index i = 0; i < v.rows(); ++i) w(i, b) -= v(i, a) * coef;
    }
}

Eigen::MatrixXd project_out(const Eigen::Ref<const Eigen::MatrixXd>& v,
                            Eigen::Ref<Eigen::MatrixXd> w) {
  Eigen::MatrixXd total = serial::block_dot(v, w);
  serial::block_subtract(v, total, w);
  const Eigen::MatrixXd second = serial::block_dot(v, w);
  serial::block_subtract(v, second, w);
  total += second;
  return total;
}

}  // namespace serial

}  // namespace rsbl::kernels
