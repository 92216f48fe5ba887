#pragma once

// Row-parallel kernels behind the block Lanczos basis updates.
//
// The OpenMP versions partition rows into fixed-size chunks whose partial
// results are combined in chunk order, so the output is bitwise identical for
// any thread count. The `serial` namespace holds straightforward loop
// implementations kept as test references.

#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace rsbl::kernels {

/// Rows per reduction chunk. Part of the numerical contract: changing it
/// changes summation order.
inline constexpr Eigen::Index kChunkRows = 256;

/// Y = diag(d) X.
Eigen::MatrixXd scale_rows(std::span<const double> d, const Eigen::MatrixXd& x);

/// C = V^T W.
Eigen::MatrixXd block_dot(const Eigen::Ref<const Eigen::MatrixXd>& v,
                          const Eigen::Ref<const Eigen::MatrixXd>& w);

/// W -= V C.
void block_subtract(const Eigen::Ref<const Eigen::MatrixXd>& v,
                    const Eigen::Ref<const Eigen::MatrixXd>& c,
                    Eigen::Ref<Eigen::MatrixXd> w);

/// Two passes of classical Gram-Schmidt of W against the orthonormal columns
/// of V. Returns the accumulated coefficients V^T W_original.
Eigen::MatrixXd project_out(const Eigen::Ref<const Eigen::MatrixXd>& v,
                            Eigen::Ref<Eigen::MatrixXd> w);

int max_threads() noexcept;

namespace serial {

Eigen::MatrixXd scale_rows(std::span<const double> d, const Eigen::MatrixXd& x);
Eigen::MatrixXd block_dot(const Eigen::Ref<const Eigen::MatrixXd>& v,
                          const Eigen::Ref<const Eigen::MatrixXd>& w);
void block_subtract(const Eigen::Ref<const Eigen::MatrixXd>& v,
                    const Eigen::Ref<const Eigen::MatrixXd>& c,
                    Eigen::Ref<Eigen::MatrixXd> w);
Eigen::MatrixXd project_out(const Eigen::Ref<const Eigen::MatrixXd>& v,
                            Eigen::Ref<Eigen::MatrixXd> w);

}  // namespace serial

}  // namespace rsbl::kernels
