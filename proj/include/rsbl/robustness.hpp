#pragma once

// Cluster-robustness quantities for block Krylov subspaces of diagonal test
// matrices: tangents of the largest principal angle by two routes, the
// structural bound c_Omega * G_d, Monte Carlo experiment drivers, and the
// application checks (Chebyshev acceleration, low-rank approximation).

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "rsbl/linalg.hpp"
#include "rsbl/matpoly.hpp"

namespace rsbl::robustness {

/// A = diag(Lambda_1, ..., Lambda_d, Lambda_perp) with the wanted eigenvectors
/// being the leading b*d canonical coordinates.
class ClusterSpec {
 public:
  /// Cluster interval defaults to the hull of the block spectra. Rejects
  /// relgap <= 0 unless `allow_degenerate` is set (negative tests only).
  ClusterSpec(std::size_t b, std::vector<std::vector<double>> blocks,
              std::vector<double> complement, bool allow_degenerate = false);
  ClusterSpec(std::size_t b, std::vector<std::vector<double>> blocks,
              std::vector<double> complement, double cluster_min, double cluster_max,
              bool allow_degenerate = false);

  std::size_t n() const noexcept { return b_ * blocks_.size() + complement_.size(); }
  std::size_t block_size() const noexcept { return b_; }
  std::size_t d() const noexcept { return blocks_.size(); }
  /// n / b; throws InvalidArgument when b does not divide n.
  std::size_t m() const;

  std::span<const double> block(std::size_t i) const { return blocks_.at(i); }
  const std::vector<std::vector<double>>& blocks() const noexcept { return blocks_; }
  const std::vector<double>& complement() const noexcept { return complement_; }
  /// Spectrum of the j-th b x b block of the full diagonal (j < m).
  std::vector<double> diagonal_block(std::size_t j) const;

  double cluster_min() const noexcept { return cl_min_; }
  double cluster_max() const noexcept { return cl_max_; }
  double spectrum_min() const noexcept { return lo_; }
  double spectrum_max() const noexcept { return hi_; }
  double relgap() const noexcept { return relgap_; }

  /// Full diagonal: blocks in order, then the complement.
  std::vector<double> diagonal() const;

  /// Same spectrum mapped through x -> scale * x + shift (scale > 0).
  ClusterSpec affine(double scale, double shift) const;

 private:
  void validate(bool allow_degenerate);

  std::size_t b_;
  std::vector<std::vector<double>> blocks_;
  std::vector<double> complement_;
  double cl_min_ = 0.0;
  double cl_max_ = 0.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double relgap_ = 0.0;
};

inline constexpr double kInfiniteAngle = std::numeric_limits<double>::infinity();

/// tan of the largest principal angle between the leading b*d coordinates and
/// an n x k orthonormal basis (k >= b*d). +inf when the leading rows are rank
/// deficient at the 1e-14 gate.
double tan_angle_from_basis(const Eigen::Ref<const Eigen::MatrixXd>& basis,
                            std::size_t target_dim);

/// Builds K_steps(A, Omega) by block Lanczos and returns ||V_perp V^{-1}||.
/// If the Krylov space becomes invariant early, the angle of the invariant
/// space is returned.
double tan_angle_krylov(const ClusterSpec& spec, const DenseMatrix& omega,
                        std::size_t steps);

/// tan of the largest angle per step count for steps = 1..max_steps (entry
/// s-1), all from one Lanczos run. Entries with s < d are +inf.
std::vector<double> tan_angle_krylov_sweep(const ClusterSpec& spec,
                                           const DenseMatrix& omega,
                                           std::size_t max_steps);

struct VandermondeAngle {
  double tan_angle = 0.0;
  double k_condition = 1.0;  // 1-norm condition estimate of K
};

/// ||K_perp K^{-1}|| with K = D Van and K_perp = D_perp Van_perp. Requires b | n.
/// Throws SingularK or SingularBlock.
VandermondeAngle tan_angle_vandermonde_detail(const ClusterSpec& spec,
                                              const DenseMatrix& omega);
double tan_angle_vandermonde(const ClusterSpec& spec, const DenseMatrix& omega);

/// b x b row blocks Omega_1..Omega_m of Omega.
std::vector<DenseMatrix> omega_blocks(const ClusterSpec& spec, const DenseMatrix& omega);

/// sqrt(dn - bd^2) max_i ||Omega_i^{-1}|| max_j ||Omega_j|| max_j ||Omega_j|| ||Omega_j^{-1}||,
/// i over the first d blocks, j over the rest. Requires m > d.
double c_omega(const ClusterSpec& spec, const DenseMatrix& omega);

/// Node set (Lambda_i, Omega_i), i < d.
matpoly::NodeSet cluster_nodes(const ClusterSpec& spec, const DenseMatrix& omega);

/// Points at which the sup over [lambda_min, lambda_max] \ cluster is sampled:
/// every complement eigenvalue plus a uniform grid of `grid_size` points,
/// keeping only those outside the closed cluster interval. Sorted, unique.
std::vector<double> growth_samples(const ClusterSpec& spec, std::size_t grid_size);

/// max over chains and growth_samples of ||F_k(lambda)||.
double growth_Gd(const ClusterSpec& spec, std::span<const matpoly::SolventChain> chains,
                 std::size_t grid_size = 1000);

struct RobustnessReport {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double tan_angle_krylov = 0.0;
  double tan_angle_vandermonde = 0.0;
  double c_omega = 0.0;
  double chi_mono = 1.0;
  double chi_coef = 0.0;
  double growth = 0.0;
  double bound = 0.0;
  bool bound_holds = false;
  double vandermonde_condition = 1.0;
  double chain_condition = 1.0;
  double k_condition = 1.0;
  std::size_t retries = 0;
};

/// One draw of Omega, every quantity of the structural bound, and the check
/// tan <= c_Omega G_d. Measure-zero degeneracies are resampled from the same
/// stream (at most `max_retries` times).
RobustnessReport structural_bound_trial(const ClusterSpec& spec, RngStream& rng,
                                        std::size_t grid_size = 1000,
                                        std::size_t max_retries = 16);

// ---------------------------------------------------------------------------
// Conjecture experiments

enum class Sweep { Beta, Alpha };
enum class Placement { Exterior, Interior };

/// n = 1000 style test matrix: Lambda_k eigenvalues uniformly spaced in
/// [alpha k + beta (k-1), alpha k + beta (k+1)] / (b d), k = 1..d, and the
/// complement either below the cluster (exterior) or split around it
/// (interior).
ClusterSpec conjecture_spec(Placement placement, std::size_t n, std::size_t b,
                            std::size_t d, double alpha, double beta);

struct QuantileSummary {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

/// Linear-interpolation quantile (numpy default). Infinite entries sort last.
double quantile(std::vector<double> values, double q);
QuantileSummary summarize(std::span<const double> values);

struct ConjecturePoint {
  Sweep sweep = Sweep::Beta;
  Placement placement = Placement::Exterior;
  std::size_t d = 2;
  double alpha = 1.0;
  double beta = 0.5;
  double relgap = 0.0;
  std::vector<double> tan_angles;  // by trial index
  QuantileSummary summary;
};

/// The two designs: beta = 2^-i (i=1..12), alpha = 1, d in {2,3,4,5}; or
/// alpha = 2^-i (i=1..10), beta = 1e-4, d in {2,3,4}.
std::vector<double> sweep_values(Sweep sweep);
std::vector<std::size_t> sweep_depths(Sweep sweep);

struct ConjectureConfig {
  Sweep sweep = Sweep::Beta;
  Placement placement = Placement::Exterior;
  std::size_t d = 2;
  std::size_t n = 1000;
  std::size_t bd = 60;
  double param = 0.5;  // beta for Sweep::Beta, alpha for Sweep::Alpha
  double alpha = 1.0;  // used by Sweep::Beta
  double beta = 1e-4;  // used by Sweep::Alpha
};

/// tan angle over `trials` draws; trial t uses stream stream_ids[t].
ConjecturePoint conjecture_point(const ConjectureConfig& config, std::uint64_t master_seed,
                                 std::span<const std::uint64_t> stream_ids);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Least squares of log2(y) on log2(x), dropping the smallest and largest
/// abscissae and any non-finite or non-positive y.
SlopeFit fit_loglog_slope(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// d = 2 sandwich, solvent-difference probe, applications

struct SandwichResult {
  double lower = 0.0;
  double middle = 0.0;
  double upper = 0.0;
  bool holds = false;
};

/// ((3-sqrt5)/2)||(B1-B2)^{-1}||^2 <= ||[[I,B1],[I,B2]]^{-1}||^2
///   <= ((3+sqrt5)/2)(1 + (||B1||^2 + 1)||(B1-B2)^{-1}||^2).
/// Throws SingularDifference if B1 - B2 fails the 1e-12 gate.
SandwichResult sandwich_d2(const DenseMatrix& b1, const DenseMatrix& b2);

struct DistributionSummary {
  std::size_t count = 0;
  double min = 0.0;
  double q01 = 0.0;
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
  double q99 = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
};

DistributionSummary describe(std::span<const double> values);

/// Smallest singular value of B_i - B_j for independent Gaussian Omega_i,
/// Omega_j, one sample per trial; sample t uses RngStream(seed, stream_ids[t]).
std::vector<double> probe_solvent_difference_samples(
    std::span<const double> lambda_i, std::span<const double> lambda_j,
    std::uint64_t seed, std::span<const std::uint64_t> stream_ids);
DistributionSummary probe_solvent_difference(std::span<const double> lambda_i,
                                             std::span<const double> lambda_j,
                                             std::uint64_t seed,
                                             std::span<const std::uint64_t> stream_ids);

/// 0.5 ((x + sqrt(x^2-1))^k + (x + sqrt(x^2-1))^-k) for x >= 1.
double chebyshev(std::size_t degree, double x);

struct ChebyshevCheck {
  double measured = 0.0;   // tan angle at `steps`
  double base = 0.0;       // tan angle at d steps
  double gamma = 0.0;
  double chebyshev = 1.0;  // Cheb_{steps-d}(1 + 2 gamma)
  double reference = 0.0;  // base / chebyshev
  bool holds = false;
};

/// Requires the cluster to be the top b*d eigenvalues. Throws ZeroGap when
/// lambda_{bd} = lambda_{bd+1}.
ChebyshevCheck chebyshev_accel_check(const ClusterSpec& spec, const DenseMatrix& omega,
                                     std::size_t steps);

struct LowRankReport {
  std::size_t rank = 0;
  double epsilon = 0.0;
  double spectral_error = 0.0;
  double spectral_best = 0.0;
  double spectral_ratio = 1.0;
  double frobenius_error = 0.0;
  double frobenius_best = 0.0;
  double frobenius_ratio = 1.0;
  double max_ritz_deviation = 0.0;  // max_i | ||Ahat v_i||^2 - lambda_i |
  double ritz_threshold = 0.0;      // epsilon lambda_{bd+1}
  bool spectral_within = false;
  bool frobenius_within = false;
  bool ritz_within = false;
};

/// Block Lanczos on Ahat^T Ahat, top b*d Ritz vectors, errors against the best
/// rank-bd approximation from a dense SVD. Observational only.
LowRankReport lowrank_check(const DenseMatrix& ahat, std::size_t b, std::size_t d,
                            std::size_t steps, double epsilon, RngStream& rng);

/// U diag(s) W^T with Haar-like orthogonal factors from QR of Gaussians.
DenseMatrix synthetic_matrix(std::size_t rows, std::span<const double> singular_values,
                             RngStream& rng);

}  // namespace rsbl::robustness
