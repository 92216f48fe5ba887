#include "rsbl/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "rsbl/lanczos.hpp"
#include "rsbl/parallel.hpp"

namespace rsbl::robustness {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

// Largest singular value through the smaller Gram matrix.
double matrix_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  const Eigen::MatrixXd g = m.rows() >= m.cols() ? Eigen::MatrixXd(m.transpose() * m)
                                                 : Eigen::MatrixXd(m * m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

}  // namespace

// ---------------------------------------------------------------------------
// ClusterSpec

ClusterSpec::ClusterSpec(std::size_t b, std::vector<std::vector<double>> blocks,
                         std::vector<double> complement, bool allow_degenerate)
    : b_(b), blocks_(std::move(blocks)), complement_(std::move(complement)) {
  if (blocks_.empty()) throw Error(ErrorKind::InvalidArgument, "ClusterSpec needs d >= 1");
  cl_min_ = std::numeric_limits<double>::infinity();
  cl_max_ = -std::numeric_limits<double>::infinity();
  for (const auto& blk : blocks_) {
    for (double x : blk) {
      cl_min_ = std::min(cl_min_, x);
      cl_max_ = std::max(cl_max_, x);
    }
  }
  validate(allow_degenerate);
}

ClusterSpec::ClusterSpec(std::size_t b, std::vector<std::vector<double>> blocks,
                         std::vector<double> complement, double cluster_min,
                         double cluster_max, bool allow_degenerate)
    : b_(b),
      blocks_(std::move(blocks)),
      complement_(std::move(complement)),
      cl_min_(cluster_min),
      cl_max_(cluster_max) {
  if (blocks_.empty()) throw Error(ErrorKind::InvalidArgument, "ClusterSpec needs d >= 1");
  validate(allow_degenerate);
}

void ClusterSpec::validate(bool allow_degenerate) {
  if (b_ == 0) throw Error(ErrorKind::InvalidArgument, "block size must be >= 1");
  if (!(cl_min_ <= cl_max_)) throw Error(ErrorKind::InvalidArgument, "empty cluster interval");
  lo_ = cl_min_;
  hi_ = cl_max_;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].size() != b_) {
      throw Error(ErrorKind::DimensionMismatch,
                  "block " + std::to_string(i) + " has " + std::to_string(blocks_[i].size()) +
                      " eigenvalues, expected " + std::to_string(b_));
    }
    for (double x : blocks_[i]) {
      if (!std::isfinite(x)) throw Error(ErrorKind::NonFinite, "cluster eigenvalue");
      if (x < cl_min_ || x > cl_max_) {
        throw Error(ErrorKind::InvalidArgument, "cluster eigenvalue outside the cluster interval");
      }
    }
  }
  for (double x : complement_) {
    if (!std::isfinite(x)) throw Error(ErrorKind::NonFinite, "complement eigenvalue");
    if (x >= cl_min_ && x <= cl_max_) {
      throw Error(ErrorKind::InvalidArgument, "complement eigenvalue inside the cluster interval");
    }
    lo_ = std::min(lo_, x);
    hi_ = std::max(hi_, x);
  }

  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    for (std::size_t j = i + 1; j < blocks_.size(); ++j) {
      for (double x : blocks_[i]) {
        for (double y : blocks_[j]) gap = std::min(gap, std::abs(x - y));
      }
    }
  }
  const double width = hi_ - lo_;
  relgap_ = width > 0.0 ? gap / width : (gap > 0.0 ? gap : 0.0);
  if (!(relgap_ > 0.0) && !allow_degenerate) {
    throw Error(ErrorKind::InvalidArgument, "relgap must be positive");
  }
}

std::size_t ClusterSpec::m() const {
  if (n() % b_ != 0) {
    throw Error(ErrorKind::InvalidArgument,
                "n = " + std::to_string(n()) + " is not a multiple of b = " + std::to_string(b_));
  }
  return n() / b_;
}

std::vector<double> ClusterSpec::diagonal() const {
  std::vector<double> out;
  out.reserve(n());
  for (const auto& blk : blocks_) out.insert(out.end(), blk.begin(), blk.end());
  out.insert(out.end(), complement_.begin(), complement_.end());
  return out;
}

std::vector<double> ClusterSpec::diagonal_block(std::size_t j) const {
  if (j >= m()) throw Error(ErrorKind::InvalidArgument, "diagonal block index out of range");
  if (j < d()) return blocks_[j];
  const auto first = complement_.begin() + static_cast<std::ptrdiff_t>((j - d()) * b_);
  return {first, first + static_cast<std::ptrdiff_t>(b_)};
}

ClusterSpec ClusterSpec::affine(double scale, double shift) const {
  if (!(scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "affine scale must be positive");
  auto map = [&](double x) { return scale * x + shift; };
  std::vector<std::vector<double>> blocks = blocks_;
  for (auto& blk : blocks) std::transform(blk.begin(), blk.end(), blk.begin(), map);
  std::vector<double> comp = complement_;
  std::transform(comp.begin(), comp.end(), comp.begin(), map);
  return ClusterSpec(b_, std::move(blocks), std::move(comp), map(cl_min_), map(cl_max_),
                     relgap_ <= 0.0);
}

// ---------------------------------------------------------------------------
// Angles

double tan_angle_from_basis(const Eigen::Ref<const Eigen::MatrixXd>& basis,
                            std::size_t target_dim) {
  const auto t = idx(target_dim);
  if (basis.cols() < t || basis.rows() < t) return kInfiniteAngle;
  const Eigen::MatrixXd top = basis.topRows(t);
  const Eigen::MatrixXd bottom = basis.bottomRows(basis.rows() - t);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(top, Eigen::ComputeThinV);
  if (!(svd.singularValues()(t - 1) >= 1e-14)) return kInfiniteAngle;
  // Best-aligned bd-dimensional subspace of the basis.
  const Eigen::MatrixXd r = svd.matrixV().leftCols(t);
  const Eigen::MatrixXd v = top * r;
  const Eigen::MatrixXd vp = bottom * r;
  if (vp.rows() == 0) return 0.0;
  const Eigen::MatrixXd x = v.transpose().partialPivLu().solve(vp.transpose());
  return matrix_norm(x);
}

std::vector<double> tan_angle_krylov_sweep(const ClusterSpec& spec, const DenseMatrix& omega,
                                           std::size_t max_steps) {
  const std::size_t n = spec.n();
  const std::size_t b = spec.block_size();
  const std::size_t target = b * spec.d();
  if (omega.rows() != n || omega.cols() != b) {
    throw Error(ErrorKind::DimensionMismatch, "Omega must be n x b");
  }
  if (max_steps == 0 || b * max_steps > n) {
    throw Error(ErrorKind::InvalidArgument, "steps must satisfy 1 <= steps and b * steps <= n");
  }
  std::vector<double> out(max_steps, kInfiniteAngle);
  // An eigenvalue repeated more than b times in the cluster keeps V singular for
  // every step count; rounding alone would fill the missing directions in.
  std::vector<double> cluster(spec.diagonal());
  cluster.resize(target);
  std::sort(cluster.begin(), cluster.end());
  for (std::size_t i = b; i < cluster.size(); ++i) {
    if (cluster[i] == cluster[i - b]) return out;
  }
  auto op = lanczos::LinearOperator::diagonal(spec.diagonal());
  lanczos::BlockLanczos lan(op, omega);
  bool invariant = false;
  double frozen = kInfiniteAngle;
  for (std::size_t s = 1; s <= max_steps; ++s) {
    if (!invariant) {
      try {
        lan.step();
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Breakdown) throw;
        invariant = true;
        frozen = tan_angle_from_basis(lan.basis_columns(), target);
      }
    }
    if (invariant) {
      out[s - 1] = frozen;
    } else if (s >= spec.d()) {
      out[s - 1] = tan_angle_from_basis(lan.basis_columns(), target);
    }
  }
  return out;
}

double tan_angle_krylov(const ClusterSpec& spec, const DenseMatrix& omega, std::size_t steps) {
  if (steps < spec.d()) {
    throw Error(ErrorKind::InvalidArgument, "tan_angle_krylov needs steps >= d");
  }
  return tan_angle_krylov_sweep(spec, omega, steps).back();
}

std::vector<DenseMatrix> omega_blocks(const ClusterSpec& spec, const DenseMatrix& omega) {
  const std::size_t m = spec.m();
  const std::size_t b = spec.block_size();
  if (omega.rows() != spec.n() || omega.cols() != b) {
    throw Error(ErrorKind::DimensionMismatch, "Omega must be n x b");
  }
  std::vector<DenseMatrix> out;
  out.reserve(m);
  for (std::size_t j = 0; j < m; ++j) out.push_back(omega.block(j * b, 0, b, b));
  return out;
}

namespace {

void require_nonsingular(const DenseMatrix& block, std::size_t j) {
  const auto s = singular_values(block);
  if (!(s.back() > 1e-12 * s.front())) {
    throw Error(ErrorKind::SingularBlock, "Omega block " + std::to_string(j) + " is singular", j);
  }
}

DenseMatrix similarity(const DenseMatrix& omega_j, std::span<const double> lambda) {
  if (lambda.size() == 1) return DenseMatrix::diagonal(lambda);
  const DenseMatrix lo = DenseMatrix::diagonal(lambda) * omega_j;
  return solve_linear(omega_j, lo).x;
}

}  // namespace

VandermondeAngle tan_angle_vandermonde_detail(const ClusterSpec& spec, const DenseMatrix& omega) {
  const auto blocks = omega_blocks(spec, omega);
  const std::size_t m = blocks.size();
  const std::size_t b = spec.block_size();
  const std::size_t d = spec.d();
  std::vector<DenseMatrix> solvents;
  solvents.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    require_nonsingular(blocks[j], j);
    solvents.push_back(similarity(blocks[j], spec.diagonal_block(j)));
  }
  const std::span<const DenseMatrix> all(solvents);
  const Eigen::MatrixXd van = matpoly::block_vandermonde(all.first(d)).eigen();

  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(idx(b * d), idx(b * d));
  for (std::size_t i = 0; i < d; ++i) {
    k.middleRows(idx(i * b), idx(b)) = blocks[i].eigen() * van.middleRows(idx(i * b), idx(b));
  }
  const std::size_t rest = m - d;
  Eigen::MatrixXd kp(idx(rest * b), idx(b * d));
  for (std::size_t j = 0; j < rest; ++j) {
    // Block row [I, B, ..., B^{d-1}] of the complement node.
    const Eigen::MatrixXd bj = solvents[d + j].eigen();
    Eigen::MatrixXd row(idx(b), idx(b * d));
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(idx(b), idx(b));
    for (std::size_t p = 0; p < d; ++p) {
      row.middleCols(idx(p * b), idx(b)) = power;
      power = power * bj;
    }
    kp.middleRows(idx(j * b), idx(b)) = blocks[d + j].eigen() * row;
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(k);
  const double scale = k.cwiseAbs().colwise().sum().maxCoeff();
  const Eigen::VectorXd piv = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < piv.size(); ++i) {
    if (!(std::abs(piv(i)) >= 1e-14 * scale)) {
      throw Error(ErrorKind::SingularK, "K = D Van fails the 1e-14 gate");
    }
  }
  VandermondeAngle out;
  out.k_condition = 1.0 / lu.rcond();
  if (rest == 0) {
    out.tan_angle = 0.0;
    return out;
  }
  // K_perp K^{-1} = (K^{-T} K_perp^T)^T
  const Eigen::MatrixXd x = k.transpose().partialPivLu().solve(kp.transpose());
  out.tan_angle = matrix_norm(x);
  return out;
}

double tan_angle_vandermonde(const ClusterSpec& spec, const DenseMatrix& omega) {
  return tan_angle_vandermonde_detail(spec, omega).tan_angle;
}

double c_omega(const ClusterSpec& spec, const DenseMatrix& omega) {
  const auto blocks = omega_blocks(spec, omega);
  const std::size_t m = blocks.size();
  const std::size_t d = spec.d();
  const std::size_t b = spec.block_size();
  if (m <= d) throw Error(ErrorKind::InvalidArgument, "c_omega needs m > d");
  double inv_first = 0.0;
  double norm_rest = 0.0;
  double cond_rest = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto s = singular_values(blocks[j]);
    if (!(s.back() > 1e-12 * s.front())) {
      throw Error(ErrorKind::SingularBlock, "Omega block " + std::to_string(j) + " is singular", j);
    }
    if (j < d) {
      inv_first = std::max(inv_first, 1.0 / s.back());
    } else {
      norm_rest = std::max(norm_rest, s.front());
      cond_rest = std::max(cond_rest, s.front() / s.back());
    }
  }
  const double n = static_cast<double>(spec.n());
  const double factor = std::sqrt(static_cast<double>(d) * n - static_cast<double>(b * d * d));
  return factor * inv_first * norm_rest * cond_rest;
}

matpoly::NodeSet cluster_nodes(const ClusterSpec& spec, const DenseMatrix& omega) {
  const std::size_t b = spec.block_size();
  if (omega.rows() < b * spec.d() || omega.cols() != b) {
    throw Error(ErrorKind::DimensionMismatch, "Omega too small for the cluster");
  }
  std::vector<DenseMatrix> omegas;
  for (std::size_t i = 0; i < spec.d(); ++i) omegas.push_back(omega.block(i * b, 0, b, b));
  return matpoly::NodeSet(spec.blocks(), std::move(omegas));
}

std::vector<double> growth_samples(const ClusterSpec& spec, std::size_t grid_size) {
  std::vector<double> out;
  for (double x : spec.complement()) out.push_back(x);
  const double lo = spec.spectrum_min();
  const double hi = spec.spectrum_max();
  if (grid_size >= 2) {
    for (std::size_t i = 0; i < grid_size; ++i) {
      const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_size - 1);
      if (x < spec.cluster_min() || x > spec.cluster_max()) out.push_back(x);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double growth_Gd(const ClusterSpec& spec, std::span<const matpoly::SolventChain> chains,
                 std::size_t grid_size) {
  const auto samples = growth_samples(spec, grid_size);
  double g = 0.0;
  for (const auto& chain : chains) {
    for (double x : samples) {
      g = std::max(g, spectral_norm(matpoly::fundamental_via_chain(chain, x)));
    }
  }
  return g;
}

RobustnessReport structural_bound_trial(const ClusterSpec& spec, RngStream& rng,
                                        std::size_t grid_size, std::size_t max_retries) {
  for (std::size_t attempt = 0;; ++attempt) {
    const DenseMatrix omega = gaussian_matrix(spec.n(), spec.block_size(), rng);
    try {
      RobustnessReport r;
      r.seed = rng.seed();
      r.stream = rng.stream_id();
      r.retries = attempt;
      const auto nodes = cluster_nodes(spec, omega);
      const auto chains = matpoly::all_chains(nodes);
      const auto va = tan_angle_vandermonde_detail(spec, omega);
      r.tan_angle_vandermonde = va.tan_angle;
      r.k_condition = va.k_condition;
      r.tan_angle_krylov = tan_angle_krylov(spec, omega, spec.d());
      r.c_omega = c_omega(spec, omega);
      const auto chi = matpoly::chi_quantities(nodes, chains, spec.cluster_min(), spec.cluster_max());
      r.chi_mono = chi.mono;
      r.chi_coef = chi.coef;
      r.growth = growth_Gd(spec, chains, grid_size);
      r.bound = r.c_omega * r.growth;
      r.bound_holds = r.tan_angle_vandermonde <= r.bound * (1.0 + 1e-8);
      r.vandermonde_condition = matpoly::vandermonde_condition(nodes);
      r.chain_condition = 1.0;
      for (const auto& c : chains) r.chain_condition = std::max(r.chain_condition, c.max_condition());
      return r;
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::SingularBlock:
        case ErrorKind::SingularK:
        case ErrorKind::SingularMatrix:
        case ErrorKind::SingularVandermonde:
        case ErrorKind::ChainBreakdown:
        case ErrorKind::Breakdown:
          if (attempt < max_retries) continue;
          [[fallthrough]];
        default:
          throw;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Conjecture experiments

ClusterSpec conjecture_spec(Placement placement, std::size_t n, std::size_t b, std::size_t d,
                            double alpha, double beta) {
  const std::size_t bd = b * d;
  if (b == 0 || d == 0 || bd >= n) throw Error(ErrorKind::InvalidArgument, "need 1 <= bd < n");
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "alpha and beta must be positive");
  }
  const double scale = static_cast<double>(bd);
  std::vector<std::vector<double>> blocks(d);
  for (std::size_t k = 1; k <= d; ++k) {
    const double kk = static_cast<double>(k);
    const double lo = (alpha * kk + beta * (kk - 1.0)) / scale;
    const double hi = (alpha * kk + beta * (kk + 1.0)) / scale;
    auto& blk = blocks[k - 1];
    blk.resize(b);
    for (std::size_t i = 0; i < b; ++i) {
      blk[i] = b == 1 ? 0.5 * (lo + hi)
                      : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(b - 1);
    }
  }
  const std::size_t rest = n - bd;
  std::vector<double> comp;
  comp.reserve(rest);
  if (placement == Placement::Exterior) {
    for (std::size_t k = 1; k <= rest; ++k) {
      comp.push_back(-1.0 - static_cast<double>(k) / static_cast<double>(rest));
    }
  } else {
    if (rest % 2 != 0) throw Error(ErrorKind::InvalidArgument, "interior layout needs n - bd even");
    const std::size_t half = rest / 2;
    for (std::size_t k = 1; k <= half; ++k) {
      comp.push_back(-1.0 - static_cast<double>(k) / static_cast<double>(half));
    }
    for (std::size_t k = 1; k <= half; ++k) {
      comp.push_back(4.0 + static_cast<double>(k) / static_cast<double>(half));
    }
  }
  // Union of the generating intervals; equals the hull unless b == 1.
  const double cl_min = alpha / scale;
  const double cl_max = (alpha * static_cast<double>(d) + beta * static_cast<double>(d + 1)) / scale;
  return ClusterSpec(b, std::move(blocks), std::move(comp), cl_min, cl_max);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "quantile of empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorKind::InvalidArgument, "quantile level outside [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || values[lo] == values[hi]) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

QuantileSummary summarize(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  return {quantile(v, 0.5), quantile(v, 0.25), quantile(v, 0.75)};
}

std::vector<double> sweep_values(Sweep sweep) {
  std::vector<double> out;
  const int count = sweep == Sweep::Beta ? 12 : 10;
  for (int i = 1; i <= count; ++i) out.push_back(std::ldexp(1.0, -i));
  return out;
}

std::vector<std::size_t> sweep_depths(Sweep sweep) {
  if (sweep == Sweep::Beta) return {2, 3, 4, 5};
  return {2, 3, 4};
}

ConjecturePoint conjecture_point(const ConjectureConfig& config, std::uint64_t master_seed,
                                 std::span<const std::uint64_t> stream_ids) {
  if (stream_ids.empty()) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
  if (config.d == 0 || config.bd % config.d != 0) {
    throw Error(ErrorKind::InvalidArgument, "d must divide bd");
  }
  const std::size_t b = config.bd / config.d;
  ConjecturePoint pt;
  pt.sweep = config.sweep;
  pt.placement = config.placement;
  pt.d = config.d;
  pt.alpha = config.sweep == Sweep::Alpha ? config.param : config.alpha;
  pt.beta = config.sweep == Sweep::Beta ? config.param : config.beta;
  const ClusterSpec spec = conjecture_spec(config.placement, config.n, b, config.d, pt.alpha, pt.beta);
  pt.relgap = spec.relgap();
  pt.tan_angles = map_trials(stream_ids.size(), [&](std::size_t t) {
    RngStream rng(master_seed, stream_ids[t]);
    const DenseMatrix omega = gaussian_matrix(spec.n(), b, rng);
    return tan_angle_krylov(spec, omega, config.d);
  });
  pt.summary = summarize(pt.tan_angles);
  return pt;
}

SlopeFit fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::DimensionMismatch, "slope fit lengths");
  if (x.size() < 3) throw Error(ErrorKind::InvalidArgument, "slope fit needs at least 3 points");
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t r = 1; r + 1 < order.size(); ++r) {
    const std::size_t i = order[r];
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(y[i])) continue;
    lx.push_back(std::log2(x[i]));
    ly.push_back(std::log2(y[i]));
  }
  SlopeFit fit;
  fit.points = lx.size();
  if (fit.points < 2) {
    fit.slope = fit.intercept = fit.r2 = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const double np = static_cast<double>(fit.points);
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / np;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / np;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

// ---------------------------------------------------------------------------
// Sandwich, probe, applications

SandwichResult sandwich_d2(const DenseMatrix& b1, const DenseMatrix& b2) {
  if (!b1.square() || b1.rows() != b2.rows() || b1.cols() != b2.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "sandwich_d2 needs equal square blocks");
  }
  const std::size_t b = b1.rows();
  const DenseMatrix diff = b1 - b2;
  const auto s = singular_values(diff);
  if (!(s.back() > 1e-12 * s.front())) {
    throw Error(ErrorKind::SingularDifference, "B1 - B2 is singular");
  }
  const double inv_diff = 1.0 / s.back();
  Eigen::MatrixXd van(idx(2 * b), idx(2 * b));
  van.topLeftCorner(idx(b), idx(b)).setIdentity();
  van.bottomLeftCorner(idx(b), idx(b)).setIdentity();
  van.topRightCorner(idx(b), idx(b)) = b1.eigen();
  van.bottomRightCorner(idx(b), idx(b)) = b2.eigen();
  const double inv_van = 1.0 / smallest_singular(DenseMatrix(van));
  const double nb1 = spectral_norm(b1);
  const double sqrt5 = std::sqrt(5.0);

  SandwichResult r;
  r.lower = 0.5 * (3.0 - sqrt5) * inv_diff * inv_diff;
  r.middle = inv_van * inv_van;
  r.upper = 0.5 * (3.0 + sqrt5) * (1.0 + (nb1 * nb1 + 1.0) * inv_diff * inv_diff);
  r.holds = r.lower <= r.middle * (1.0 + 1e-8) && r.middle <= r.upper * (1.0 + 1e-8);
  return r;
}

DistributionSummary describe(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "describe of empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  DistributionSummary s;
  s.count = v.size();
  s.min = v.front();
  s.max = v.back();
  s.q01 = quantile(v, 0.01);
  s.q25 = quantile(v, 0.25);
  s.q50 = quantile(v, 0.5);
  s.q75 = quantile(v, 0.75);
  s.q99 = quantile(v, 0.99);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return s;
}

std::vector<double> probe_solvent_difference_samples(std::span<const double> lambda_i,
                                                     std::span<const double> lambda_j,
                                                     std::uint64_t seed,
                                                     std::span<const std::uint64_t> stream_ids) {
  if (lambda_i.size() != lambda_j.size() || lambda_i.empty()) {
    throw Error(ErrorKind::DimensionMismatch, "probe needs two spectra of equal size b >= 1");
  }
  for (double x : lambda_i) {
    for (double y : lambda_j) {
      if (x == y) throw Error(ErrorKind::InvalidArgument, "probe spectra must be disjoint");
    }
  }
  const std::size_t b = lambda_i.size();
  return map_trials(stream_ids.size(), [&](std::size_t t) {
    RngStream rng(seed, stream_ids[t]);
    for (;;) {
      const DenseMatrix oi = gaussian_matrix(b, b, rng);
      const DenseMatrix oj = gaussian_matrix(b, b, rng);
      try {
        const DenseMatrix bi = similarity(oi, lambda_i);
        const DenseMatrix bj = similarity(oj, lambda_j);
        return smallest_singular(bi - bj);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::SingularMatrix) throw;
      }
    }
  });
}

DistributionSummary probe_solvent_difference(std::span<const double> lambda_i,
                                             std::span<const double> lambda_j,
                                             std::uint64_t seed,
                                             std::span<const std::uint64_t> stream_ids) {
  const auto samples = probe_solvent_difference_samples(lambda_i, lambda_j, seed, stream_ids);
  return describe(samples);
}

double chebyshev(std::size_t degree, double x) {
  if (!(x >= 1.0)) throw Error(ErrorKind::InvalidArgument, "chebyshev argument must be >= 1");
  if (degree == 0) return 1.0;
  const double r = x + std::sqrt(x * x - 1.0);
  const double k = static_cast<double>(degree);
  return 0.5 * (std::pow(r, k) + std::pow(r, -k));
}

ChebyshevCheck chebyshev_accel_check(const ClusterSpec& spec, const DenseMatrix& omega,
                                     std::size_t steps) {
  if (steps < spec.d()) throw Error(ErrorKind::InvalidArgument, "steps must be >= d");
  if (!spec.complement().empty()) {
    const double top_rest = *std::max_element(spec.complement().begin(), spec.complement().end());
    if (top_rest > spec.cluster_min()) {
      throw Error(ErrorKind::InvalidArgument, "cluster must hold the largest b*d eigenvalues");
    }
  }
  std::vector<double> eig = spec.diagonal();
  std::sort(eig.begin(), eig.end(), std::greater<>());
  const std::size_t bd = spec.block_size() * spec.d();
  if (bd >= eig.size()) throw Error(ErrorKind::InvalidArgument, "need n > b*d");
  const double gap = eig[bd - 1] - eig[bd];
  if (!(gap > 0.0)) throw Error(ErrorKind::ZeroGap, "lambda_bd equals lambda_bd+1");

  const auto sweep = tan_angle_krylov_sweep(spec, omega, steps);
  ChebyshevCheck c;
  c.measured = sweep[steps - 1];
  c.base = sweep[spec.d() - 1];
  c.gamma = gap / (eig.front() - eig.back());
  c.chebyshev = chebyshev(steps - spec.d(), 1.0 + 2.0 * c.gamma);
  c.reference = c.base / c.chebyshev;
  c.holds = c.measured <= c.reference * (1.0 + 1e-6);
  return c;
}

DenseMatrix synthetic_matrix(std::size_t rows, std::span<const double> singular_values,
                             RngStream& rng) {
  const std::size_t n = singular_values.size();
  if (n == 0 || rows < n) throw Error(ErrorKind::InvalidArgument, "synthetic_matrix needs rows >= n >= 1");
  const auto u = qr_factor(gaussian_matrix(rows, n, rng)).q.eigen();
  const auto w = qr_factor(gaussian_matrix(n, n, rng)).q.eigen();
  Eigen::VectorXd s(idx(n));
  for (std::size_t i = 0; i < n; ++i) s(idx(i)) = singular_values[i];
  return DenseMatrix(Eigen::MatrixXd(u * s.asDiagonal() * w.transpose()));
}

LowRankReport lowrank_check(const DenseMatrix& ahat, std::size_t b, std::size_t d,
                            std::size_t steps, double epsilon, RngStream& rng) {
  const std::size_t n = ahat.cols();
  const std::size_t rank = b * d;
  if (ahat.rows() < n) throw Error(ErrorKind::InvalidArgument, "lowrank_check needs N >= n");
  if (rank == 0 || rank > n || steps < d || b * steps > n) {
    throw Error(ErrorKind::InvalidArgument, "need b*d <= b*steps <= n and steps >= d");
  }
  auto op = lanczos::LinearOperator::normal_equations(ahat);
  const DenseMatrix omega = gaussian_matrix(n, b, rng);
  const auto basis = lanczos::block_lanczos(op, omega, steps);
  const auto ritz = lanczos::rayleigh_ritz(basis, rank, lanczos::Which::Largest);

  const Eigen::MatrixXd a = ahat.eigen();
  const Eigen::MatrixXd v = ritz.vectors.eigen();
  const Eigen::MatrixXd resid = a - (a * v) * v.transpose();
  const auto sv = singular_values(ahat);

  LowRankReport r;
  r.rank = rank;
  r.epsilon = epsilon;
  r.spectral_error = resid.size() ? matrix_norm(resid) : 0.0;
  r.frobenius_error = resid.norm();
  r.spectral_best = rank < sv.size() ? sv[rank] : 0.0;
  double tail = 0.0;
  for (std::size_t i = rank; i < sv.size(); ++i) tail += sv[i] * sv[i];
  r.frobenius_best = std::sqrt(tail);
  auto ratio = [](double err, double best) {
    if (best > 0.0) return err / best;
    return err <= 1e-12 ? 1.0 : std::numeric_limits<double>::infinity();
  };
  r.spectral_ratio = ratio(r.spectral_error, r.spectral_best);
  r.frobenius_ratio = ratio(r.frobenius_error, r.frobenius_best);

  // Ritz vectors come back ascending; pair the i-th largest with lambda_i.
  const double next = rank < sv.size() ? sv[rank] * sv[rank] : 0.0;
  r.ritz_threshold = epsilon * next;
  for (std::size_t i = 0; i < rank; ++i) {
    const Eigen::VectorXd vi = v.col(idx(rank - 1 - i));
    const double energy = (a * vi).squaredNorm();
    r.max_ritz_deviation = std::max(r.max_ritz_deviation, std::abs(energy - sv[i] * sv[i]));
  }
  const double slack = 1e-12 * (sv.empty() ? 0.0 : sv.front() * sv.front());
  r.spectral_within = r.spectral_error <= (1.0 + epsilon) * r.spectral_best + 1e-12 * sv.front();
  r.frobenius_within = r.frobenius_error <= (1.0 + epsilon) * r.frobenius_best + 1e-12 * sv.front();
  r.ritz_within = r.max_ritz_deviation <= r.ritz_threshold + slack;
  return r;
}

}  // namespace rsbl::robustness
