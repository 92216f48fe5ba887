// Acceptance run: one PASS/FAIL line per criterion. Tolerances and runtime
// limits are fixed here. Exit status is nonzero only with --strict.
// Usage: acceptance [--strict] [criterion ids...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rsbl/experiments.hpp"
#include "rsbl/lanczos.hpp"
#include "rsbl/matpoly.hpp"
#include "rsbl/robustness.hpp"
#include "support.hpp"

using namespace rsbl;
using testing_support::norm2;
namespace mp = rsbl::matpoly;
namespace rb = rsbl::robustness;
namespace ex = rsbl::experiments;

namespace {

struct Verdict {
  bool ok = true;
  std::ostringstream detail;
  void fail(const std::string& why) {
    if (ok) detail << "first failure: " << why << "; ";
    ok = false;
  }
};

struct Criterion {
  int id;
  const char* name;
  double max_seconds;
  std::function<void(Verdict&)> run;
};

// Reference matvec table (rows beta = 1, 0.1, 0.01, 0.001; columns b = 1, 2, 4, 8, 16, 32).
constexpr std::size_t kReferenceTable[4][6] = {{75, 86, 100, 136, 208, 352},
                                           {115, 126, 140, 176, 240, 352},
                                           {156, 166, 176, 208, 256, 384},
                                           {196, 204, 212, 240, 288, 384}};

const ex::Table1Result& table1() {
  static const ex::Table1Result result = [] {
    auto c = ex::ExperimentConfig::defaults("table1");
    ex::resolve(c);
    return ex::compute_table1(c);
  }();
  return result;
}

void criterion_table(Verdict& v) {
  const auto& t = table1();
  if (t.betas.size() != 4 || t.blocks.size() != 6 || t.cell(0, 0).matvecs.size() < 5) {
    v.fail("unexpected table layout");
    return;
  }
  std::size_t misses = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      const double med = t.cell(i, j).median;
      const double ref = static_cast<double>(kReferenceTable[i][j]);
      const double b = static_cast<double>(t.blocks[j]);
      v.detail << med << (std::abs(med - ref) <= b ? "" : "*") << (j == 5 ? (i == 3 ? "" : " | ") : " ");
      if (!(std::abs(med - ref) <= b)) ++misses;
    }
  }
  v.detail << " (* outside +-b); ";
  if (misses) v.fail(std::to_string(misses) + " cells outside +-b");
}

void criterion_overhead(Verdict& v) {
  const auto& t = table1();
  double prev = INFINITY;
  for (std::size_t i = 0; i < t.betas.size(); ++i) {
    const double o = t.overhead(i, 1);
    v.detail << "beta=" << t.betas[i] << ": " << o << "% ";
    if (!(o < prev)) v.fail("overhead not strictly decreasing at beta=" + std::to_string(t.betas[i]));
    prev = o;
  }
}

void criterion_counterexample(Verdict& v) {
  const std::vector<DenseMatrix> solvents{DenseMatrix::diagonal(std::vector<double>{1, 2}),
                                          DenseMatrix::from_rows({{2, 1}, {-1, 1}})};
  const Eigen::Vector4d x(1, -2, -1, 1);
  const double r = (mp::block_vandermonde(solvents).eigen() * x).norm();
  v.detail << "||Van x|| = " << r;
  if (!(r <= 1e-14)) v.fail("residual above 1e-14");
}

void criterion_fundamental(Verdict& v, bool identity) {
  RngStream rng(9001, identity ? 1 : 0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t b = testing_support::uniform_index(rng, 1, 3);
    const std::size_t d = testing_support::uniform_index(rng, 1, 4);
    const auto nodes = testing_support::random_nodes(b, d, 0.1, rng);
    const double cond = mp::vandermonde_condition(nodes);
    const auto chains = mp::all_chains(nodes);
    std::vector<mp::MatrixPolynomial> solved;
    for (std::size_t k = 0; k < d; ++k) solved.push_back(mp::fundamental_via_solve(nodes, k));
    const double tol = 1e-8 * cond;

    if (!identity) {
      for (std::size_t k = 0; k < d; ++k) {
        const auto expanded = mp::fundamental_polynomial(chains[k]);
        for (std::size_t j = 0; j < d; ++j) {
          const Eigen::MatrixXd target = (j == k ? 1.0 : 0.0) * Eigen::MatrixXd::Identity(b, b);
          const double e1 = norm2(mp::eval_matrix(solved[k], nodes.solvent(j)).eigen() - target);
          const double e2 = norm2(mp::eval_matrix(expanded, nodes.solvent(j)).eigen() - target);
          worst = std::max(worst, std::max(e1, e2) / cond);
          if (!(e1 <= tol && e2 <= tol)) v.fail("Kronecker property, trial " + std::to_string(trial));
        }
      }
      for (int s = 0; s < 20; ++s) {
        const double x = testing_support::sample_lambda(nodes, rng);
        for (std::size_t k = 0; k < d; ++k) {
          const Eigen::MatrixXd a = mp::eval_lambda(solved[k], x).eigen();
          const Eigen::MatrixXd c = mp::fundamental_via_chain(chains[k], x).eigen();
          const double e = norm2(c - a) / norm2(a);
          worst = std::max(worst, e / cond);
          if (!(e <= tol)) v.fail("chain vs solve, trial " + std::to_string(trial));
        }
      }
    } else {
      const auto phi = testing_support::random_poly(b, d - 1, rng);
      std::vector<Eigen::MatrixXd> at_nodes;
      for (std::size_t k = 0; k < d; ++k) at_nodes.push_back(mp::eval_matrix(phi, nodes.solvent(k)).eigen());
      for (int s = 0; s < 20; ++s) {
        const double x = testing_support::sample_lambda(nodes, rng);
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(b, b);
        for (std::size_t k = 0; k < d; ++k) sum += mp::fundamental_via_chain(chains[k], x).eigen() * at_nodes[k];
        const Eigen::MatrixXd direct = mp::eval_lambda(phi, x).eigen();
        const double e = norm2(sum - direct) / norm2(direct);
        worst = std::max(worst, e / cond);
        if (!(e <= tol)) v.fail("interpolation identity, trial " + std::to_string(trial));
      }
    }
  }
  v.detail << "200 instances, worst error/cond(Van) = " << worst << " (limit 1e-8)";
}

void criterion_bound(Verdict& v) {
  std::size_t trials = 0, holds = 0, compared = 0;
  double route = 0.0;
  for (std::size_t n : {60, 200}) {
    auto c = ex::ExperimentConfig::defaults("bound-verify");
    c.n = n;
    c.trials = 10;
    ex::resolve(c);
    for (const auto& cell : ex::compute_bound_verify(c)) {
      for (const auto& r : cell.reports) {
        ++trials;
        holds += r.bound_holds;
        if (std::isfinite(r.tan_angle_krylov) && std::isfinite(r.tan_angle_vandermonde) &&
            r.k_condition < 1e8 && r.vandermonde_condition < 1e8) {
          ++compared;
          route = std::max(route, testing_support::rel_diff(r.tan_angle_krylov, r.tan_angle_vandermonde));
        }
      }
    }
  }
  v.detail << "bound holds " << holds << "/" << trials << ", route max rel diff " << route << " over "
           << compared << " trials (limit 1e-6)";
  if (trials < 100) v.fail("fewer than 100 trials");
  if (holds != trials) v.fail("bound violated");
  if (!(route <= 1e-6)) v.fail("routes disagree");
}

void criterion_slopes(Verdict& v) {
  auto c = ex::ExperimentConfig::defaults("cluster-robustness");
  c.mode = ex::Mode::Quick;
  ex::resolve(c);
  if (c.trials != 200 || c.n != 1000 || c.bd != 60) v.fail("quick-mode preset changed");
  for (const auto& curve : ex::compute_cluster_robustness(c)) {
    const bool beta = curve.sweep == rb::Sweep::Beta;
    const double target = beta ? 0.0 : -(static_cast<double>(curve.d) - 1.0);
    const double tol = beta ? 0.15 : 0.35;
    const char* place = curve.placement == rb::Placement::Exterior ? "ext" : "int";
    v.detail << place << (beta ? " beta" : " alpha") << " d=" << curve.d << ": " << curve.fit.slope
             << (std::abs(curve.fit.slope - target) <= tol ? "" : "*") << "; ";
    if (!(std::abs(curve.fit.slope - target) <= tol)) {
      v.fail(std::string(place) + (beta ? " beta" : " alpha") + " d=" + std::to_string(curve.d));
    }
  }
}

void criterion_lemmas(Verdict& v) {
  RngStream rng(9002, 0);
  std::size_t norm_ok = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t b = testing_support::uniform_index(rng, 1, 4);
    const std::size_t deg = testing_support::uniform_index(rng, 0, 4);
    const auto p = testing_support::random_poly(b, deg, rng);
    std::vector<double> lam0(b);
    for (auto& x : lam0) x = testing_support::uniform_in(rng, -2.0, 2.0);
    std::sort(lam0.begin(), lam0.end());
    const auto omega0 = testing_support::tame_gaussian(b, rng, 1e4);
    norm_ok += mp::norm_bound_check(p, lam0, omega0).holds;
  }
  std::size_t sandwich_ok = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t b = testing_support::uniform_index(rng, 1, 4);
    sandwich_ok += rb::sandwich_d2(gaussian_matrix(b, b, rng), gaussian_matrix(b, b, rng)).holds;
  }
  const auto id = DenseMatrix::identity(3);
  const auto anchor = rb::sandwich_d2(id, -1.0 * id);
  v.detail << "norm bound " << norm_ok << "/500, sandwich " << sandwich_ok << "/1000, anchor middle "
           << anchor.middle;
  if (norm_ok != 500) v.fail("norm bound");
  if (sandwich_ok != 1000) v.fail("sandwich");
  if (!(std::abs(anchor.middle - 0.5) <= 1e-14 && anchor.holds)) v.fail("anchor");
}

void criterion_scalar(Verdict& v) {
  RngStream rng(9003, 0);
  double worst = 0.0, coef_max = 0.0;
  bool mono_exact = true;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = testing_support::uniform_index(rng, 1, 5);
    std::vector<double> xs;
    double x = testing_support::uniform_in(rng, -1.0, 0.0);
    for (std::size_t i = 0; i < d; ++i) xs.push_back(x += 0.2 + rng.uniform());
    const auto nodes = testing_support::scalar_nodes(xs, rng);
    const auto chains = mp::all_chains(nodes);
    const auto chi = mp::chi_quantities(nodes, chains, xs.front() - 0.05, xs.back() + 0.05);
    mono_exact = mono_exact && chi.mono == 1.0;
    coef_max = std::max(coef_max, chi.coef);
    for (std::size_t k = 0; k < d; ++k) {
      const auto solved = mp::fundamental_via_solve(nodes, k);
      const auto expanded = mp::fundamental_polynomial(chains[k]);
      for (int s = 0; s < 10; ++s) {
        const double t = testing_support::uniform_in(rng, xs.front() - 1.0, xs.back() + 1.0);
        const double oracle = testing_support::lagrange(xs, k, t);
        const double scale = std::max(1.0, std::abs(oracle));
        for (double got : {mp::fundamental_via_chain(chains[k], t)(0, 0), mp::eval_lambda(solved, t)(0, 0),
                           mp::eval_lambda(expanded, t)(0, 0)}) {
          worst = std::max(worst, std::abs(got - oracle) / scale);
        }
      }
    }
  }
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 2 + static_cast<std::size_t>(trial % 3);
    const auto spec = rb::conjecture_spec(trial % 2 ? rb::Placement::Interior : rb::Placement::Exterior,
                                          60 + d, 1, d, 1.0, 0.3);
    const auto r = rb::structural_bound_trial(spec, rng);
    mono_exact = mono_exact && r.chi_mono == 1.0;
    coef_max = std::max(coef_max, r.chi_coef);
  }
  v.detail << "chi_mono exactly 1: " << (mono_exact ? "yes" : "no") << ", max chi_coef " << coef_max
           << ", worst Lagrange deviation " << worst << " (limit 1e-12)";
  if (!mono_exact) v.fail("chi_mono != 1");
  if (!(coef_max <= 1.0)) v.fail("chi_coef > 1");
  if (!(worst <= 1e-12)) v.fail("Lagrange mismatch");
}

void criterion_chebyshev(Verdict& v) {
  RngStream rng(9004, 0);
  std::size_t ok = 0;
  double tightest = INFINITY;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t b = testing_support::uniform_index(rng, 1, 3);
    const std::size_t d = testing_support::uniform_index(rng, 2, 4);
    const std::size_t n = b * d + b * testing_support::uniform_index(rng, d + 5, 60);
    const double beta = testing_support::uniform_in(rng, 0.01, 0.9);
    const auto spec = rb::conjecture_spec(rb::Placement::Exterior, n, b, d, 1.0, beta);
    const auto r = rb::chebyshev_accel_check(spec, gaussian_matrix(n, b, rng), d + 5);
    ok += r.holds;
    if (r.reference > 0.0) tightest = std::min(tightest, r.reference / r.measured);
  }
  v.detail << ok << "/100 hold, smallest reference/measured " << tightest;
  if (ok != 100) v.fail("Chebyshev bound violated");
}

void criterion_multiplicity(Verdict& v) {
  RngStream rng(9005, 0);
  std::size_t ok = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t b = testing_support::uniform_index(rng, 1, 3);
    const std::size_t d = testing_support::uniform_index(rng, 2, 3);
    std::vector<std::vector<double>> blocks(d);
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t i = 0; i < b; ++i) blocks[k].push_back(testing_support::uniform_in(rng, 1.0, 2.0));
    }
    // b + 1 copies of one value: all of block 0 plus one entry of block 1.
    const double rep = testing_support::uniform_in(rng, 1.0, 2.0);
    for (auto& x : blocks[0]) x = rep;
    blocks[1][0] = rep;
    const std::size_t m = d + testing_support::uniform_index(rng, d, 20);
    std::vector<double> comp(b * (m - d));
    for (auto& x : comp) x = testing_support::uniform_in(rng, -1.0, 0.0);
    const rb::ClusterSpec spec(b, std::move(blocks), std::move(comp), true);
    const auto sweep = rb::tan_angle_krylov_sweep(spec, gaussian_matrix(spec.n(), b, rng), m);
    bool all = true;
    for (std::size_t l = d; l <= m; ++l) all = all && sweep[l - 1] == rb::kInfiniteAngle;
    ok += all;
  }
  v.detail << ok << "/50 specs give +inf for every l from d to n/b";
  if (ok != 50) v.fail("finite angle under multiplicity b+1");
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0) {
      strict = true;
    } else {
      only.push_back(std::atoi(argv[i]));
    }
  }
  const std::vector<Criterion> criteria{
      {1, "matvec table medians within +-b", 300.0, criterion_table},
      {2, "b=2 overhead strictly decreasing in beta", 300.0, criterion_overhead},
      {3, "block-Vandermonde counterexample", 1.0, criterion_counterexample},
      {4, "fundamental polynomials: chain vs solve", 30.0, [](Verdict& v) { criterion_fundamental(v, false); }},
      {5, "interpolation identity", 30.0, [](Verdict& v) { criterion_fundamental(v, true); }},
      {6, "structural bound and route equivalence", 120.0, criterion_bound},
      {7, "conjecture slopes (quick mode)", 1200.0, criterion_slopes},
      {8, "norm bound and d=2 sandwich", 30.0, criterion_lemmas},
      {9, "scalar reduction", 5.0, criterion_scalar},
      {10, "Chebyshev acceleration", 60.0, criterion_chebyshev},
      {11, "multiplicity obstruction", 10.0, criterion_multiplicity},
  };
  // Criterion 2 reads the cached table; its runtime is counted in criterion 1.
  std::size_t failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    ++ran;
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.max_seconds) v.fail("runtime limit");
    failed += !v.ok;
    std::printf("criterion %2d %s: %s [%.1fs, limit %.0fs] %s\n", c.id, v.ok ? "PASS" : "FAIL", c.name, secs,
                c.max_seconds, v.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria passed\n", ran - failed, ran);
  return strict && failed ? 1 : 0;
}
