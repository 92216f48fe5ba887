#include "rsbl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "rsbl/lanczos.hpp"
#include "rsbl/parallel.hpp"

namespace rsbl::experiments {

namespace fs = std::filesystem;
using robustness::Placement;
using robustness::Sweep;

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = count == 1 ? lo
                        : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return robustness::quantile(std::move(v), 0.5);
}

std::vector<Placement> placements(const ExperimentConfig& c) {
  if (c.placement == "exterior") return {Placement::Exterior};
  if (c.placement == "interior") return {Placement::Interior};
  return {Placement::Exterior, Placement::Interior};
}

std::string_view name(Placement p) { return p == Placement::Exterior ? "exterior" : "interior"; }
std::string_view name(Sweep s) { return s == Sweep::Beta ? "beta" : "alpha"; }

fs::path out_dir(const ExperimentConfig& c) { return c.out.empty() ? fs::path(".") : fs::path(c.out); }

std::ofstream open_file(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Config, "cannot write " + path.string());
  return out;
}

std::string join(const std::vector<double>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += format_double(v[i]);
  }
  return s;
}

}  // namespace

std::string failure_json(std::string_view command, const std::vector<Failure>& failures) {
  nlohmann::json j;
  j["command"] = std::string(command);
  j["failures"] = nlohmann::json::array();
  for (const auto& f : failures) j["failures"].push_back({{"check", f.check}, {"detail", f.detail}});
  return j.dump();
}

// ---------------------------------------------------------------------------
// table1

const Table1Cell& Table1Result::cell(std::size_t beta_index, std::size_t b_index) const {
  return cells.at(beta_index * blocks.size() + b_index);
}

double Table1Result::overhead(std::size_t beta_index, std::size_t b_index) const {
  const double base = cell(beta_index, 0).median;
  return 100.0 * (cell(beta_index, b_index).median - base) / base;
}

Table1Result compute_table1(const ExperimentConfig& c) {
  Table1Result res;
  res.betas = c.beta;
  res.blocks = c.b;
  const std::uint64_t hash = config_hash(c);
  const std::size_t nb = c.b.size();
  const std::size_t jobs = c.beta.size() * nb * c.trials;

  const auto counts = map_trials(jobs, [&](std::size_t job) -> std::size_t {
    const std::size_t trial = job % c.trials;
    const std::size_t bi = (job / c.trials) % nb;
    const std::size_t ei = job / (c.trials * nb);
    const double beta = c.beta[ei];
    const std::size_t b = c.b[bi];
    auto targets = linspace(1.0, 1.0 + beta, c.targets);
    auto diag = targets;
    const auto rest = linspace(-1.0, 0.0, c.n - c.targets);
    diag.insert(diag.end(), rest.begin(), rest.end());
    auto op = lanczos::LinearOperator::diagonal(std::move(diag));
    RngStream rng(c.seed, stream_id(hash, "b=" + std::to_string(b), trial));
    const DenseMatrix omega = gaussian_matrix(c.n, b, rng);
    try {
      return lanczos::run_until_converged(op, omega, targets, c.tol, c.n).matvecs;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NoConvergence) return 0;
      throw;
    }
  });

  for (std::size_t ei = 0; ei < c.beta.size(); ++ei) {
    for (std::size_t bi = 0; bi < nb; ++bi) {
      Table1Cell cell;
      cell.beta = c.beta[ei];
      cell.b = c.b[bi];
      std::vector<double> ok;
      for (std::size_t t = 0; t < c.trials; ++t) {
        const std::size_t mv = counts[(ei * nb + bi) * c.trials + t];
        cell.matvecs.push_back(mv);
        cell.streams.push_back(stream_id(hash, "b=" + std::to_string(cell.b), t));
        if (mv > 0) ok.push_back(static_cast<double>(mv));
      }
      cell.median = ok.size() == c.trials ? median_of(ok) : std::numeric_limits<double>::quiet_NaN();
      res.cells.push_back(std::move(cell));
    }
  }
  return res;
}

CommandOutcome cmd_table1(const ExperimentConfig& c) {
  const auto res = compute_table1(c);
  CommandOutcome out;
  const fs::path dir = out_dir(c);

  std::vector<ResultRow> rows;
  for (const auto& cell : res.cells) {
    const std::string label = "beta=" + format_double(cell.beta) + ";b=" + std::to_string(cell.b);
    for (std::size_t t = 0; t < cell.matvecs.size(); ++t) {
      ResultRow r;
      r.experiment = "table1";
      r.config = label;
      r.trial = t;
      r.seed = c.seed;
      r.stream = cell.streams[t];
      r.metric = "matvecs";
      r.value = static_cast<double>(cell.matvecs[t]);
      if (cell.matvecs[t] == 0) {
        r.status = "NoConvergence";
        r.value = -1.0;
      }
      rows.push_back(std::move(r));
    }
  }
  write_rows(dir / "table1.csv", rows);
  out.files.push_back(dir / "table1.csv");

  {
    auto f = open_file(dir / "table1_summary.csv");
    f << "beta,b,median,min,max,overhead_pct\n";
    for (std::size_t ei = 0; ei < res.betas.size(); ++ei) {
      for (std::size_t bi = 0; bi < res.blocks.size(); ++bi) {
        const auto& cell = res.cell(ei, bi);
        const auto [mn, mx] = std::minmax_element(cell.matvecs.begin(), cell.matvecs.end());
        f << format_double(cell.beta) << ',' << cell.b << ',' << format_double(cell.median) << ','
          << *mn << ',' << *mx << ',' << format_double(res.overhead(ei, bi)) << '\n';
      }
    }
    out.files.push_back(dir / "table1_summary.csv");
  }

  std::ostringstream con;
  con << std::setw(8) << "beta";
  for (auto b : res.blocks) con << std::setw(14) << ("b=" + std::to_string(b));
  con << '\n';
  for (std::size_t ei = 0; ei < res.betas.size(); ++ei) {
    con << std::setw(8) << format_double(res.betas[ei]);
    for (std::size_t bi = 0; bi < res.blocks.size(); ++bi) {
      const double m = res.cell(ei, bi).median;
      std::ostringstream cellstr;
      if (std::isnan(m)) {
        cellstr << "n/c";
      } else {
        cellstr << format_double(m);
        if (bi > 0) cellstr << " (" << std::lround(res.overhead(ei, bi)) << "%)";
      }
      con << std::setw(14) << cellstr.str();
    }
    con << '\n';
  }
  out.console = con.str();
  return out;
}

// ---------------------------------------------------------------------------
// cluster-robustness

std::vector<ClusterCurve> compute_cluster_robustness(const ExperimentConfig& c) {
  const std::uint64_t hash = config_hash(c);
  std::vector<Sweep> sweeps;
  if (c.sweep != "alpha") sweeps.push_back(Sweep::Beta);
  if (c.sweep != "beta") sweeps.push_back(Sweep::Alpha);

  std::vector<ClusterCurve> curves;
  for (auto placement : placements(c)) {
    for (auto sweep : sweeps) {
      const auto& depths = sweep == Sweep::Beta ? c.d : c.d_alpha;
      const auto& params = sweep == Sweep::Beta ? c.beta : c.alpha;
      for (auto d : depths) {
        ClusterCurve curve;
        curve.placement = placement;
        curve.sweep = sweep;
        curve.d = d;
        // Trials share Omega along the swept parameter.
        const std::string cell = "placement=" + std::string(name(placement)) +
                                 ";sweep=" + std::string(name(sweep)) + ";d=" + std::to_string(d);
        const auto ids = stream_ids(hash, cell, c.trials);
        std::vector<double> medians;
        for (double p : params) {
          robustness::ConjectureConfig cc;
          cc.sweep = sweep;
          cc.placement = placement;
          cc.d = d;
          cc.n = c.n;
          cc.bd = c.bd;
          cc.param = p;
          cc.alpha = c.alpha_fixed;
          cc.beta = c.beta_fixed;
          auto pt = robustness::conjecture_point(cc, c.seed, ids);
          curve.abscissa.push_back(sweep == Sweep::Beta ? p : pt.relgap);
          medians.push_back(pt.summary.median);
          curve.points.push_back(std::move(pt));
        }
        curve.fit = params.size() >= 3 ? robustness::fit_loglog_slope(curve.abscissa, medians)
                                       : robustness::SlopeFit{std::numeric_limits<double>::quiet_NaN(),
                                                              std::numeric_limits<double>::quiet_NaN(),
                                                              std::numeric_limits<double>::quiet_NaN(), 0};
        curves.push_back(std::move(curve));
      }
    }
  }
  return curves;
}

namespace {

std::string plot_script() {
  return R"(#!/usr/bin/env python3
# Plots the cluster-robustness data files in this directory.
import csv
import glob
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "cluster_*_*.csv"))):
    base = os.path.basename(path)[:-4]
    if base == "cluster_robustness":
        continue
    _, placement, sweep = base.split("_")
    curves = {}
    with open(path) as f:
        for row in csv.DictReader(f):
            curves.setdefault(int(row["d"]), []).append(row)
    fig, ax = plt.subplots(figsize=(5, 4))
    for d, rows in sorted(curves.items()):
        x = [float(r["abscissa"]) for r in rows]
        med = [float(r["median"]) for r in rows]
        lo = [float(r["q25"]) for r in rows]
        hi = [float(r["q75"]) for r in rows]
        ax.loglog(x, med, marker="o", label=f"d={d}")
        ax.fill_between(x, lo, hi, alpha=0.25)
    ax.set_xlabel("beta" if sweep == "beta" else "relgap")
    ax.set_ylabel("tan angle")
    ax.set_title(f"{placement}, {sweep} sweep")
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(here, base + ".png"), dpi=150)
    plt.close(fig)
)";
}

}  // namespace

CommandOutcome cmd_cluster_robustness(const ExperimentConfig& c) {
  const auto curves = compute_cluster_robustness(c);
  CommandOutcome out;
  const fs::path dir = out_dir(c);

  std::vector<ResultRow> rows;
  for (const auto& curve : curves) {
    for (const auto& pt : curve.points) {
      const double param = curve.sweep == Sweep::Beta ? pt.beta : pt.alpha;
      const std::string label = "placement=" + std::string(name(curve.placement)) +
                                ";sweep=" + std::string(name(curve.sweep)) +
                                ";d=" + std::to_string(curve.d) + ";param=" + format_double(param);
      const std::string cell = "placement=" + std::string(name(curve.placement)) +
                               ";sweep=" + std::string(name(curve.sweep)) +
                               ";d=" + std::to_string(curve.d);
      for (std::size_t t = 0; t < pt.tan_angles.size(); ++t) {
        ResultRow r;
        r.experiment = "cluster-robustness";
        r.config = label;
        r.trial = t;
        r.seed = c.seed;
        r.stream = stream_id(config_hash(c), cell, t);
        r.metric = "tan_angle";
        r.value = pt.tan_angles[t];
        if (std::isinf(r.value)) r.status = "singular";
        rows.push_back(std::move(r));
      }
    }
  }
  write_rows(dir / "cluster_robustness.csv", rows);
  out.files.push_back(dir / "cluster_robustness.csv");

  for (auto placement : placements(c)) {
    for (auto sweep : {Sweep::Beta, Sweep::Alpha}) {
      bool any = false;
      for (const auto& cv : curves) any |= cv.placement == placement && cv.sweep == sweep;
      if (!any) continue;
      const fs::path path =
          dir / ("cluster_" + std::string(name(placement)) + "_" + std::string(name(sweep)) + ".csv");
      auto f = open_file(path);
      f << "d,param,abscissa,median,q25,q75\n";
      for (const auto& cv : curves) {
        if (cv.placement != placement || cv.sweep != sweep) continue;
        for (std::size_t i = 0; i < cv.points.size(); ++i) {
          const auto& pt = cv.points[i];
          f << cv.d << ',' << format_double(sweep == Sweep::Beta ? pt.beta : pt.alpha) << ','
            << format_double(cv.abscissa[i]) << ',' << format_double(pt.summary.median) << ','
            << format_double(pt.summary.q25) << ',' << format_double(pt.summary.q75) << '\n';
        }
      }
      out.files.push_back(path);
    }
  }

  {
    auto f = open_file(dir / "slopes.csv");
    f << "variant,sweep,d,slope,intercept,r2,points\n";
    for (const auto& cv : curves) {
      f << name(cv.placement) << ',' << name(cv.sweep) << ',' << cv.d << ','
        << format_double(cv.fit.slope) << ',' << format_double(cv.fit.intercept) << ','
        << format_double(cv.fit.r2) << ',' << cv.fit.points << '\n';
    }
    out.files.push_back(dir / "slopes.csv");
  }
  {
    auto f = open_file(dir / "plot_cluster_robustness.py");
    f << plot_script();
    out.files.push_back(dir / "plot_cluster_robustness.py");
  }

  std::ostringstream con;
  con << "variant   sweep  d  slope     r2\n";
  for (const auto& cv : curves) {
    con << std::left << std::setw(10) << name(cv.placement) << std::setw(7) << name(cv.sweep)
        << std::setw(3) << cv.d << std::setw(10) << format_double(std::round(cv.fit.slope * 1e4) / 1e4)
        << format_double(std::round(cv.fit.r2 * 1e4) / 1e4) << '\n';
  }
  out.console = con.str();
  return out;
}

// ---------------------------------------------------------------------------
// bound-verify

std::size_t bound_cell_n(std::size_t n, std::size_t b, std::size_t d, Placement placement) {
  const std::size_t bd = b * d;
  const std::size_t step = placement == Placement::Interior ? 2 * b : b;
  if (n <= bd) return bd + step;
  const std::size_t extra = n - bd;
  return bd + (extra + step - 1) / step * step;
}

std::vector<BoundCell> compute_bound_verify(const ExperimentConfig& c) {
  const std::uint64_t hash = config_hash(c);
  std::vector<BoundCell> cells;
  for (auto placement : placements(c)) {
    for (auto b : c.b) {
      for (auto d : c.d) {
        for (double alpha : c.alpha) {
          for (double beta : c.beta) {
            BoundCell cell;
            cell.placement = placement;
            cell.b = b;
            cell.d = d;
            cell.n = bound_cell_n(c.n, b, d, placement);
            const auto spec = robustness::conjecture_spec(placement, cell.n, b, d, alpha, beta);
            const std::string label = "placement=" + std::string(name(placement)) +
                                      ";b=" + std::to_string(b) + ";d=" + std::to_string(d) +
                                      ";alpha=" + format_double(alpha) +
                                      ";beta=" + format_double(beta);
            const auto ids = stream_ids(hash, label, c.trials);
            cell.reports = map_trials(c.trials, [&](std::size_t t) {
              RngStream rng(c.seed, ids[t]);
              return robustness::structural_bound_trial(spec, rng, c.grid);
            });
            cells.push_back(std::move(cell));
          }
        }
      }
    }
  }
  return cells;
}

CommandOutcome cmd_bound_verify(const ExperimentConfig& c) {
  const auto cells = compute_bound_verify(c);
  CommandOutcome out;
  const fs::path dir = out_dir(c);
  std::vector<ResultRow> rows;
  auto f = open_file(dir / "bound_verify_summary.csv");
  f << "placement,b,d,n,trials,holds_rate,median_slack,chi_mono_max,chi_coef_median,"
       "c_omega_q25,c_omega_median,c_omega_q75,route_max_rel_diff\n";
  std::ostringstream con;
  std::size_t cell_index = 0;
  for (const auto& cell : cells) {
    const std::string label = "placement=" + std::string(name(cell.placement)) +
                              ";b=" + std::to_string(cell.b) + ";d=" + std::to_string(cell.d) +
                              ";cell=" + std::to_string(cell_index++);
    std::size_t holds = 0;
    std::vector<double> slack, chi_coef, comega;
    double chi_mono_max = 0.0;
    double route = 0.0;
    for (std::size_t t = 0; t < cell.reports.size(); ++t) {
      const auto& r = cell.reports[t];
      holds += r.bound_holds ? 1 : 0;
      if (r.tan_angle_vandermonde > 0.0) slack.push_back(r.bound / r.tan_angle_vandermonde);
      chi_coef.push_back(r.chi_coef);
      comega.push_back(r.c_omega);
      chi_mono_max = std::max(chi_mono_max, r.chi_mono);
      const double rel = std::abs(r.tan_angle_krylov - r.tan_angle_vandermonde) /
                         std::max(r.tan_angle_vandermonde, std::numeric_limits<double>::min());
      if (std::isfinite(r.tan_angle_krylov) && r.k_condition < 1e8) route = std::max(route, rel);
      const std::pair<const char*, double> metrics[] = {
          {"tan_angle_krylov", r.tan_angle_krylov}, {"tan_angle_vandermonde", r.tan_angle_vandermonde},
          {"c_omega", r.c_omega}, {"chi_mono", r.chi_mono}, {"chi_coef", r.chi_coef},
          {"G_d", r.growth}, {"bound", r.bound}, {"bound_holds", r.bound_holds ? 1.0 : 0.0},
          {"vandermonde_condition", r.vandermonde_condition},
          {"chain_condition", r.chain_condition}, {"k_condition", r.k_condition}};
      for (const auto& [metric, value] : metrics) {
        ResultRow row;
        row.experiment = "bound-verify";
        row.config = label;
        row.trial = t;
        row.seed = r.seed;
        row.stream = r.stream;
        row.metric = metric;
        row.value = value;
        row.retries = r.retries;
        if (!r.bound_holds) row.status = "violation";
        rows.push_back(std::move(row));
      }
    }
    const double rate = static_cast<double>(holds) / static_cast<double>(cell.reports.size());
    f << name(cell.placement) << ',' << cell.b << ',' << cell.d << ',' << cell.n << ','
      << cell.reports.size() << ',' << format_double(rate) << ',' << format_double(median_of(slack))
      << ',' << format_double(chi_mono_max) << ',' << format_double(median_of(chi_coef)) << ','
      << format_double(robustness::quantile(comega, 0.25)) << ','
      << format_double(robustness::quantile(comega, 0.5)) << ','
      << format_double(robustness::quantile(comega, 0.75)) << ',' << format_double(route) << '\n';
    con << name(cell.placement) << " b=" << cell.b << " d=" << cell.d << " n=" << cell.n
        << ": holds " << holds << "/" << cell.reports.size() << '\n';
    if (holds != cell.reports.size()) {
      out.failures.push_back({"bound_holds", label + " holds rate " + format_double(rate)});
    }
  }
  write_rows(dir / "bound_verify.csv", rows);
  out.files.push_back(dir / "bound_verify.csv");
  out.files.push_back(dir / "bound_verify_summary.csv");
  out.console = con.str();
  return out;
}

// ---------------------------------------------------------------------------
// probe

CommandOutcome cmd_probe(const ExperimentConfig& c) {
  CommandOutcome out;
  const fs::path dir = out_dir(c);
  const std::string label = "lambda_i=" + join(c.lambda_i, ';') + ";lambda_j=" + join(c.lambda_j, ';');
  const auto ids = stream_ids(config_hash(c), label, c.trials);
  const auto samples = robustness::probe_solvent_difference_samples(c.lambda_i, c.lambda_j, c.seed, ids);
  std::vector<ResultRow> rows;
  for (std::size_t t = 0; t < samples.size(); ++t) {
    rows.push_back({"probe", label, t, c.seed, ids[t], "smallest_singular", samples[t], "ok", 0});
  }
  write_rows(dir / "probe.csv", rows);
  const auto s = robustness::describe(samples);
  auto f = open_file(dir / "probe_summary.csv");
  f << "config,count,min,q01,q25,q50,q75,q99,max,mean,stddev\n";
  f << label << ',' << s.count << ',' << format_double(s.min) << ',' << format_double(s.q01) << ','
    << format_double(s.q25) << ',' << format_double(s.q50) << ',' << format_double(s.q75) << ','
    << format_double(s.q99) << ',' << format_double(s.max) << ',' << format_double(s.mean) << ','
    << format_double(s.stddev) << '\n';
  out.files = {dir / "probe.csv", dir / "probe_summary.csv"};
  std::ostringstream con;
  con << "smallest singular value of B_i - B_j over " << s.count << " draws: q01 "
      << format_double(s.q01) << ", median " << format_double(s.q50) << ", q99 "
      << format_double(s.q99) << '\n';
  out.console = con.str();
  return out;
}

// ---------------------------------------------------------------------------
// sandwich

CommandOutcome cmd_sandwich(const ExperimentConfig& c) {
  CommandOutcome out;
  const fs::path dir = out_dir(c);
  const std::uint64_t hash = config_hash(c);
  std::vector<ResultRow> rows;
  auto f = open_file(dir / "sandwich_summary.csv");
  f << "b,trials,holds_rate,min_lower_gap,min_upper_gap\n";
  std::ostringstream con;
  for (auto b : c.b) {
    const std::string label = "b=" + std::to_string(b);
    const auto ids = stream_ids(hash, label, c.trials);
    struct Draw {
      robustness::SandwichResult r;
      std::size_t retries = 0;
    };
    const auto draws = map_trials(c.trials, [&](std::size_t t) {
      RngStream rng(c.seed, ids[t]);
      for (std::size_t attempt = 0;; ++attempt) {
        const DenseMatrix b1 = gaussian_matrix(b, b, rng);
        const DenseMatrix b2 = gaussian_matrix(b, b, rng);
        try {
          return Draw{robustness::sandwich_d2(b1, b2), attempt};
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::SingularDifference || attempt >= 16) throw;
        }
      }
    });
    std::size_t holds = 0;
    double lower_gap = std::numeric_limits<double>::infinity();
    double upper_gap = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < draws.size(); ++t) {
      const auto& d = draws[t];
      holds += d.r.holds ? 1 : 0;
      lower_gap = std::min(lower_gap, d.r.middle / d.r.lower);
      upper_gap = std::min(upper_gap, d.r.upper / d.r.middle);
      const std::string status = d.r.holds ? "ok" : "violation";
      rows.push_back({"sandwich", label, t, c.seed, ids[t], "lower", d.r.lower, status, d.retries});
      rows.push_back({"sandwich", label, t, c.seed, ids[t], "middle", d.r.middle, status, d.retries});
      rows.push_back({"sandwich", label, t, c.seed, ids[t], "upper", d.r.upper, status, d.retries});
      rows.push_back({"sandwich", label, t, c.seed, ids[t], "holds", d.r.holds ? 1.0 : 0.0, status,
                      d.retries});
    }
    const double rate = static_cast<double>(holds) / static_cast<double>(c.trials);
    f << b << ',' << c.trials << ',' << format_double(rate) << ',' << format_double(lower_gap) << ','
      << format_double(upper_gap) << '\n';
    con << "b=" << b << ": holds " << holds << "/" << c.trials << '\n';
    if (holds != c.trials) out.failures.push_back({"sandwich_holds", label + " holds rate " + format_double(rate)});
  }
  write_rows(dir / "sandwich.csv", rows);
  out.files = {dir / "sandwich.csv", dir / "sandwich_summary.csv"};
  out.console = con.str();
  return out;
}

// ---------------------------------------------------------------------------
// lowrank

CommandOutcome cmd_lowrank(const ExperimentConfig& c) {
  CommandOutcome out;
  const fs::path dir = out_dir(c);
  const std::uint64_t hash = config_hash(c);
  const std::size_t rows_n = c.rows == 0 ? c.n : c.rows;
  std::vector<double> sv = c.singular_values;
  sv.resize(c.n, 0.0);
  std::vector<ResultRow> rows;
  std::ostringstream con;
  for (auto b : c.b) {
    for (auto d : c.d) {
      const std::string label = "b=" + std::to_string(b) + ";d=" + std::to_string(d) +
                                ";steps=" + std::to_string(c.steps);
      const auto ids = stream_ids(hash, label, c.trials);
      const auto reports = map_trials(c.trials, [&](std::size_t t) {
        RngStream rng(c.seed, ids[t]);
        const DenseMatrix ahat = robustness::synthetic_matrix(rows_n, sv, rng);
        return robustness::lowrank_check(ahat, b, d, c.steps, c.epsilon, rng);
      });
      std::size_t spectral = 0;
      std::size_t frob = 0;
      std::size_t ritz = 0;
      for (std::size_t t = 0; t < reports.size(); ++t) {
        const auto& r = reports[t];
        spectral += r.spectral_within;
        frob += r.frobenius_within;
        ritz += r.ritz_within;
        const std::pair<const char*, double> metrics[] = {
            {"epsilon", r.epsilon}, {"spectral_error", r.spectral_error},
            {"spectral_best", r.spectral_best}, {"spectral_ratio", r.spectral_ratio},
            {"frobenius_error", r.frobenius_error}, {"frobenius_best", r.frobenius_best},
            {"frobenius_ratio", r.frobenius_ratio}, {"max_ritz_deviation", r.max_ritz_deviation},
            {"ritz_threshold", r.ritz_threshold}, {"spectral_within", r.spectral_within ? 1.0 : 0.0},
            {"frobenius_within", r.frobenius_within ? 1.0 : 0.0},
            {"ritz_within", r.ritz_within ? 1.0 : 0.0}};
        for (const auto& [metric, value] : metrics) {
          rows.push_back({"lowrank", label, t, c.seed, ids[t], metric, value, "ok", 0});
        }
      }
      con << label << ": spectral within (1+eps) " << spectral << "/" << reports.size()
          << ", frobenius " << frob << "/" << reports.size() << ", ritz " << ritz << "/"
          << reports.size() << '\n';
    }
  }
  write_rows(dir / "lowrank.csv", rows);
  out.files = {dir / "lowrank.csv"};
  out.console = con.str();
  return out;
}

CommandOutcome run_command(const ExperimentConfig& c) {
  const std::string& e = c.experiment;
  if (e == "table1") return cmd_table1(c);
  if (e == "cluster-robustness") return cmd_cluster_robustness(c);
  if (e == "bound-verify") return cmd_bound_verify(c);
  if (e == "probe") return cmd_probe(c);
  if (e == "sandwich") return cmd_sandwich(c);
  if (e == "lowrank") return cmd_lowrank(c);
  throw Error(ErrorKind::Config, "unknown experiment '" + e + "'");
}

}  // namespace rsbl::experiments
