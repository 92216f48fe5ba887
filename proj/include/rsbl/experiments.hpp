#pragma once

// Experiment configuration, deterministic seeding, result files, and the
// command implementations behind the `rsbl` CLI.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rsbl/robustness.hpp"

namespace rsbl::experiments {

enum class Mode { Quick, Full };

/// Flat `key = value` configuration. Lists are comma separated.
struct ExperimentConfig {
  std::string experiment = "table1";
  Mode mode = Mode::Quick;
  std::size_t n = 2000;
  std::size_t rows = 0;  // lowrank: rows of Ahat (0 means n)
  std::vector<std::size_t> b{1, 2, 4, 8, 16, 32};
  std::vector<std::size_t> d{1};
  std::vector<std::size_t> d_alpha{2, 3, 4};  // depths of the alpha sweep
  std::size_t bd = 60;
  std::vector<double> beta{1.0, 0.1, 0.01, 0.001};
  std::vector<double> alpha{1.0};
  double alpha_fixed = 1.0;  // alpha held fixed in the beta sweep
  double beta_fixed = 1e-4;  // beta held fixed in the alpha sweep
  std::size_t trials = 0;  // 0 until resolved from the mode
  std::uint64_t seed = 20240601;
  std::size_t grid = 1000;
  std::string placement = "exterior";  // exterior | interior | both
  std::string sweep = "both";          // beta | alpha | both
  std::string preset = "standard";     // standard | free
  std::size_t steps = 0;
  double epsilon = 0.1;
  double tol = 1e-10;
  std::size_t targets = 32;
  std::vector<double> singular_values;
  std::vector<double> lambda_i;
  std::vector<double> lambda_j;
  std::string out;

  /// Defaults for a command name; throws Config for unknown commands.
  static ExperimentConfig defaults(std::string_view command);
};

std::string_view to_string(Mode mode) noexcept;

/// Canonical text: every key in a fixed order, shortest round-trip numbers.
std::string serialize(const ExperimentConfig& config);

/// Overlays `text` on `base`. Unknown or duplicate keys and malformed values
/// throw Error(Config) with the line number in the message.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base);

/// Fills mode-dependent defaults (trials) and validates. Throws Config.
void resolve(ExperimentConfig& config);

/// Default trial count of a command in a mode.
std::size_t default_trials(std::string_view command, Mode mode);

/// FNV-1a of the canonical text with the `out` line removed.
std::uint64_t config_hash(const ExperimentConfig& config);

/// Stream id of one trial of one configuration cell:
/// splitmix64(fnv1a(cell) ^ splitmix64(config_hash + trial)).
std::uint64_t stream_id(std::uint64_t config_hash, std::string_view cell, std::size_t trial);
std::vector<std::uint64_t> stream_ids(std::uint64_t config_hash, std::string_view cell,
                                      std::size_t trials);

/// Shortest decimal that parses back to the same double; "inf", "-inf", "nan".
std::string format_double(double x);
double parse_double(std::string_view text);

struct ResultRow {
  std::string experiment;
  std::string config;  // cell label, e.g. "beta=0.1;b=2"
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string metric;
  double value = 0.0;
  std::string status = "ok";
  std::size_t retries = 0;
};

/// Header plus rows sorted by (config order of first appearance, trial), in
/// the order given otherwise.
void write_rows(const std::filesystem::path& path, const std::vector<ResultRow>& rows);

struct Failure {
  std::string check;
  std::string detail;
};

struct CommandOutcome {
  std::vector<std::filesystem::path> files;
  std::vector<Failure> failures;
  std::string console;

  int exit_code() const noexcept { return failures.empty() ? 0 : 1; }
};

/// JSON object {"command", "failures": [{"check", "detail"}...]}.
std::string failure_json(std::string_view command, const std::vector<Failure>& failures);

// ---------------------------------------------------------------------------
// Computations (file-free), shared by the commands and the acceptance binary

struct Table1Cell {
  double beta = 0.0;
  std::size_t b = 0;
  std::vector<std::size_t> matvecs;  // by trial; 0 marks NoConvergence
  std::vector<std::uint64_t> streams;
  double median = 0.0;
};

struct Table1Result {
  std::vector<double> betas;
  std::vector<std::size_t> blocks;
  std::vector<Table1Cell> cells;  // beta-major

  const Table1Cell& cell(std::size_t beta_index, std::size_t b_index) const;
  /// Percentage overhead of the median of b against the first block size.
  double overhead(std::size_t beta_index, std::size_t b_index) const;
};

/// The matvec experiment: n - targets complement eigenvalues uniformly on
/// [-1, 0] (endpoints included), targets uniformly on [1, 1 + beta]. Trials
/// of a block size share their Omega across beta.
Table1Result compute_table1(const ExperimentConfig& config);

struct ClusterCurve {
  robustness::Placement placement = robustness::Placement::Exterior;
  robustness::Sweep sweep = robustness::Sweep::Beta;
  std::size_t d = 0;
  std::vector<robustness::ConjecturePoint> points;
  std::vector<double> abscissa;  // beta, or relgap for the alpha sweep
  robustness::SlopeFit fit;
};

std::vector<ClusterCurve> compute_cluster_robustness(const ExperimentConfig& config);

struct BoundCell {
  robustness::Placement placement = robustness::Placement::Exterior;
  std::size_t b = 0;
  std::size_t d = 0;
  std::size_t n = 0;
  std::vector<robustness::RobustnessReport> reports;
};

std::vector<BoundCell> compute_bound_verify(const ExperimentConfig& config);

/// n used for a (b, d) cell of bound-verify: the smallest n' >= n with
/// n' > b*d and n' - b*d a multiple of b (exterior) or 2b (interior), so no
/// complement block straddles the cluster.
std::size_t bound_cell_n(std::size_t n, std::size_t b, std::size_t d,
                         robustness::Placement placement);

// ---------------------------------------------------------------------------
// Commands: write files under config.out and return the outcome

CommandOutcome cmd_table1(const ExperimentConfig& config);
CommandOutcome cmd_cluster_robustness(const ExperimentConfig& config);
CommandOutcome cmd_bound_verify(const ExperimentConfig& config);
CommandOutcome cmd_probe(const ExperimentConfig& config);
CommandOutcome cmd_sandwich(const ExperimentConfig& config);
CommandOutcome cmd_lowrank(const ExperimentConfig& config);

/// Dispatches on config.experiment.
CommandOutcome run_command(const ExperimentConfig& config);

std::vector<std::string_view> command_names();

}  // namespace rsbl::experiments
