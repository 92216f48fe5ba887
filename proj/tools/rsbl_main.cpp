// rsbl <command> [--config PATH] [--seed U64] [--trials N] [--out DIR] [--quick|--full]

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rsbl/experiments.hpp"

namespace ex = rsbl::experiments;

int main(int argc, char** argv) {
  CLI::App app{"Randomized small-block Lanczos experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string out;
  bool quick = false;
  bool full = false;
  bool print_config = false;

  for (auto name : ex::command_names()) {
    auto* sub = app.add_subcommand(std::string(name));
    sub->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--trials", trials, "trial count")->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "output directory (default: $RSBL_OUT, then .)");
    auto* q = sub->add_flag("--quick", quick, "quick mode (default)");
    auto* f = sub->add_flag("--full", full, "full mode");
    q->excludes(f);
    sub->add_flag("--print-config", print_config, "print the resolved config and exit");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    auto config = ex::ExperimentConfig::defaults(command);
    if (!config_path.empty()) {
      config = ex::load_config(config_path, config);
      if (config.experiment != command) {
        throw rsbl::Error(rsbl::ErrorKind::Config, "config is for '" + config.experiment +
                                                       "' but the command is '" + command + "'");
      }
    }
    if (seed) config.seed = *seed;
    if (trials) config.trials = *trials;
    if (quick) config.mode = ex::Mode::Quick;
    if (full) config.mode = ex::Mode::Full;
    if (!out.empty()) {
      config.out = out;
    } else if (config.out.empty()) {
      if (const char* env = std::getenv("RSBL_OUT"); env && *env) config.out = env;
    }
    ex::resolve(config);
    if (print_config) {
      std::cout << ex::serialize(config);
      return 0;
    }

    const auto outcome = ex::run_command(config);
    std::cout << outcome.console;
    for (const auto& file : outcome.files) std::cout << "wrote " << file.string() << '\n';
    if (outcome.exit_code() != 0) std::cerr << ex::failure_json(command, outcome.failures) << '\n';
    return outcome.exit_code();
  } catch (const rsbl::Error& e) {
    std::cerr << ex::failure_json(command, {{std::string(rsbl::to_string(e.kind())), e.what()}}) << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << ex::failure_json(command, {{"exception", e.what()}}) << '\n';
    return 2;
  }
}
