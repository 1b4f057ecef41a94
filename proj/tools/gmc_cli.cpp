// Command line runner for the bandit and gridworld sweeps.
//
//   gmc run --config exp.ini [--seeds 0..4] [--out DIR] [--method gmc] [--condition noise]
//   gmc validate --config exp.ini
//   gmc summarize --out DIR [--condition noise]
//
// Exit codes: 0 ok, 2 usage or config error, 3 data format error, 4 numerical abort.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gmc/config.hpp"
#include "gmc/errors.hpp"
#include "gmc/experiment.hpp"

namespace {

constexpr int kUsageError = 2;
constexpr int kDataError = 3;
constexpr int kNumericalError = 4;

struct Overrides {
  std::string config_path;
  std::string seeds;
  std::string out;
  std::string method;
  std::string condition;
};

gmc::ExperimentConfig resolve(const Overrides& o) {
  gmc::ExperimentConfig c = o.config_path.empty() ? gmc::ExperimentConfig{} : gmc::load_config(o.config_path);
  if (!o.seeds.empty()) c.seeds = gmc::parse_seeds(o.seeds);
  if (!o.out.empty()) c.output_dir = o.out;
  if (!o.method.empty()) c.methods = {o.method};
  if (!o.condition.empty()) {
    c.condition = gmc::parse_condition(o.condition);
    if (c.condition == gmc::Condition::kNoNoise || c.condition == gmc::Condition::kDoorNoise) {
      c.track = gmc::Track::kGridworld;
    }
  }
  return c;
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "INI experiment file (defaults apply when omitted)");
  cmd->add_option("--seeds", o.seeds, "seed range A..B, or a comma list");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--method", o.method, "run a single method");
  cmd->add_option("--condition", o.condition, "curriculum, noise, nonoise or doornoise");
}

// Condition recorded by a previous run, if any.
std::optional<std::string> recorded_condition(const std::filesystem::path& dir) {
  try {
    return std::string(gmc::to_string(gmc::load_config(dir / "config.ini").condition));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-momentum coupling experiments"};
  app.require_subcommand(1);
  Overrides run_opts;
  Overrides validate_opts;
  std::string summarize_dir;
  std::string summarize_condition;

  CLI::App* run = app.add_subcommand("run", "run a seed sweep and write CSVs");
  add_common(run, run_opts);
  CLI::App* validate = app.add_subcommand("validate", "check a config and print the resolved settings");
  add_common(validate, validate_opts);
  CLI::App* summarize = app.add_subcommand("summarize", "recompute summaries from DIR/metrics.csv");
  summarize->add_option("--out", summarize_dir, "directory holding metrics.csv")->required();
  summarize->add_option("--condition", summarize_condition, "condition label for the summary rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  std::filesystem::path diag_dir = ".";
  try {
    if (*validate) {
      const gmc::ExperimentConfig c = resolve(validate_opts);
      c.validate();
      std::cout << gmc::dump_config(c);
      std::cerr << "config ok\n";
      return 0;
    }
    if (*run) {
      const gmc::ExperimentConfig c = resolve(run_opts);
      diag_dir = c.output_dir;
      gmc::run_experiment(c, &std::cerr);
      return 0;
    }
    diag_dir = summarize_dir;
    std::string condition = summarize_condition;
    if (condition.empty()) condition = recorded_condition(summarize_dir).value_or("unknown");
    gmc::summarize_directory(summarize_dir, condition);
    return 0;
  } catch (const gmc::NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    std::error_code ec;
    std::filesystem::create_directories(diag_dir, ec);
    std::ofstream(diag_dir / "diagnostic.txt") << "numerical abort\n" << e.what() << '\n';
    return kNumericalError;
  } catch (const gmc::FormatError& e) {
    std::cerr << "data format error: " << e.what() << '\n';
    return kDataError;
  } catch (const gmc::ConsistencyError& e) {
    std::cerr << "data format error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
