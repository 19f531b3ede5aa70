// Command-line harness: run, validate and resume experiment suites, and
// inspect training checkpoints.

#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "cas4dl/checkpoint.hpp"
#include "cas4dl/config.hpp"
#include "cas4dl/experiment.hpp"
#include "cas4dl/results_io.hpp"

namespace {

struct Overrides {
  std::string out_dir = "results";
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> precision;
  std::optional<int> threads;

  void apply(cas4dl::ExperimentConfig& config) const {
    if (trials) config.trials = *trials;
    if (seed) config.seed = *seed;
    if (precision) config.precision = cas4dl::parse_precision(*precision);
    if (threads) config.threads = *threads;
    config.validate();
  }
};

int run_and_emit(cas4dl::ExperimentConfig config, const Overrides& overrides) {
  overrides.apply(config);
  const cas4dl::Problem problem = cas4dl::make_problem(config);
  std::cerr << "running " << config.methods.size() << " method(s) x " << config.trials
            << " trial(s) x " << config.schedule.size() << " stage(s), K=" << problem.grid.size()
            << ", d=" << problem.grid.dimension() << "\n";
  const cas4dl::SuiteResult suite = cas4dl::run_suite(config, problem);
  cas4dl::emit_results(suite, config, problem, overrides.out_dir);

  int failed = 0;
  for (const auto& t : suite.trials) {
    if (!t.failed) continue;
    ++failed;
    std::cerr << "trial " << cas4dl::to_string(t.method) << "/" << t.trial << " failed: " << t.failure
              << "\n";
  }
  for (const auto& a : suite.aggregates)
    if (a.stage == static_cast<int>(config.schedule.size()))
      std::cout << cas4dl::to_string(a.method) << " m=" << a.m << " rel_error(mean)="
                << cas4dl::format_real(a.rel_error.mean) << " n(mean)=" << a.n.mean
                << " 1/alpha(median)=" << cas4dl::format_real(a.alpha_inv.median) << "\n";
  std::cout << "results written to " << overrides.out_dir << "\n";
  return failed == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Christoffel adaptive sampling for deep learning: experiment harness"};
  app.require_subcommand(1);

  Overrides overrides;
  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--out-dir", overrides.out_dir, "Directory for result files");
    cmd->add_option("--trials", overrides.trials, "Override experiment.trials");
    cmd->add_option("--seed", overrides.seed, "Override experiment.seed");
    cmd->add_option("--precision", overrides.precision, "Network arithmetic: single or double")
        ->check(CLI::IsMember({"single", "double"}));
    cmd->add_option("--threads", overrides.threads, "Concurrent trials");
  };

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment suite from a config file");
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  add_overrides(run);

  auto* validate = app.add_subcommand("validate", "Check a config and print it with defaults filled");
  validate->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);

  std::string manifest_path;
  auto* resume = app.add_subcommand("resume", "Re-run the suite recorded in a manifest");
  resume->add_option("manifest", manifest_path, "manifest.json")->required()->check(CLI::ExistingFile);
  add_overrides(resume);

  std::string checkpoint_path;
  auto* inspect = app.add_subcommand("inspect", "Summarize a training checkpoint");
  inspect->add_option("checkpoint", checkpoint_path, "Checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_and_emit(cas4dl::parse_config(config_path), overrides);
    if (*resume) return run_and_emit(cas4dl::config_from_manifest(manifest_path), overrides);
    if (*validate) {
      std::cout << cas4dl::dump_config(cas4dl::parse_config(config_path));
      return 0;
    }
    if (*inspect) {
      const auto s = cas4dl::inspect_checkpoint(checkpoint_path);
      std::cout << "architecture: " << cas4dl::to_string(s.arch.activation) << ' ' << s.arch.depth << 'x'
                << s.arch.width << ", input " << s.arch.input_dim << ", output " << s.arch.output_dim
                << "\nprecision: " << cas4dl::to_string(s.precision)
                << "\nparameters: " << s.parameter_count
                << "\nparameter norm: " << cas4dl::format_real(s.parameter_norm)
                << "\noptimizer steps: " << s.step << "\nstage: " << s.stage
                << "\nadam: beta1=" << s.beta1 << " beta2=" << s.beta2 << " epsilon=" << s.epsilon << "\n";
      return 0;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
