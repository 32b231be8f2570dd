#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.h"

int main(int argc, char** argv) {
  using outsync::SynthesisMode;
  namespace cli = outsync::cli;

  CLI::App app{"Distributed output synchronization: design and simulation"};
  app.require_subcommand(1);

  cli::RunConfig cfg;
  std::string scenario;
  std::string data;
  std::string controllers;
  std::string trajectory;
  std::string out;

  auto add_tolerances = [&](CLI::App* sub) {
    sub->add_option("--tol-rank", cfg.tolerances.rank_rel,
                    "relative singular value cutoff for ranks");
    sub->add_option("--tol-schur", cfg.tolerances.schur_margin,
                    "required margin below 1 for spectral radii");
    sub->add_option("--tol-residual", cfg.tolerances.residual_abs,
                    "absolute residual bound for linear equations");
  };
  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out,-o", out, "output file (default: stdout)");
  };

  auto* validate = app.add_subcommand("validate", "check scenario assumptions");
  validate->add_option("scenario", scenario, "scenario JSON")->required();
  add_tolerances(validate);

  auto* collect = app.add_subcommand("collect", "record excitation data");
  collect->add_option("scenario", scenario, "scenario JSON")->required();
  collect->add_option("--seed", cfg.seed, "random seed");
  collect->add_option("--horizon,-T", cfg.horizon,
                      "samples per agent (default: max(n+m+p)+2)")
      ->check(CLI::PositiveNumber);
  collect->add_option("--input-scale", cfg.input_scale, "input standard deviation")
      ->check(CLI::NonNegativeNumber);
  collect->add_option("--state-scale", cfg.state_scale,
                      "initial state standard deviation")
      ->check(CLI::NonNegativeNumber);
  add_tolerances(collect);
  add_out(collect);

  auto* check = app.add_subcommand("check", "data informativity conditions");
  check->add_option("scenario", scenario, "scenario JSON")->required();
  check->add_option("data", data, "data JSON")->required();
  add_tolerances(check);

  const std::map<std::string, SynthesisMode> modes{{"data", SynthesisMode::kData},
                                                   {"model", SynthesisMode::kModel}};
  auto* synthesize = app.add_subcommand("synthesize", "design controllers");
  synthesize->add_option("scenario", scenario, "scenario JSON")->required();
  synthesize->add_option("data", data, "data JSON (data mode)");
  synthesize->add_option("--mode", cfg.mode, "data or model")
      ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));
  add_tolerances(synthesize);
  add_out(synthesize);

  auto* simulate = app.add_subcommand("simulate", "run the closed loop");
  simulate->add_option("scenario", scenario, "scenario JSON")->required();
  simulate->add_option("controllers", controllers, "controllers JSON")->required();
  simulate->add_option("--seed", cfg.seed, "seed for the initial state");
  simulate->add_option("--steps", cfg.steps, "number of recorded steps")
      ->check(CLI::PositiveNumber);
  simulate->add_flag("--zero-init", cfg.zero_init, "start from the zero state");
  add_tolerances(simulate);
  add_out(simulate);

  auto* report = app.add_subcommand("report", "summarize a trajectory");
  report->add_option("trajectory", trajectory, "trajectory CSV")->required();
  report->add_option("--tail-window", cfg.tail_window, "steps in the tail")
      ->check(CLI::PositiveNumber);
  report->add_option("--threshold", cfg.threshold, "bound on the tail of |e|")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitInput;
  }
  if (!out.empty()) cfg.out = out;

  cli::Streams io{std::cout, std::cerr};
  if (validate->parsed()) return cli::CmdValidate(scenario, cfg, io);
  if (collect->parsed()) return cli::CmdCollect(scenario, cfg, io);
  if (check->parsed()) return cli::CmdCheck(scenario, data, cfg, io);
  if (synthesize->parsed()) return cli::CmdSynthesize(scenario, data, cfg, io);
  if (simulate->parsed()) return cli::CmdSimulate(scenario, controllers, cfg, io);
  return cli::CmdReport(trajectory, cfg, io);
}
