#include <iostream>

#include <CLI11.hpp>

#include "hdist/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Distortion of inverse branches: normal forms, verification and repelling cycles"};
  app.require_subcommand(1);
  hdist::RunConfig cfg;
  double gamma = 0.0;
  double epsilon = 0.0;

  for (const char* name : {"resonance", "normalize", "theorem-a", "repelling"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("input", cfg.input, "input JSON file")->required();
    sub->add_option("--gamma", gamma, "spectral shift");
    sub->add_option("--epsilon", epsilon, "slowness margin")->check(CLI::PositiveNumber);
    sub->add_option("--window", cfg.window, "orbit window N");
    sub->add_option("--samples", cfg.samples, "sample count (0 = default)")->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--tol", cfg.tol, "residual tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--n-max", cfg.n_max, "largest period for repelling");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hdist::kExitInput;
  }
  for (CLI::App* sub : app.get_subcommands()) {
    cfg.subcommand = sub->get_name();
    if (sub->count("--gamma")) cfg.gamma = gamma;
    if (sub->count("--epsilon")) cfg.epsilon = epsilon;
  }
  return hdist::run_command(cfg, std::cout, std::cerr);
}
