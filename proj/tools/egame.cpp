#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "egame/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Ergodic stochastic differential games: solvers and Monte Carlo verification"};
  app.require_subcommand(1);
  egame::RunOptions options;
  std::uint64_t seed = 0;
  const std::map<std::string, std::string> help{
      {"solve-ebsde", "solve one ergodic (or discounted, with alpha) BSDE for a configured driver"},
      {"solve-game", "Picard iteration to a Markovian Nash solution; writes nash.json"},
      {"verify-nash", "Monte Carlo deviation test and path residual of <out>/nash.json"},
      {"asymmetric", "two-player game with player 2 discounted at the configured alpha"},
      {"discount-sweep", "asymmetric game over the configured decreasing alphas"},
      {"continuous-ebsde", "frozen-driver iteration for a continuous driver of linear growth"},
      {"simulate", "Euler-Maruyama sample paths and a second-moment check"},
      {"check-assumptions", "sampled checks of the model bounds and the pointwise Nash condition"}};
  for (const std::string& name : egame::commands()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", options.config_path, "experiment configuration (JSON)")->required();
    sub->add_option("--out", options.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "overrides the configured seed");
    sub->add_flag("--quiet", options.quiet, "suppress progress output");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : egame::kExitUsage;
  }
  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--seed") > 0) options.seed = seed;
  return egame::run(chosen->get_name(), options, std::cout, std::cerr);
}
