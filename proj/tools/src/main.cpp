#include <CLI11.hpp>
#include <iostream>

#include "wiener_cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace wiener::cli;
  CLI::App app{"Wiener chaos propagator solver for linear stochastic evolution equations"};
  app.require_subcommand(1);

  CommandOptions options;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", options.config, "Scenario JSON file")->required();
    sub->add_option("--out", options.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", options.seed, "Seed override");
    sub->add_option("--order", options.order, "Chaos order N override");
    sub->add_option("--modes", options.modes, "Number of noise modes K override");
    sub->add_option("--workers", options.workers, "Worker threads inside a level")->capture_default_str();
  };
  auto* solve = app.add_subcommand("solve", "Solve the propagator system and write coefficients and statistics");
  auto* verify = app.add_subcommand("verify", "Compare the chaos solution with independent oracles");
  auto* kv = app.add_subcommand("kv", "Check the level-by-level recursion for weighted coefficients");
  auto* norms = app.add_subcommand("norms", "Weighted-norm sweep over the exponent r and the chaos order");
  for (auto* sub : {solve, verify, kv, norms}) add_common(sub);
  kv->add_option("--nmax", options.nmax, "Highest level of the recursion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  if (solve->parsed()) return run_solve(options, std::cout, std::cerr);
  if (verify->parsed()) return run_verify(options, std::cout, std::cerr);
  if (kv->parsed()) return run_kv(options, std::cout, std::cerr);
  return run_norms(options, std::cout, std::cerr);
}
