#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ksnet/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Keller-Segel chemotaxis on metric graphs"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out_dir;
  std::size_t levels = 4;

  auto* simulate = app.add_subcommand("simulate", "run a scenario and write snapshots.csv and diagnostics.csv");
  simulate->add_option("scenario", scenario, "scenario file")->required();
  simulate->add_option("--out", out_dir, "output directory")->required();

  auto* converge = app.add_subcommand("converge", "nested refinement study with h and tau halved per level");
  converge->add_option("scenario", scenario, "scenario file")->required();
  converge->add_option("--levels", levels, "number of refinements (>= 2)")->required();
  converge->add_option("--out", out_dir, "output directory")->required();

  auto* check = app.add_subcommand("check", "run a scenario and verify conservation and positivity");
  check->add_option("scenario", scenario, "scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ksnet::kExitError;
  }

  if (*simulate) return ksnet::cmd_simulate(scenario, out_dir, std::cout, std::cerr);
  if (*converge) return ksnet::cmd_converge(scenario, levels, out_dir, std::cout, std::cerr);
  return ksnet::cmd_check(scenario, std::cout, std::cerr);
}
