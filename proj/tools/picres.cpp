#include <iostream>

#include "CLI11.hpp"
#include "picres/commands.hpp"
#include "picres/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bayesian paid-incurred-claims reserving"};
  app.require_subcommand(1);
  picres::CliOverrides o;
  std::uint64_t seed = 0;
  int chains = 0, sweeps = 0;
  std::string out;
  auto add_flags = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--chains", chains, "number of chains");
    sub->add_option("--sweeps", sweeps, "sweeps per chain");
    sub->add_option("--out", out, "output directory");
  };
  std::string config, dir;
  auto* run = app.add_subcommand("run", "fit a model and write traces, diagnostics and reserves");
  run->add_option("config", config, "config file")->required();
  add_flags(run);
  auto* sim = app.add_subcommand("simulate", "draw a synthetic triangle from a model");
  sim->add_option("config", config, "config file")->required();
  add_flags(sim);
  auto* diag = app.add_subcommand("diagnose", "recompute diagnostics from stored traces");
  diag->add_option("dir", dir, "run output directory")->required();
  add_flags(diag);
  CLI11_PARSE(app, argc, argv);

  for (auto* sub : {run, sim, diag}) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed")) o.seed = seed;
    if (sub->count("--chains")) o.chains = chains;
    if (sub->count("--sweeps")) o.sweeps = sweeps;
    if (sub->count("--out")) o.out = out;
  }
  try {
    if (run->parsed()) return picres::cmd_run(config, o);
    if (sim->parsed()) return picres::cmd_simulate(config, o);
    return picres::cmd_diagnose(dir, o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
