#include "lisret/errors.hpp"
#include "lisret/harness/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_common(CLI::App* cmd, lisret::harness::CommandOptions& o, std::string& config,
                std::string& out, bool with_method) {
  cmd->add_option("--config", config, "Experiment config file");
  cmd->add_option("--seed", o.seed, "Experiment seed (overrides the config)");
  cmd->add_option("--out", out, "Output directory");
  if (with_method) {
    cmd->add_option("--method", o.method, "full | lis | prired")
        ->check(CLI::IsMember({"full", "lis", "prired"}));
    cmd->add_option("--rank", o.rank, "Basis size r");
    cmd->add_option("--threshold", o.threshold, "LIS singular-value threshold tau");
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace lisret::harness;
  CLI::App app{"Likelihood-informed subspace retrieval of synthetic trace-gas profiles"};
  app.require_subcommand(1);

  CommandOptions options;
  std::string config;
  std::string out;

  auto* init = app.add_subcommand("init", "Write a config template and the bundled ensemble");
  init->add_option("--out", out, "Directory for config.json and ensemble.txt");
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic measurement");
  add_common(simulate, options, config, out, false);
  auto* retrieve = app.add_subcommand("retrieve", "Run one retrieval method");
  add_common(retrieve, options, config, out, true);
  auto* compare = app.add_subcommand("compare", "Rank sweep of LIS and prior reduction");
  add_common(compare, options, config, out, false);
  auto* report = app.add_subcommand("report", "Summarize a retrieval output directory");
  report->add_option("--out", out, "Retrieval output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }
  if (!config.empty()) options.config = config;
  if (!out.empty()) options.out = out;

  try {
    if (init->parsed()) cmd_init(options, std::cout);
    if (simulate->parsed()) cmd_simulate(options, std::cout);
    if (retrieve->parsed()) cmd_retrieve(options, std::cout);
    if (compare->parsed()) cmd_compare(options, std::cout);
    if (report->parsed()) cmd_report(options, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return ok;
}
