#include <CLI/CLI.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "lorentzfk/harness/run.hpp"

int main(int argc, char** argv) {
  using namespace lfk::harness;
  CLI::App app{"lorentzfk: CDLT geometry, Feynman-Kac sampling and Mermin-Wagner diagnostics"};
  app.require_subcommand(1);

  struct Args {
    std::string config;
    std::string output_dir = "lorentzfk-out";
    std::optional<std::uint64_t> seed;
  };
  Args args;
  const char* names[] = {"sample-cdlt", "geometry-stats", "mc-run", "oracle-check", "mw-verify"};
  const char* blurbs[] = {"sample trees and their triangulations", "layer growth and coupling constants",
                          "Monte Carlo reduced density kernel", "exact versus Monte Carlo comparisons",
                          "Mermin-Wagner schedule diagnostics"};
  for (std::size_t i = 0; i < 5; ++i) {
    auto* sub = app.add_subcommand(names[i], blurbs[i]);
    sub->add_option("--config", args.config, "JSON config file")->required();
    sub->add_option("--output-dir", args.output_dir, "output directory");
    sub->add_option("--seed", args.seed, "override the config seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitStatus::ConfigInvalid);
  }

  const std::string name = app.get_subcommands().front()->get_name();
  std::ifstream in(args.config, std::ios::binary);
  if (!in) {
    std::cerr << "lorentzfk: cannot read config " << args.config << '\n';
    return static_cast<int>(ExitStatus::IoFailure);
  }
  std::ostringstream text;
  text << in.rdbuf();

  RunOptions options;
  options.output_dir = args.output_dir;
  options.seed = args.seed;
  options.workers = workers_from_env();
  options.config_hash = content_hash(text.str());
  const RunResult result = run(parse_subcommand(name), text.str(), options);
  if (result.status != ExitStatus::Ok) std::cerr << "lorentzfk " << name << ": " << result.message << '\n';
  return static_cast<int>(result.status);
}
