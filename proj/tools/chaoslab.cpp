// Command-line front end: run / selftest / report.
#include <csignal>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "chaoslab/hermite.hpp"
#include "chaoslab/runner.hpp"

namespace {

extern "C" void on_sigint(int) { chaoslab::request_interrupt(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disorder-chaos bound checker: exact and Monte Carlo Gibbs averages"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(chaoslab::kToolVersion));

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "execute the experiments of a config file");
  run->add_option("--config", config_path, "JSON run config")->required();
  run->add_option("--out", out_dir, "output directory (default: output_dir in the config)");
  run->add_option("--seed", seed, "override the config master seed");

  std::optional<std::uint64_t> selftest_seed;
  std::string fault;
  auto* selftest = app.add_subcommand("selftest", "math-stack and engine self-checks");
  selftest->add_option("--seed", selftest_seed, "seed for the randomized checks");
  selftest->add_option("--inject-fault", fault, "deliberately corrupt a component")
      ->check(CLI::IsMember({"hermite"}));

  std::string csv_path;
  auto* report = app.add_subcommand("report", "summarize a results.csv");
  report->add_option("results", csv_path, "results.csv written by run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      std::signal(SIGINT, on_sigint);
      return chaoslab::run(config_path, out_dir, seed, std::cerr);
    }
    if (*selftest) {
      if (fault == "hermite") chaoslab::testing::set_hermite_fault(true);
      return chaoslab::selftest(std::cout, selftest_seed);
    }
    if (*report) return chaoslab::sweep_report(csv_path, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return chaoslab::kExitError;
  }
  return chaoslab::kExitError;
}
