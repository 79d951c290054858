#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chaoslab/bounds.hpp"
#include "chaoslab/gibbs.hpp"

namespace chaoslab {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kCsvHeader =
    "theorem_id,family,E_size,V_size,t,gamma1,gamma2,k,n_disorder,engine,lhs,lhs_stderr,rhs,"
    "slack,verdict";

/// Schema or parse error in a run config, located by line and/or key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, std::size_t line, const std::string& what);
  const std::string& key() const noexcept { return key_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string key_;
  std::size_t line_;
};

/// One experiment: the cartesian product of its grids.
struct Experiment {
  std::string name;
  TheoremId theorem = TheoremId::thm2_1;
  std::vector<ModelParams> models;
  std::vector<double> t_grid{0.0};
  /// (gamma1, gamma2) pairs; single-system theorems read gamma1 only.
  std::vector<std::pair<double, double>> gammas{{1.0, 1.0}};
  std::vector<int> k_grid{1};
  WeightSpec weights;
  std::optional<double> c_k;
  double ck_grid_halfwidth = 4.0;
  EngineChoice engine;
  std::size_t n_disorder = 100;
  std::optional<std::uint64_t> seed;
  std::vector<double> lambda_n{10.0};  // diluted_tail only: Poisson means
};

struct RunConfig {
  std::uint64_t master_seed = 1;
  std::filesystem::path output_dir;
  std::vector<Experiment> experiments;
};

/// Relative graph files resolve against base_dir.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Experiment seed: explicit per-experiment seed, else splitmix of the
/// master seed and the experiment index.
std::uint64_t experiment_seed(const RunConfig& config, std::size_t index);

std::vector<BoundReport> run_experiment(const Experiment& experiment, std::uint64_t seed);

/// One CSV row in the fixed schema, no trailing newline.
std::string csv_row(const BoundReport& report);
std::string format_number(double v);

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitViolation = 2,
  kExitHypothesisFailed = 3,
  kExitInterrupted = 130,
};

/// Executes every experiment, writing results.csv, manifest.json and plot data
/// into out_dir. Returns the exit code contract (0 / 2 / 3; 1 on errors).
int run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
        std::optional<std::uint64_t> seed_override, std::ostream& log);

/// Math-stack and engine self-checks; prints a summary table. 0 iff all pass.
int selftest(std::ostream& out, std::optional<std::uint64_t> seed_override = std::nullopt);

struct ReportSummary {
  std::size_t rows = 0;
  std::size_t violations = 0;
  std::size_t hypothesis_failures = 0;
  std::string text;
};

ReportSummary summarize_results(std::istream& csv);
/// Prints the summary; nonzero (2) when any row failed, 1 on schema mismatch.
int sweep_report(const std::filesystem::path& results_csv, std::ostream& out);

/// Least-squares slope of log y against log x.
double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Cooperative interruption flag polled between result rows.
void request_interrupt() noexcept;
void clear_interrupt() noexcept;

}  // namespace chaoslab
