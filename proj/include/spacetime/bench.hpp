#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spacetime/solver.hpp"

namespace spacetime {

enum class RunMode { solve, condition, scaling, convergence };
enum class OutputFormat { csv, json };
enum class ScalingMode { strong, weak };
/// decay:  u = exp(-d pi^2 t) prod sin(pi x_i), g = 0
/// forced: u = exp(-t) prod sin(pi x_i), g = (d pi^2 - 1) u
/// zero:   u = 0
enum class Manufactured { decay, forced, zero };

struct RunConfig {
  RunMode mode = RunMode::solve;
  int dim = 2;
  std::vector<int> time_levels{3};   // J
  std::vector<int> space_levels{5};  // K
  double alpha = 0.3;
  std::vector<double> alphas;        // condition mode: alpha sweep at the first (J, K)
  double epsilon = 1e-6;
  int vcycles = 2;
  int smooth = 3;
  std::vector<std::size_t> workers{1};
  bool exact_inverses = false;
  ScalingMode scaling = ScalingMode::strong;
  std::optional<Manufactured> problem;  // default depends on the mode
  std::uint64_t seed = 1;
  std::string output;                   // empty: stdout
  OutputFormat format = OutputFormat::csv;
  bool check = false;

  int time_level() const { return time_levels.front(); }
  int space_level() const { return space_levels.front(); }
  SystemConfig system_config(int J, int K) const;
};

std::string to_string(RunMode m);
std::string to_string(ScalingMode m);
std::string to_string(Manufactured m);

/// Sets one option from its textual form; keys are the long flag names
/// without dashes ("time-level", "exact-inverses", ...). Throws on unknown
/// keys or malformed values. Level lists accept "6", "3,5,7" and "3:8".
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
/// Flat key=value lines; '#' starts a comment.
void apply_config_file(RunConfig& config, const std::string& path);
/// Ordered key/value echo of every field.
std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& config);
void validate(const RunConfig& config);

ProblemData manufactured_problem(int dim, Manufactured kind);

struct BenchRecord {
  std::size_t P = 1;
  std::size_t N_t = 0;
  std::size_t N_x = 0;
  std::size_t N = 0;
  int iterations = 0;
  double total_seconds = 0.0;
  double seconds_per_iteration = 0.0;
  double cpu_hours = 0.0;
  std::string status = "ok";

  static BenchRecord make(std::size_t P, std::size_t N_t, std::size_t N_x, int iterations, double seconds);
};

struct ConditionCell {
  int J = 0;
  int K = 0;
  std::size_t N_t = 0;
  std::size_t N_x = 0;
  double alpha = 0.3;
  std::optional<double> kappa;  // empty: skipped
  int iterations = 0;
  double seconds = 0.0;
  std::string status = "ok";
};

struct ConvergenceRow {
  int J = 0;
  int K = 0;
  std::size_t N_t = 0;
  std::size_t N_x = 0;
  double h = 0.0;
  double error = 0.0;
  std::optional<double> rate;
  int iterations = 0;
};

struct SolveReport {
  BenchRecord record;
  double error_end = 0.0;    // L2 error at t = 1
  double error_start = 0.0;  // L2 error at t = 0
  double algebraic = 0.0;
  std::vector<double> residual_norms;
};

/// Condition number of K_X S-hat estimated from CG-Lanczos on a seeded random
/// right-hand side, iterated to a relative tolerance of 1e-15 (at most 150 steps).
struct KappaEstimate {
  double kappa = 0.0;
  int iterations = 0;
};
KappaEstimate estimate_kappa(const SpaceTimeSystem& system, std::uint64_t seed, ColumnExecutor& exec);

/// Reference kappa values with exact inner inverses and alpha = 0.3, keyed by
/// (N_t, N_x).
const std::map<std::pair<std::size_t, std::size_t>, double>& reference_condition_numbers();

/// Estimated peak memory of one solve and the memory currently available.
std::size_t estimate_solve_bytes(std::size_t n_time, std::size_t n_space);
std::size_t available_memory_bytes();

SolveReport run_solve(const RunConfig& config);
std::vector<ConditionCell> run_condition_table(const RunConfig& config);
std::vector<BenchRecord> run_scaling_bench(const RunConfig& config);
std::vector<ConvergenceRow> run_convergence(const RunConfig& config);

/// Column names of BenchRecord in CSV output.
const std::vector<std::string>& bench_headers();

void write_solve(std::ostream& os, const RunConfig& config, const SolveReport& report);
void write_condition(std::ostream& os, const RunConfig& config, const std::vector<ConditionCell>& cells);
void write_scaling(std::ostream& os, const RunConfig& config, const std::vector<BenchRecord>& records);
void write_convergence(std::ostream& os, const RunConfig& config, const std::vector<ConvergenceRow>& rows);

/// Tolerance checks used by --check; returns human-readable failures.
std::vector<std::string> check_solve(const RunConfig& config, const SolveReport& report);
std::vector<std::string> check_condition(const RunConfig& config, const std::vector<ConditionCell>& cells);
std::vector<std::string> check_scaling(const RunConfig& config, const std::vector<BenchRecord>& records);
std::vector<std::string> check_convergence(const RunConfig& config, const std::vector<ConvergenceRow>& rows);

}  // namespace spacetime
