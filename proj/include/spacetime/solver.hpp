#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "spacetime/linalg.hpp"
#include "spacetime/system.hpp"

namespace spacetime {

/// Persistent worker threads running fork-join column phases. Worker 0 is the
/// calling thread. Every phase ends at a barrier; the first exception thrown
/// by any worker is rethrown to the caller after the barrier.
class ThreadPoolExecutor final : public ColumnExecutor {
 public:
  explicit ThreadPoolExecutor(std::size_t n_workers);
  ~ThreadPoolExecutor() override;
  ThreadPoolExecutor(const ThreadPoolExecutor&) = delete;
  ThreadPoolExecutor& operator=(const ThreadPoolExecutor&) = delete;

  std::size_t n_workers() const override { return n_workers_; }
  void for_each_range(std::size_t n_columns, const RangeTask& task) override;
  /// One phase with explicit ranges, ranges[w] going to worker w.
  void run_ranges(const std::vector<ColumnRange>& ranges, const RangeTask& task);

 private:
  void worker_loop(std::size_t w);

  std::size_t n_workers_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable start_;
  std::condition_variable done_;
  std::size_t generation_ = 0;
  std::size_t pending_ = 0;
  bool stop_ = false;
  const RangeTask* task_ = nullptr;
  const std::vector<ColumnRange>* ranges_ = nullptr;
  std::exception_ptr error_;
};

std::unique_ptr<ColumnExecutor> make_executor(std::size_t n_workers);

/// Distribution of the temporal columns over workers.
struct ParallelPlan {
  std::size_t n_workers = 1;
  std::vector<ColumnRange> column_ranges;
  std::size_t halo_width = 0;

  /// Contiguous balanced ranges; halo width from the temporal matrices.
  static ParallelPlan make(std::size_t n_time, std::size_t n_workers, const TemporalMatrices& temporal);
  /// Throws unless the ranges are contiguous, disjoint and cover [0, n_time).
  void validate(std::size_t n_time) const;
};

/// Fixed-order pairwise sum: the split point of [b, e) is always b + (e - b) / 2.
double tree_sum(std::span<const double> values);
/// Per-column partial dot products, reduced by tree_sum. The value depends
/// only on the data, never on the executor.
double dot(const SpaceTimeVector& a, const SpaceTimeVector& b, ColumnExecutor& exec);
double dot(const SpaceTimeVector& a, const SpaceTimeVector& b);

struct PCGOptions {
  double epsilon = 1e-6;
  int max_iterations = 200;
  int recompute_interval = 50;
  /// Stop on r^T K r <= eps^2 * r_0^T K r_0 instead of r^T K r <= eps^2.
  bool relative = false;
  bool throw_on_cap = true;
};

struct PhaseTimes {
  double schur = 0.0;
  double preconditioner = 0.0;
  double vector_ops = 0.0;
  double total = 0.0;
};

struct PCGResult {
  SpaceTimeVector w;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_norms;  // (r_k^T K_X r_k)^{1/2}, k = 0..iterations
  std::vector<double> alphas;
  std::vector<double> betas;
  double kappa_estimate = 1.0;
  PhaseTimes wall_times;
};

class IterationCapExceeded : public std::runtime_error {
 public:
  IterationCapExceeded(int cap, std::vector<double> history);
  const std::vector<double>& residual_history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// Preconditioned CG on S-hat w = f-hat with preconditioner K_X, from w_0 = 0.
PCGResult pcg(const SchurOperator& s, const PreconditionerKX& k, const SpaceTimeVector& f_hat,
              const PCGOptions& options, ColumnExecutor& exec);
PCGResult pcg(const SchurOperator& s, const PreconditionerKX& k, const SpaceTimeVector& f_hat,
              const PCGOptions& options = {});

/// Extreme Ritz values of the Lanczos tridiagonal built from CG coefficients.
struct RitzBounds {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};
RitzBounds lanczos_bounds(std::span<const double> alphas, std::span<const double> betas);

/// lambda_max / lambda_min of the Lanczos tridiagonal. Needs >= 5 iterations.
double estimate_condition(const PCGResult& result);

struct SolveOptions {
  PCGOptions pcg{};
  std::size_t n_workers = 1;
};

struct HeatSolution {
  std::shared_ptr<const SpaceTimeSystem> system;
  PCGResult result;
  SpaceTimeVector u;  // single-scale coefficients, u = W w
};

HeatSolution solve_heat(const ProblemData& problem, const SystemConfig& config, const SolveOptions& options = {});

struct ErrorReport {
  double l2 = 0.0;         // ||u(t) - exact(t)||_{L2(Omega)}
  double algebraic = 0.0;  // final (r^T K_X r)^{1/2}
};

/// Spatial coefficients of the discrete solution at time t (linear in time).
std::vector<double> trace_at(const HeatSolution& solution, double t);
ErrorReport measure_error(const HeatSolution& solution, const SpaceTimeFunction& exact, double t);

/// Runs `task` once per planned range on its own worker and returns the
/// assembled N_x x N_t result.
using ColumnTask = std::function<void(ColumnRange range, SpaceTimeVector& out)>;
SpaceTimeVector parallel_execute(const ParallelPlan& plan, std::size_t n_space, std::size_t n_time,
                                 const ColumnTask& task);

}  // namespace spacetime
