#include "spacetime/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

namespace spacetime {

ThreadPoolExecutor::ThreadPoolExecutor(std::size_t n_workers) : n_workers_(n_workers) {
  if (n_workers == 0) throw std::invalid_argument("ThreadPoolExecutor: need at least one worker");
  for (std::size_t w = 1; w < n_workers_; ++w) threads_.emplace_back([this, w] { worker_loop(w); });
}

ThreadPoolExecutor::~ThreadPoolExecutor() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  start_.notify_all();
  for (auto& t : threads_) t.join();
}

void ThreadPoolExecutor::worker_loop(std::size_t w) {
  std::size_t seen = 0;
  for (;;) {
    const RangeTask* task = nullptr;
    ColumnRange range;
    {
      std::unique_lock lock(mutex_);
      start_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      task = task_;
      range = (*ranges_)[w];
    }
    try {
      if (range.size() > 0) (*task)(w, range);
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
    std::lock_guard lock(mutex_);
    if (--pending_ == 0) done_.notify_one();
  }
}

void ThreadPoolExecutor::run_ranges(const std::vector<ColumnRange>& ranges, const RangeTask& task) {
  if (ranges.size() != n_workers_) throw std::invalid_argument("run_ranges: one range per worker required");
  if (n_workers_ == 1) {
    if (ranges[0].size() > 0) task(0, ranges[0]);
    return;
  }
  {
    std::lock_guard lock(mutex_);
    task_ = &task;
    ranges_ = &ranges;
    pending_ = n_workers_ - 1;
    error_ = nullptr;
    ++generation_;
  }
  start_.notify_all();
  std::exception_ptr own;
  try {
    if (ranges[0].size() > 0) task(0, ranges[0]);
  } catch (...) {
    own = std::current_exception();
  }
  std::unique_lock lock(mutex_);
  done_.wait(lock, [&] { return pending_ == 0; });
  if (own) std::rethrow_exception(own);
  if (error_) std::rethrow_exception(error_);
}

void ThreadPoolExecutor::for_each_range(std::size_t n_columns, const RangeTask& task) {
  run_ranges(split_columns(n_columns, n_workers_), task);
}

std::unique_ptr<ColumnExecutor> make_executor(std::size_t n_workers) {
  if (n_workers <= 1) return std::make_unique<SerialExecutor>();
  return std::make_unique<ThreadPoolExecutor>(n_workers);
}

// ---------------------------------------------------------------------------

ParallelPlan ParallelPlan::make(std::size_t n_time, std::size_t n_workers, const TemporalMatrices& temporal) {
  if (n_workers == 0) throw std::invalid_argument("ParallelPlan: need at least one worker");
  ParallelPlan plan;
  plan.n_workers = n_workers;
  plan.column_ranges = split_columns(n_time, n_workers);
  for (const SparseMatrix* m : {&temporal.mass, &temporal.stiffness, &temporal.derivative, &temporal.derivative_t})
    plan.halo_width = std::max(plan.halo_width, m->bandwidth());
  plan.validate(n_time);
  return plan;
}

void ParallelPlan::validate(std::size_t n_time) const {
  if (n_workers == 0 || column_ranges.size() != n_workers)
    throw std::invalid_argument("ParallelPlan: one range per worker required");
  std::size_t next = 0;
  for (const auto& r : column_ranges) {
    if (r.begin != next || r.end < r.begin) throw std::invalid_argument("ParallelPlan: ranges not contiguous");
    next = r.end;
  }
  if (next != n_time) throw std::invalid_argument("ParallelPlan: ranges do not cover all columns");
}

// ---------------------------------------------------------------------------

double tree_sum(std::span<const double> v) {
  if (v.empty()) return 0.0;
  if (v.size() == 1) return v[0];
  const std::size_t h = v.size() / 2;
  return tree_sum(v.first(h)) + tree_sum(v.subspan(h));
}

double dot(const SpaceTimeVector& a, const SpaceTimeVector& b, ColumnExecutor& exec) {
  if (!a.same_shape(b)) throw std::invalid_argument("dot: dimension mismatch");
  std::vector<double> partial(a.n_time());
  exec.for_each_range(a.n_time(), [&](std::size_t, ColumnRange r) {
    for (std::size_t j = r.begin; j < r.end; ++j) {
      const auto x = a.column(j);
      const auto y = b.column(j);
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
      partial[j] = s;
    }
  });
  return tree_sum(partial);
}

double dot(const SpaceTimeVector& a, const SpaceTimeVector& b) {
  SerialExecutor serial;
  return dot(a, b, serial);
}

// ---------------------------------------------------------------------------

IterationCapExceeded::IterationCapExceeded(int cap, std::vector<double> history)
    : std::runtime_error("pcg: iteration cap " + std::to_string(cap) + " exceeded, last residual " +
                         (history.empty() ? std::string("n/a") : std::to_string(history.back()))),
      history_(std::move(history)) {}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// y = a * x + b * y, column-parallel.
void axpby(double a, const SpaceTimeVector& x, double b, SpaceTimeVector& y, ColumnExecutor& exec) {
  exec.for_each_range(x.n_time(), [&](std::size_t, ColumnRange r) {
    for (std::size_t j = r.begin; j < r.end; ++j) {
      const auto xs = x.column(j);
      auto ys = y.column(j);
      for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = a * xs[i] + b * ys[i];
    }
  });
}

}  // namespace

PCGResult pcg(const SchurOperator& s, const PreconditionerKX& k, const SpaceTimeVector& f_hat,
              const PCGOptions& options, ColumnExecutor& exec) {
  if (!(options.epsilon > 0.0)) throw std::invalid_argument("pcg: epsilon must be positive");
  if (options.max_iterations < 0 || options.recompute_interval < 1) throw std::invalid_argument("pcg: bad options");
  const std::size_t nx = s.n_space();
  const std::size_t nt = s.n_time();
  if (f_hat.n_space() != nx || f_hat.n_time() != nt) throw std::invalid_argument("pcg: dimension mismatch");

  const auto t_start = Clock::now();
  PCGResult res;
  res.w = SpaceTimeVector(nx, nt);
  SpaceTimeVector r = f_hat;  // f - S w_0 with w_0 = 0
  SpaceTimeVector z(nx, nt), p(nx, nt), q(nx, nt);

  auto precondition = [&] {
    const auto t0 = Clock::now();
    k.apply(r, z, exec);
    res.wall_times.preconditioner += seconds_since(t0);
  };
  auto schur = [&](const SpaceTimeVector& in, SpaceTimeVector& out) {
    const auto t0 = Clock::now();
    s.apply(in, out, exec);
    res.wall_times.schur += seconds_since(t0);
  };
  auto timed_dot = [&](const SpaceTimeVector& a, const SpaceTimeVector& b) {
    const auto t0 = Clock::now();
    const double v = dot(a, b, exec);
    res.wall_times.vector_ops += seconds_since(t0);
    return v;
  };
  auto timed_axpby = [&](double a, const SpaceTimeVector& x, double b, SpaceTimeVector& y) {
    const auto t0 = Clock::now();
    axpby(a, x, b, y, exec);
    res.wall_times.vector_ops += seconds_since(t0);
  };

  precondition();
  double rz = timed_dot(r, z);
  if (rz < 0.0) throw std::runtime_error("pcg: preconditioner is not positive definite");
  res.residual_norms.push_back(std::sqrt(rz));
  const double threshold = options.relative ? options.epsilon * options.epsilon * rz : options.epsilon * options.epsilon;

  if (rz <= threshold || rz == 0.0) {
    res.converged = true;
    res.wall_times.total = seconds_since(t_start);
    return res;
  }
  p = z;
  for (int it = 0;; ++it) {
    if (it >= options.max_iterations) {
      if (options.throw_on_cap) throw IterationCapExceeded(options.max_iterations, res.residual_norms);
      break;
    }
    schur(p, q);
    const double pq = timed_dot(p, q);
    if (!(pq > 0.0)) throw std::runtime_error("pcg: operator is not positive definite");
    const double alpha = rz / pq;
    timed_axpby(alpha, p, 1.0, res.w);
    if ((it + 1) % options.recompute_interval == 0) {
      schur(res.w, q);
      timed_axpby(1.0, f_hat, -1.0, q);
      r = q;
    } else {
      timed_axpby(-alpha, q, 1.0, r);
    }
    precondition();
    const double rz_new = timed_dot(r, z);
    if (rz_new < 0.0) throw std::runtime_error("pcg: preconditioner is not positive definite");
    const double beta = rz_new / rz;
    res.alphas.push_back(alpha);
    res.betas.push_back(beta);
    res.iterations = it + 1;
    res.residual_norms.push_back(std::sqrt(rz_new));
    if (rz_new <= threshold) {
      res.converged = true;
      break;
    }
    timed_axpby(1.0, z, beta, p);
    rz = rz_new;
  }
  if (!res.alphas.empty()) {
    const RitzBounds b = lanczos_bounds(res.alphas, res.betas);
    res.kappa_estimate = b.lambda_max / b.lambda_min;
  }
  res.wall_times.total = seconds_since(t_start);
  return res;
}

PCGResult pcg(const SchurOperator& s, const PreconditionerKX& k, const SpaceTimeVector& f_hat,
              const PCGOptions& options) {
  SerialExecutor serial;
  return pcg(s, k, f_hat, options, serial);
}

RitzBounds lanczos_bounds(std::span<const double> alphas, std::span<const double> betas) {
  const std::size_t m = alphas.size();
  if (m == 0 || betas.size() < m - 1) throw std::invalid_argument("lanczos_bounds: missing coefficients");
  Eigen::VectorXd diag(static_cast<Eigen::Index>(m));
  Eigen::VectorXd off(static_cast<Eigen::Index>(m > 1 ? m - 1 : 0));
  for (std::size_t i = 0; i < m; ++i) {
    double d = 1.0 / alphas[i];
    if (i > 0) d += betas[i - 1] / alphas[i - 1];
    diag(static_cast<Eigen::Index>(i)) = d;
    if (i + 1 < m) off(static_cast<Eigen::Index>(i)) = std::sqrt(betas[i]) / alphas[i];
  }
  RitzBounds b;
  if (m == 1) {
    b.lambda_min = b.lambda_max = diag(0);
    return b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  b.lambda_min = es.eigenvalues().minCoeff();
  b.lambda_max = es.eigenvalues().maxCoeff();
  return b;
}

double estimate_condition(const PCGResult& result) {
  if (result.alphas.size() < 5) throw std::invalid_argument("estimate_condition: fewer than 5 iterations recorded");
  const RitzBounds b = lanczos_bounds(result.alphas, result.betas);
  return b.lambda_max / b.lambda_min;
}

// ---------------------------------------------------------------------------

HeatSolution solve_heat(const ProblemData& problem, const SystemConfig& config, const SolveOptions& options) {
  auto system = std::make_shared<const SpaceTimeSystem>(build_system(config));
  auto exec = make_executor(options.n_workers);
  const RightHandSide rhs = assemble_rhs(*system, problem, *exec);
  HeatSolution sol{system, pcg(*system->schur, *system->preconditioner, rhs.f_hat, options.pcg, *exec), {}};
  sol.u = SpaceTimeVector(system->n_space(), system->n_time());
  system->wavelet->apply(sol.result.w, sol.u, *exec);
  return sol;
}

std::vector<double> trace_at(const HeatSolution& solution, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::out_of_range("trace_at: t outside [0, 1]");
  const std::size_t n_el = solution.u.n_time() - 1;
  const double s = t * static_cast<double>(n_el);
  const std::size_t e = std::min(static_cast<std::size_t>(std::floor(s)), n_el - 1);
  const double lam = s - static_cast<double>(e);
  const auto a = solution.u.column(e);
  const auto b = solution.u.column(e + 1);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (1.0 - lam) * a[i] + lam * b[i];
  return out;
}

ErrorReport measure_error(const HeatSolution& solution, const SpaceTimeFunction& exact, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::out_of_range("measure_error: t outside [0, 1]");
  const std::vector<double> c = trace_at(solution, t);
  ErrorReport rep;
  rep.l2 = l2_error(solution.system->mesh(), c, [&](const Point& x) { return exact ? exact(t, x) : 0.0; });
  rep.algebraic = solution.result.residual_norms.empty() ? 0.0 : solution.result.residual_norms.back();
  return rep;
}

SpaceTimeVector parallel_execute(const ParallelPlan& plan, std::size_t n_space, std::size_t n_time,
                                 const ColumnTask& task) {
  plan.validate(n_time);
  SpaceTimeVector out(n_space, n_time);
  ThreadPoolExecutor pool(plan.n_workers);
  pool.run_ranges(plan.column_ranges, [&](std::size_t, ColumnRange r) { task(r, out); });
  return out;
}

}  // namespace spacetime
