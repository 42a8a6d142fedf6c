#include "spacetime/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <fstream>
#include <new>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace spacetime {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

long parse_long(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long x = 0;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad integer for '" + key + "': " + v);
  }
  if (pos != v.size()) throw std::invalid_argument("bad integer for '" + key + "': " + v);
  return x;
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number for '" + key + "': " + v);
  }
  if (pos != v.size()) throw std::invalid_argument("bad number for '" + key + "': " + v);
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::invalid_argument("bad boolean for '" + key + "': " + v);
}

std::vector<int> parse_levels(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& part : split(v, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) {
      out.push_back(static_cast<int>(parse_long(key, part)));
    } else {
      const long a = parse_long(key, trim(part.substr(0, colon)));
      const long b = parse_long(key, trim(part.substr(colon + 1)));
      if (b < a) throw std::invalid_argument("empty range for '" + key + "': " + part);
      for (long l = a; l <= b; ++l) out.push_back(static_cast<int>(l));
    }
  }
  if (out.empty()) throw std::invalid_argument("empty list for '" + key + "'");
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << csv_field(fields[i]);
  os << '\n';
}

json config_json(const RunConfig& c) {
  json j;
  for (const auto& [k, v] : config_echo(c)) j[k] = v;
  return j;
}

std::vector<std::string> with_config(std::vector<std::string> row, const RunConfig& c) {
  for (const auto& kv : config_echo(c)) row.push_back(kv.second);
  return row;
}

std::vector<std::string> config_keys(const RunConfig& c) {
  std::vector<std::string> keys;
  for (const auto& kv : config_echo(c)) keys.push_back(kv.first);
  return keys;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

Manufactured problem_for(const RunConfig& c) {
  if (c.problem) return *c.problem;
  return c.mode == RunMode::convergence ? Manufactured::forced : Manufactured::decay;
}

std::size_t n_space_of(int dim, int K) {
  const std::size_t n = (std::size_t{1} << K) - 1;
  std::size_t r = 1;
  for (int i = 0; i < dim; ++i) r *= n;
  return r;
}

std::size_t n_time_of(int J) { return (std::size_t{1} << J) + 1; }

}  // namespace

// ---------------------------------------------------------------------------

SystemConfig RunConfig::system_config(int J, int K) const {
  SystemConfig s;
  s.dim = dim;
  s.coefficients = Coefficients::heat(dim);
  s.time_level = J;
  s.space_level = K;
  s.alpha = alpha;
  s.multigrid.n_vcycles = vcycles;
  s.multigrid.n_smooth = smooth;
  s.exact_inverses = exact_inverses;
  return s;
}

std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::solve: return "solve";
    case RunMode::condition: return "condition";
    case RunMode::scaling: return "scaling";
    case RunMode::convergence: return "convergence";
  }
  return "?";
}

std::string to_string(ScalingMode m) { return m == ScalingMode::strong ? "strong" : "weak"; }

std::string to_string(Manufactured m) {
  switch (m) {
    case Manufactured::decay: return "decay";
    case Manufactured::forced: return "forced";
    case Manufactured::zero: return "zero";
  }
  return "?";
}

void apply_setting(RunConfig& c, const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string v = trim(value_in);
  if (key == "mode") {
    if (v == "solve") c.mode = RunMode::solve;
    else if (v == "condition") c.mode = RunMode::condition;
    else if (v == "scaling") c.mode = RunMode::scaling;
    else if (v == "convergence") c.mode = RunMode::convergence;
    else throw std::invalid_argument("unknown mode: " + v);
  } else if (key == "dim") {
    c.dim = static_cast<int>(parse_long(key, v));
  } else if (key == "time-level") {
    c.time_levels = parse_levels(key, v);
  } else if (key == "space-level") {
    c.space_levels = parse_levels(key, v);
  } else if (key == "alpha") {
    c.alpha = parse_double(key, v);
  } else if (key == "alphas") {
    c.alphas.clear();
    for (const auto& s : split(v, ',')) c.alphas.push_back(parse_double(key, s));
  } else if (key == "epsilon") {
    c.epsilon = parse_double(key, v);
  } else if (key == "vcycles") {
    c.vcycles = static_cast<int>(parse_long(key, v));
  } else if (key == "smooth") {
    c.smooth = static_cast<int>(parse_long(key, v));
  } else if (key == "workers") {
    c.workers.clear();
    for (const auto& s : split(v, ',')) {
      const long w = parse_long(key, s);
      if (w < 1) throw std::invalid_argument("workers must be positive");
      c.workers.push_back(static_cast<std::size_t>(w));
    }
  } else if (key == "exact-inverses") {
    c.exact_inverses = parse_bool(key, v);
  } else if (key == "scaling") {
    if (v == "strong") c.scaling = ScalingMode::strong;
    else if (v == "weak") c.scaling = ScalingMode::weak;
    else throw std::invalid_argument("unknown scaling mode: " + v);
  } else if (key == "problem") {
    if (v == "decay") c.problem = Manufactured::decay;
    else if (v == "forced") c.problem = Manufactured::forced;
    else if (v == "zero") c.problem = Manufactured::zero;
    else throw std::invalid_argument("unknown problem: " + v);
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(parse_long(key, v));
  } else if (key == "out") {
    c.output = v;
  } else if (key == "format") {
    if (v == "csv") c.format = OutputFormat::csv;
    else if (v == "json") c.format = OutputFormat::json;
    else throw std::invalid_argument("unknown format: " + v);
  } else if (key == "check") {
    c.check = parse_bool(key, v);
  } else {
    throw std::invalid_argument("unknown setting: " + key);
  }
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
    apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
  }
}

std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& c) {
  return {
      {"mode", to_string(c.mode)},
      {"dim", std::to_string(c.dim)},
      {"time-level", join(c.time_levels)},
      {"space-level", join(c.space_levels)},
      {"alpha", fmt(c.alpha)},
      {"alphas", join(c.alphas)},
      {"epsilon", fmt(c.epsilon)},
      {"vcycles", std::to_string(c.vcycles)},
      {"smooth", std::to_string(c.smooth)},
      {"workers", join(c.workers)},
      {"exact-inverses", c.exact_inverses ? "true" : "false"},
      {"scaling", to_string(c.scaling)},
      {"problem", to_string(problem_for(c))},
      {"seed", std::to_string(c.seed)},
  };
}

void validate(const RunConfig& c) {
  if (c.dim < 1 || c.dim > 3) throw std::invalid_argument("dim must be 1, 2 or 3");
  for (int J : c.time_levels)
    if (J < 0 || J > 24) throw std::invalid_argument("time level out of range");
  for (int K : c.space_levels)
    if (K < 1 || K > 14) throw std::invalid_argument("space level out of range");
  if (!(c.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  for (double a : c.alphas)
    if (!(a > 0.0)) throw std::invalid_argument("alphas must be positive");
  if (!(c.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (c.vcycles < 1 || c.smooth < 0) throw std::invalid_argument("need vcycles >= 1 and smooth >= 0");
  if (c.workers.empty()) throw std::invalid_argument("need at least one worker count");
  if (c.mode == RunMode::convergence && c.time_levels.size() != c.space_levels.size() && c.time_levels.size() != 1 &&
      c.space_levels.size() != 1)
    throw std::invalid_argument("convergence: time and space level lists must have equal length");
  if (c.mode == RunMode::scaling && c.scaling == ScalingMode::weak)
    for (std::size_t p : c.workers)
      if ((p & (p - 1)) != 0) throw std::invalid_argument("weak scaling needs power-of-two worker counts");
}

ProblemData manufactured_problem(int dim, Manufactured kind) {
  ProblemData p;
  p.coefficients = Coefficients::heat(dim);
  if (kind == Manufactured::zero) {
    p.exact = [](double, const Point&) { return 0.0; };
    return p;
  }
  auto sines = [dim](const Point& x) {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) v *= std::sin(std::numbers::pi * x[static_cast<std::size_t>(i)]);
    return v;
  };
  const double lambda = dim * std::numbers::pi * std::numbers::pi;
  p.initial = sines;
  if (kind == Manufactured::decay) {
    p.exact = [=](double t, const Point& x) { return std::exp(-lambda * t) * sines(x); };
  } else {
    p.exact = [=](double t, const Point& x) { return std::exp(-t) * sines(x); };
    p.forcing = [=](double t, const Point& x) { return (lambda - 1.0) * std::exp(-t) * sines(x); };
  }
  return p;
}

BenchRecord BenchRecord::make(std::size_t P, std::size_t N_t, std::size_t N_x, int iterations, double seconds) {
  BenchRecord r;
  r.P = P;
  r.N_t = N_t;
  r.N_x = N_x;
  r.N = N_t * N_x;
  r.iterations = iterations;
  r.total_seconds = seconds;
  r.seconds_per_iteration = iterations > 0 ? seconds / iterations : 0.0;
  r.cpu_hours = static_cast<double>(P) * seconds / 3600.0;
  return r;
}

KappaEstimate estimate_kappa(const SpaceTimeSystem& system, std::uint64_t seed, ColumnExecutor& exec) {
  SpaceTimeVector f(system.n_space(), system.n_time());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (double& x : f.data()) x = normal(rng);
  PCGOptions o;
  o.relative = true;
  o.epsilon = 1e-15;
  o.max_iterations = 150;
  o.throw_on_cap = false;
  const PCGResult r = pcg(*system.schur, *system.preconditioner, f, o, exec);
  return {estimate_condition(r), r.iterations};
}

const std::map<std::pair<std::size_t, std::size_t>, double>& reference_condition_numbers() {
  static const std::map<std::pair<std::size_t, std::size_t>, double> table = [] {
    const std::size_t nt[] = {65, 129, 257, 513, 1025, 2049, 4097, 8193};
    const std::size_t nx[] = {49, 225, 961, 3969, 16129};
    const double k[5][8] = {
        {6.34, 7.05, 7.53, 7.89, 8.15, 8.37, 8.60, 8.78},
        {6.33, 6.89, 7.55, 7.91, 8.14, 8.38, 8.57, 8.73},
        {6.14, 6.89, 7.55, 7.93, 8.15, 8.38, 8.57, 8.74},
        {6.14, 7.07, 7.56, 7.87, 8.16, 8.38, 8.57, 8.74},
        {6.14, 6.52, 7.55, 7.86, 8.16, 8.37, 8.57, 8.74},
    };
    std::map<std::pair<std::size_t, std::size_t>, double> m;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 8; ++j) m[{nt[j], nx[i]}] = k[i][j];
    return m;
  }();
  return table;
}

std::size_t estimate_solve_bytes(std::size_t n_time, std::size_t n_space) {
  // Twelve space-time vectors live at the peak of a PCG step.
  return 12 * n_time * n_space * sizeof(double);
}

std::size_t available_memory_bytes() {
  std::ifstream in("/proc/meminfo");
  std::string key;
  std::size_t value = 0;
  std::string unit;
  while (in >> key >> value >> unit)
    if (key == "MemAvailable:") return value * 1024;
  return std::numeric_limits<std::size_t>::max();
}

// ---------------------------------------------------------------------------

SolveReport run_solve(const RunConfig& config) {
  validate(config);
  const int J = config.time_level();
  const int K = config.space_level();
  const ProblemData problem = manufactured_problem(config.dim, problem_for(config));
  SolveOptions o;
  o.pcg.epsilon = config.epsilon;
  o.n_workers = config.workers.front();
  const HeatSolution sol = solve_heat(problem, config.system_config(J, K), o);
  SolveReport rep;
  rep.record = BenchRecord::make(o.n_workers, sol.system->n_time(), sol.system->n_space(), sol.result.iterations,
                                 sol.result.wall_times.total);
  rep.error_end = measure_error(sol, problem.exact, 1.0).l2;
  const ErrorReport e0 = measure_error(sol, problem.exact, 0.0);
  rep.error_start = e0.l2;
  rep.algebraic = e0.algebraic;
  rep.residual_norms = sol.result.residual_norms;
  return rep;
}

std::vector<ConditionCell> run_condition_table(const RunConfig& config) {
  validate(config);
  std::vector<ConditionCell> cells;
  auto exec = make_executor(config.workers.front());
  const std::size_t budget = available_memory_bytes();

  auto run_cell = [&](int J, int K, double alpha) {
    ConditionCell cell;
    cell.J = J;
    cell.K = K;
    cell.N_t = n_time_of(J);
    cell.N_x = n_space_of(config.dim, K);
    cell.alpha = alpha;
    // Sparse Cholesky fill grows superlinearly; keep exact runs to sizes
    // whose factors fit comfortably.
    const bool too_large = estimate_solve_bytes(cell.N_t, cell.N_x) > budget / 2 ||
                           (config.exact_inverses && cell.N_x > (config.dim == 3 ? 40000u : 300000u));
    if (too_large) {
      cell.status = "skipped";
      cells.push_back(cell);
      return;
    }
    try {
      RunConfig c = config;
      c.alpha = alpha;
      const auto t0 = Clock::now();
      const SpaceTimeSystem system = build_system(c.system_config(J, K));
      const KappaEstimate k = estimate_kappa(system, config.seed, *exec);
      cell.kappa = k.kappa;
      cell.iterations = k.iterations;
      cell.seconds = seconds_since(t0);
    } catch (const std::bad_alloc&) {
      cell.status = "skipped";
    }
    cells.push_back(cell);
  };

  if (!config.alphas.empty()) {
    for (double a : config.alphas) run_cell(config.time_level(), config.space_level(), a);
  } else {
    for (int K : config.space_levels)
      for (int J : config.time_levels) run_cell(J, K, config.alpha);
  }
  return cells;
}

std::vector<BenchRecord> run_scaling_bench(const RunConfig& config) {
  validate(config);
  std::vector<BenchRecord> records;
  const ProblemData problem = manufactured_problem(config.dim, problem_for(config));
  const std::size_t budget = available_memory_bytes();
  for (std::size_t P : config.workers) {
    int J = config.time_level();
    if (config.scaling == ScalingMode::weak)
      for (std::size_t p = P; p > 1; p >>= 1) ++J;
    const int K = config.space_level();
    const std::size_t nt = n_time_of(J);
    const std::size_t nx = n_space_of(config.dim, K);
    if (estimate_solve_bytes(nt, nx) > budget) {
      BenchRecord r = BenchRecord::make(P, nt, nx, 0, 0.0);
      r.status = "out of memory";
      records.push_back(r);
      continue;
    }
    try {
      const SpaceTimeSystem system = build_system(config.system_config(J, K));
      auto exec = make_executor(P);
      const RightHandSide rhs = assemble_rhs(system, problem, *exec);
      PCGOptions o;
      o.epsilon = config.epsilon;
      const PCGResult res = pcg(*system.schur, *system.preconditioner, rhs.f_hat, o, *exec);
      records.push_back(BenchRecord::make(P, nt, nx, res.iterations, res.wall_times.total));
    } catch (const std::bad_alloc&) {
      BenchRecord r = BenchRecord::make(P, nt, nx, 0, 0.0);
      r.status = "out of memory";
      records.push_back(r);
    }
  }
  return records;
}

std::vector<ConvergenceRow> run_convergence(const RunConfig& config) {
  validate(config);
  std::vector<std::pair<int, int>> levels;
  const std::size_t n = std::max(config.time_levels.size(), config.space_levels.size());
  if (n == 1) {
    // A single pair (J, K) means the three levels ending there.
    for (int s = 2; s >= 0; --s) levels.emplace_back(config.time_level() - s, config.space_level() - s);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      levels.emplace_back(config.time_levels[std::min(i, config.time_levels.size() - 1)],
                          config.space_levels[std::min(i, config.space_levels.size() - 1)]);
  }
  const ProblemData problem = manufactured_problem(config.dim, problem_for(config));
  SolveOptions o;
  o.pcg.epsilon = config.epsilon;
  o.n_workers = config.workers.front();
  std::vector<ConvergenceRow> rows;
  for (const auto& [J, K] : levels) {
    const HeatSolution sol = solve_heat(problem, config.system_config(J, K), o);
    ConvergenceRow row;
    row.J = J;
    row.K = K;
    row.N_t = sol.system->n_time();
    row.N_x = sol.system->n_space();
    row.h = std::max(std::ldexp(1.0, -J), std::ldexp(1.0, -K));
    row.error = measure_error(sol, problem.exact, 1.0).l2;
    row.iterations = sol.result.iterations;
    if (!rows.empty() && rows.back().error > 0.0 && row.error > 0.0 && rows.back().h != row.h)
      row.rate = std::log(rows.back().error / row.error) / std::log(rows.back().h / row.h);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& bench_headers() {
  static const std::vector<std::string> h = {"P",  "N_t", "N_x", "N = N_t N_x", "its", "time (s)", "time/it (s)",
                                             "CPU-hrs"};
  return h;
}

namespace {

std::vector<std::string> bench_fields(const BenchRecord& r) {
  return {std::to_string(r.P),    std::to_string(r.N_t),         std::to_string(r.N_x),
          std::to_string(r.N),    std::to_string(r.iterations),  fmt(r.total_seconds),
          fmt(r.seconds_per_iteration), fmt(r.cpu_hours)};
}

json bench_json(const BenchRecord& r, const RunConfig& c) {
  return {{"P", r.P},
          {"N_t", r.N_t},
          {"N_x", r.N_x},
          {"N", r.N},
          {"its", r.iterations},
          {"time_s", r.total_seconds},
          {"time_per_it_s", r.seconds_per_iteration},
          {"cpu_hrs", r.cpu_hours},
          {"status", r.status},
          {"config", config_json(c)}};
}

}  // namespace

void write_solve(std::ostream& os, const RunConfig& config, const SolveReport& rep) {
  if (config.format == OutputFormat::json) {
    json j = bench_json(rep.record, config);
    j["error_T"] = rep.error_end;
    j["error_0"] = rep.error_start;
    j["algebraic"] = rep.algebraic;
    j["residual_norms"] = rep.residual_norms;
    os << j.dump(2) << '\n';
    return;
  }
  write_csv_row(os, concat(concat(bench_headers(), {"status", "error(T)", "error(0)", "algebraic"}), config_keys(config)));
  write_csv_row(os, with_config(concat(bench_fields(rep.record), {rep.record.status, fmt(rep.error_end),
                                                                   fmt(rep.error_start), fmt(rep.algebraic)}),
                                config));
}

void write_condition(std::ostream& os, const RunConfig& config, const std::vector<ConditionCell>& cells) {
  if (config.format == OutputFormat::json) {
    json j;
    j["config"] = config_json(config);
    json rows = json::array();
    for (const auto& c : cells) {
      json r = {{"J", c.J},         {"K", c.K},          {"N_t", c.N_t},   {"N_x", c.N_x},
                {"cell_alpha", c.alpha}, {"its", c.iterations}, {"time_s", c.seconds}, {"status", c.status},
                {"config", config_json(config)}};
      r["kappa"] = c.kappa ? json(*c.kappa) : json(nullptr);
      rows.push_back(r);
    }
    j["cells"] = rows;
    os << j.dump(2) << '\n';
    return;
  }
  write_csv_row(os, concat({"N_t", "N_x", "J", "K", "cell alpha", "kappa", "its", "time (s)", "status"}, config_keys(config)));
  for (const auto& c : cells)
    write_csv_row(os, with_config({std::to_string(c.N_t), std::to_string(c.N_x), std::to_string(c.J),
                                   std::to_string(c.K), fmt(c.alpha), c.kappa ? fixed(*c.kappa, 4) : "skipped",
                                   std::to_string(c.iterations), fmt(c.seconds), c.status},
                                  config));
}

void write_scaling(std::ostream& os, const RunConfig& config, const std::vector<BenchRecord>& records) {
  if (config.format == OutputFormat::json) {
    json rows = json::array();
    for (const auto& r : records) rows.push_back(bench_json(r, config));
    os << json{{"config", config_json(config)}, {"records", rows}}.dump(2) << '\n';
    return;
  }
  write_csv_row(os, concat(concat(bench_headers(), {"status"}), config_keys(config)));
  for (const auto& r : records) write_csv_row(os, with_config(concat(bench_fields(r), {r.status}), config));
}

void write_convergence(std::ostream& os, const RunConfig& config, const std::vector<ConvergenceRow>& rows) {
  if (config.format == OutputFormat::json) {
    json out = json::array();
    for (const auto& r : rows) {
      json j = {{"J", r.J},   {"K", r.K},         {"N_t", r.N_t},        {"N_x", r.N_x},
                {"h", r.h},   {"error_T", r.error}, {"its", r.iterations}, {"config", config_json(config)}};
      j["rate"] = r.rate ? json(*r.rate) : json(nullptr);
      out.push_back(j);
    }
    os << json{{"config", config_json(config)}, {"rows", out}}.dump(2) << '\n';
    return;
  }
  write_csv_row(os, concat({"J", "K", "N_t", "N_x", "h", "error(T)", "rate", "its"}, config_keys(config)));
  for (const auto& r : rows)
    write_csv_row(os, with_config({std::to_string(r.J), std::to_string(r.K), std::to_string(r.N_t),
                                   std::to_string(r.N_x), fmt(r.h), fmt(r.error), r.rate ? fixed(*r.rate, 3) : "",
                                   std::to_string(r.iterations)},
                                  config));
}

// ---------------------------------------------------------------------------

std::vector<std::string> check_solve(const RunConfig& config, const SolveReport& rep) {
  std::vector<std::string> fails;
  if (rep.record.iterations > 20) fails.push_back("iterations " + std::to_string(rep.record.iterations) + " > 20");
  if (rep.algebraic > config.epsilon) fails.push_back("final residual " + fmt(rep.algebraic) + " above epsilon");
  return fails;
}

std::vector<std::string> check_condition(const RunConfig& config, const std::vector<ConditionCell>& cells) {
  std::vector<std::string> fails;
  const auto& ref = reference_condition_numbers();
  for (const auto& c : cells) {
    if (!c.kappa) continue;
    const auto it = ref.find({c.N_t, c.N_x});
    if (config.dim != 2 || it == ref.end() || std::abs(c.alpha - 0.3) > 1e-12) continue;
    const std::string where = "(" + std::to_string(c.N_t) + ", " + std::to_string(c.N_x) + ")";
    if (config.exact_inverses) {
      const double tol = c.N_t >= 8193 ? 0.2 : 0.15;
      if (std::abs(*c.kappa - it->second) > tol)
        fails.push_back("kappa at " + where + " = " + fixed(*c.kappa, 3) + ", reference " + fixed(it->second, 2));
    } else if (*c.kappa > 2.0 * it->second) {
      fails.push_back("multigrid kappa at " + where + " exceeds twice the exact-inverse reference");
    }
  }
  return fails;
}

std::vector<std::string> check_scaling(const RunConfig& config, const std::vector<BenchRecord>& records) {
  std::vector<std::string> fails;
  std::vector<const BenchRecord*> ok;
  for (const auto& r : records)
    if (r.status == "ok") ok.push_back(&r);
  if (ok.empty()) return {"no completed runs"};
  for (const auto* r : ok)
    if (r->iterations > 20) fails.push_back("iterations " + std::to_string(r->iterations) + " > 20");
  if (config.scaling == ScalingMode::strong) {
    for (const auto* r : ok)
      if (r->iterations != ok.front()->iterations) fails.push_back("iteration count depends on the worker count");
  } else {
    double lo = ok.front()->seconds_per_iteration, hi = lo;
    for (const auto* r : ok) {
      lo = std::min(lo, r->seconds_per_iteration);
      hi = std::max(hi, r->seconds_per_iteration);
    }
    if (lo > 0.0 && hi / lo > 1.8) fails.push_back("time per iteration varies by more than 1.8x");
  }
  return fails;
}

std::vector<std::string> check_convergence(const RunConfig&, const std::vector<ConvergenceRow>& rows) {
  std::vector<std::string> fails;
  if (rows.size() < 3) fails.push_back("need at least three levels");
  const bool all_zero = std::all_of(rows.begin(), rows.end(), [](const ConvergenceRow& r) { return r.error == 0.0; });
  if (all_zero) return fails;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!rows[i].rate || *rows[i].rate < 1.7)
      fails.push_back("rate at J=" + std::to_string(rows[i].J) + " is " + (rows[i].rate ? fixed(*rows[i].rate, 3) : "n/a"));
  return fails;
}

}  // namespace spacetime
