// Command-line driver: solve | condition | scaling | convergence.

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "spacetime/bench.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitCheckFailed = 2;

const char* const kKeys[] = {"dim",     "time-level", "space-level", "alpha", "alphas", "epsilon", "vcycles",
                             "smooth",  "workers",    "scaling",     "problem", "seed", "format",  "out"};

struct Flags {
  std::map<std::string, std::string> values;
  std::string config_file;
  bool exact = false;
  bool check = false;
};

void add_common(CLI::App* sub, Flags& f) {
  auto opt = [&](const char* key, const char* help) {
    sub->add_option(std::string("--") + key, f.values[key], help);
  };
  opt("dim", "spatial dimension (1, 2 or 3)");
  opt("time-level", "J, or a list such as 3,4,5 or 3:8");
  opt("space-level", "K, or a list such as 3,4,5 or 3:6");
  opt("alpha", "alpha in C_j = (alpha A + 2^j M)^-1");
  opt("alphas", "condition mode: comma-separated alpha sweep");
  opt("epsilon", "PCG tolerance on (r^T K_X r)^(1/2)");
  opt("vcycles", "V-cycles per spatial solve");
  opt("smooth", "Gauss-Seidel steps per level on the finest grid");
  opt("workers", "worker count, or a comma-separated list for scaling");
  opt("scaling", "strong or weak");
  opt("problem", "decay, forced or zero");
  opt("seed", "random seed for condition estimates");
  opt("format", "csv or json");
  opt("out", "output file (default stdout)");
  sub->add_flag("--exact-inverses", f.exact, "use sparse Cholesky instead of multigrid");
  sub->add_flag("--check", f.check, "compare against built-in tolerances; exit 2 on failure");
  sub->add_option("--config", f.config_file, "key=value file; flags take precedence");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace spacetime;
  CLI::App app{"Space-time parallel heat equation solver"};
  app.require_subcommand(1);

  std::map<std::string, Flags> flags;
  std::map<std::string, RunMode> modes = {{"solve", RunMode::solve},
                                          {"condition", RunMode::condition},
                                          {"scaling", RunMode::scaling},
                                          {"convergence", RunMode::convergence}};
  const std::map<std::string, std::string> help = {
      {"solve", "solve one manufactured problem and report iterations and errors"},
      {"condition", "table of kappa(K_X S) over (N_t, N_x)"},
      {"scaling", "strong or weak scaling over worker counts"},
      {"convergence", "L2 error at t = 1 under joint refinement"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, mode] : modes) {
    subs[name] = app.add_subcommand(name, help.at(name));
    add_common(subs[name], flags[name]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    std::string name;
    for (const auto& [n, sub] : subs)
      if (sub->parsed()) name = n;
    Flags& f = flags[name];
    CLI::App* sub = subs[name];

    RunConfig config;
    config.mode = modes.at(name);
    if (!f.config_file.empty()) apply_config_file(config, f.config_file);
    for (const char* key : kKeys)
      if (sub->count(std::string("--") + key) > 0) apply_setting(config, key, f.values[key]);
    if (f.exact) config.exact_inverses = true;
    if (f.check) config.check = true;
    config.mode = modes.at(name);
    validate(config);

    std::ofstream file;
    if (!config.output.empty()) {
      file.open(config.output);
      if (!file) throw std::runtime_error("cannot open output file: " + config.output);
    }
    std::ostream& os = config.output.empty() ? std::cout : file;

    std::vector<std::string> failures;
    switch (config.mode) {
      case RunMode::solve: {
        const SolveReport r = run_solve(config);
        write_solve(os, config, r);
        if (config.check) failures = check_solve(config, r);
        break;
      }
      case RunMode::condition: {
        const auto cells = run_condition_table(config);
        write_condition(os, config, cells);
        if (config.check) failures = check_condition(config, cells);
        break;
      }
      case RunMode::scaling: {
        const auto records = run_scaling_bench(config);
        write_scaling(os, config, records);
        if (config.check) failures = check_scaling(config, records);
        break;
      }
      case RunMode::convergence: {
        const auto rows = run_convergence(config);
        write_convergence(os, config, rows);
        if (config.check) failures = check_convergence(config, rows);
        break;
      }
    }
    for (const auto& msg : failures) std::cerr << "check failed: " << msg << '\n';
    return failures.empty() ? kExitOk : kExitCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}
