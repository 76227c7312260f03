// asp: run seeded system-identification experiments and emit learning
// curves as CSV.
//
//   asp run     --alg rls --n 5 --m 50 --iters 200 --out rls.csv
//   asp compare --algs lms,nlms,rls --out figure2.csv
//   asp ops     --alg lms --n 5
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "asp/error.hpp"
#include "asp/sysid.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string alg = "lms";
  std::vector<std::string> algs;
  asp::sysid::ExperimentConfig cfg;
  std::string out = "-";
};

void add_experiment_flags(CLI::App& cmd, Options& opt) {
  auto& c = opt.cfg;
  cmd.add_option("--n", c.n, "Filter length")->capture_default_str();
  cmd.add_option("--m", c.m, "Number of data rows (streamed cyclically)")->capture_default_str();
  cmd.add_option("--iters", c.iters, "Iteration budget")->capture_default_str();
  cmd.add_option("--mu", c.mu, "LMS / steepest-descent step size")->capture_default_str();
  cmd.add_option("--eps", c.eps, "NLMS regularization")->capture_default_str();
  cmd.add_option("--delta", c.delta, "RLS / Kalman initial regularization")
      ->capture_default_str();
  cmd.add_option("--noise", c.noise_std, "Observation noise standard deviation")
      ->capture_default_str();
  cmd.add_option("--seed", c.seed, "Base seed; trial t uses seed + t")->capture_default_str();
  cmd.add_option("--trials", c.trials, "Trials averaged pointwise")->capture_default_str();
  cmd.add_option("--ap-order", c.ap_order, "AP projection order (0 = ceil(n/4))")
      ->capture_default_str();
  cmd.add_option("--rank-tol", c.rank_tol, "Relative eigenvalue cut for reduced-rank")
      ->capture_default_str();
  cmd.add_option("--out", opt.out, "Output CSV path, '-' for stdout")->capture_default_str();
}

asp::sysid::Algorithm parse_or_throw(const std::string& name) {
  const auto alg = asp::sysid::parse_algorithm(name);
  if (!alg) throw asp::Error(asp::ErrorCode::InvalidArgument, "unknown algorithm '" + name + "'");
  return *alg;
}

void emit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw asp::Error(asp::ErrorCode::InvalidArgument, "cannot open '" + path + "'");
  file << text;
  if (!file) throw asp::Error(asp::ErrorCode::InvalidArgument, "failed writing '" + path + "'");
}

int run(Options& opt) {
  opt.cfg.algorithm = parse_or_throw(opt.alg);
  const auto curve = asp::sysid::run_experiment(opt.cfg);
  std::ostringstream csv;
  asp::sysid::write_csv(csv, curve);
  emit(opt.out, csv.str());
  return kExitOk;
}

int compare(Options& opt) {
  if (opt.algs.empty()) {
    throw asp::Error(asp::ErrorCode::InvalidArgument, "--algs needs at least one algorithm");
  }
  std::vector<asp::sysid::ExperimentConfig> cfgs;
  for (const auto& name : opt.algs) {
    auto cfg = opt.cfg;
    cfg.algorithm = parse_or_throw(name);
    cfgs.push_back(cfg);
  }
  const auto curves = asp::sysid::compare_algorithms(std::move(cfgs), opt.cfg.seed);
  std::ostringstream csv;
  asp::sysid::write_compare_csv(csv, curves);
  emit(opt.out, csv.str());
  return kExitOk;
}

int ops(const Options& opt) {
  const auto alg = parse_or_throw(opt.alg);
  std::cout << asp::sysid::count_ops(alg, opt.cfg.n) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seeded adaptive-filter experiments with CSV learning curves"};
  app.require_subcommand(1);

  Options run_opt;
  auto* run_cmd = app.add_subcommand("run", "Run one algorithm and write its learning curve");
  run_cmd->add_option("--alg", run_opt.alg, "Algorithm name")->required();
  add_experiment_flags(*run_cmd, run_opt);

  Options cmp_opt;
  auto* cmp_cmd = app.add_subcommand("compare", "Run several algorithms on identical data");
  cmp_cmd->add_option("--algs", cmp_opt.algs, "Comma-separated algorithm names")
      ->required()
      ->delimiter(',');
  add_experiment_flags(*cmp_cmd, cmp_opt);

  Options ops_opt;
  auto* ops_cmd = app.add_subcommand("ops", "Print the per-step MAC count of an algorithm");
  ops_cmd->add_option("--alg", ops_opt.alg, "Streaming algorithm name")->required();
  ops_cmd->add_option("--n", ops_opt.cfg.n, "Filter length")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run_cmd) return run(run_opt);
    if (*cmp_cmd) return compare(cmp_opt);
    if (*ops_cmd) return ops(ops_opt);
  } catch (const asp::Error& e) {
    std::cerr << "asp: " << e.what() << '\n';
    return asp::is_numerical_failure(e.code()) ? kExitNumerical : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "asp: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
