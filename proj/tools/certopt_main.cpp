// Batch front end: run algorithms on instance files, execute verification
// suites, sweep algorithms across epsilons, and generate seeded instances.

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <semaphore>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "certopt/harness.hpp"
#include "certopt/instances.hpp"

namespace {

using namespace certopt;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt17(*v) : std::string();
}

// Temp file plus rename, so partially written outputs are never observed.
void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp =
      target.parent_path() /
      (target.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
  }
  fs::rename(tmp, target);
}

int thread_cap() {
  if (const char* env = std::getenv("CERTOPT_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string trace_to_csv(const RunResult& result, Algorithm alg,
                         const RunConfig& cfg) {
  std::ostringstream out;
  out << "# algorithm=" << algorithm_name(alg) << " alpha_policy="
      << (result.alpha_from_epsilon ? "from_epsilon" : "explicit")
      << " alpha=" << fmt17(result.alpha_used)
      << " epsilon=" << fmt17(cfg.epsilon) << " seed=" << cfg.seed << "\n";
  out << "iter,phi,psi,cert_gap,pd_gap,wall_ns\n";
  for (const IterationTrace& row : result.trace) {
    out << row.iter << ',' << fmt17(row.phi_at_test) << ','
        << fmt_opt(row.psi_at_dual) << ',' << fmt_opt(row.cert_gap) << ','
        << fmt_opt(row.pd_gap) << ',' << row.wall_ns << "\n";
  }
  return out.str();
}

void print_report(const VerificationReport& report) {
  for (const CheckResult& c : report.checks) {
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.desc
              << " (violation=" << c.violation << ", tol=" << c.tol << ")\n";
  }
  std::cout << "suite " << report.suite << ": "
            << (report.overall() ? "PASS" : "FAIL") << "\n";
}

int cmd_run(const std::string& instance_path, const std::string& alg_name,
            double epsilon, const std::optional<double>& alpha, long max_iters,
            long record_every, std::uint64_t seed, const std::string& out) {
  const Instance instance = load_instance(instance_path);
  const ProblemOracles problem = make_oracles(instance);
  RunConfig cfg;
  cfg.algorithm = parse_algorithm(alg_name);
  cfg.epsilon = epsilon;
  if (alpha) {
    cfg.alpha_policy = AlphaPolicy::kExplicit;
    cfg.alpha = *alpha;
  } else {
    cfg.alpha_policy = AlphaPolicy::kFromEpsilon;
  }
  cfg.max_iters = max_iters;
  cfg.record_every = record_every;
  cfg.seed = seed;

  const RunResult result = run(problem, cfg);
  if (!out.empty()) atomic_write(out, trace_to_csv(result, cfg.algorithm, cfg));

  std::cout << "status: " << status_name(result.status)
            << " iterations: " << result.iterations;
  if (result.final_cert_gap) {
    std::cout << " cert_gap: " << fmt17(*result.final_cert_gap);
  }
  if (result.final_pd_gap) {
    std::cout << " pd_gap: " << fmt17(*result.final_pd_gap);
  }
  std::cout << " alpha: " << fmt17(result.alpha_used) << "\n";
  return result.status == RunStatus::kBudgetExhausted ? 2 : 0;
}

int cmd_verify(const std::string& suite, const std::string& instance_path,
               int iters, double tol, double epsilon, double resolution,
               std::uint64_t seed, const std::string& out) {
  const Instance instance = load_instance(instance_path);
  const ProblemOracles problem = make_oracles(instance);
  VerificationReport report;
  if (suite == "correspondence") {
    report.suite = "correspondence";
    if (!problem.has_f_conj()) {
      throw UnsupportedError(
          "correspondence suite: instance lacks f* support");
    }
    const Vec y0 = problem.initial_point;
    for (const VerificationReport& part :
         {check_correspondence_one_avg(problem, y0, iters, tol),
          check_correspondence_two_avg(problem, y0, true, iters, tol)}) {
      report.checks.insert(report.checks.end(), part.checks.begin(),
                           part.checks.end());
    }
    if (problem.has_bregman_prox()) {
      const VerificationReport part =
          check_correspondence_three_avg(problem, problem.initial_point, iters,
                                         tol);
      report.checks.insert(report.checks.end(), part.checks.begin(),
                           part.checks.end());
    }
  } else if (suite == "rates") {
    report.suite = "rates";
    std::vector<Algorithm> algs = {Algorithm::kMda, Algorithm::kTaa};
    if (problem.has_f_conj()) {
      algs.push_back(Algorithm::kGcg);
      algs.push_back(Algorithm::kAggGcgPrimal);
    }
    if (problem.has_bregman_prox()) algs.push_back(Algorithm::kGem);
    for (Algorithm alg : algs) {
      const VerificationReport part =
          check_rates(problem, alg, problem.initial_point, iters);
      report.checks.insert(report.checks.end(), part.checks.begin(),
                           part.checks.end());
    }
  } else if (suite == "soundness") {
    report = check_soundness(instance, epsilon, resolution);
  } else if (suite == "identities") {
    report = check_identities(problem, 100, seed);
  } else {
    throw std::invalid_argument("unknown suite: " + suite);
  }
  print_report(report);
  if (!out.empty()) atomic_write(out, report_to_json(report));
  return report.overall() ? 0 : 1;
}

int cmd_compare(const std::string& instance_path,
                const std::vector<std::string>& alg_names,
                std::vector<double> epsilons, long max_iters,
                std::uint64_t seed, const std::string& out) {
  if (alg_names.size() < 2) {
    throw std::invalid_argument("compare: need at least two --algorithm");
  }
  if (epsilons.empty()) epsilons = {1e-1, 1e-2, 1e-3};
  const Instance instance = load_instance(instance_path);
  (void)seed;

  // Each column is an annealed sweep: cumulative iterations until the
  // epsilon-certificate at alpha = eps/(2M), tightening down the ladder.
  std::vector<SlopeFit> fits(alg_names.size());
  std::counting_semaphore<64> slots(std::min(64, thread_cap()));
  std::vector<std::future<void>> tasks;
  for (std::size_t a = 0; a < alg_names.size(); ++a) {
    tasks.push_back(std::async(std::launch::async, [&, a]() {
      slots.acquire();
      try {
        fits[a] = complexity_slope(instance, parse_algorithm(alg_names[a]),
                                   epsilons, max_iters);
        slots.release();
      } catch (...) {
        slots.release();
        throw;
      }
    }));
  }
  try {
    for (auto& t : tasks) t.get();
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::vector<double> sorted_eps = fits.empty() ? epsilons : fits[0].epsilons;
  std::ostringstream csv;
  csv << "epsilon";
  for (const std::string& name : alg_names) csv << ',' << name;
  csv << "\n";
  for (std::size_t e = 0; e < sorted_eps.size(); ++e) {
    csv << fmt17(sorted_eps[e]);
    for (std::size_t a = 0; a < alg_names.size(); ++a) {
      csv << ',' << fits[a].iterations[e];
    }
    csv << "\n";
  }
  if (!out.empty()) {
    atomic_write(out, csv.str());
  } else {
    std::cout << csv.str();
  }
  return 0;
}

int cmd_gen_instance(const std::string& kind, int n, int m, double alpha,
                     double lipschitz, double delta, std::uint64_t seed,
                     const std::string& out) {
  InstanceConfig cfg;
  cfg.kind = kind;
  cfg.n = n;
  cfg.m = m;
  cfg.alpha = alpha;
  cfg.lipschitz = lipschitz;
  cfg.delta = delta;
  cfg.seed = seed;
  realize(cfg);  // validates sizes before writing
  const std::string text = instance_config_to_json(cfg);
  if (!out.empty()) {
    atomic_write(out, text);
  } else {
    std::cout << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certopt: primal-dual averaging with accuracy certificates"};
  app.require_subcommand(1);

  std::string instance_path, alg_name, out, suite, kind = "game";
  std::vector<std::string> alg_names;
  std::vector<double> epsilons;
  double epsilon = 1e-3, tol = 1e-8, resolution = 1e-4;
  std::optional<double> alpha;
  long max_iters = 100000, compare_max_iters = 5000000, record_every = 1;
  int iters = 200, n = 2, m = 2;
  double gen_alpha = 1.0, gen_lipschitz = 1.0, gen_delta = 1.0;
  std::uint64_t seed = 0;

  CLI::App* run_cmd = app.add_subcommand("run", "run one algorithm");
  run_cmd->add_option("--instance", instance_path)->required();
  run_cmd->add_option("--algorithm", alg_name)->required();
  run_cmd->add_option("--epsilon", epsilon);
  run_cmd->add_option("--alpha", alpha);
  run_cmd->add_option("--max-iters", max_iters);
  run_cmd->add_option("--record-every", record_every);
  run_cmd->add_option("--seed", seed);
  run_cmd->add_option("--out", out);

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "run a verification suite");
  verify_cmd->add_option("--suite", suite)->required();
  verify_cmd->add_option("--instance", instance_path)->required();
  verify_cmd->add_option("--iters", iters);
  verify_cmd->add_option("--tol", tol);
  verify_cmd->add_option("--epsilon", epsilon);
  verify_cmd->add_option("--resolution", resolution);
  verify_cmd->add_option("--seed", seed);
  verify_cmd->add_option("--out", out);

  CLI::App* compare_cmd =
      app.add_subcommand("compare", "iterations-to-epsilon sweep");
  compare_cmd->add_option("--instance", instance_path)->required();
  compare_cmd->add_option("--algorithm", alg_names);
  compare_cmd->add_option("--epsilon", epsilons);
  compare_cmd->add_option("--max-iters", compare_max_iters);
  compare_cmd->add_option("--seed", seed);
  compare_cmd->add_option("--out", out);

  CLI::App* gen_cmd =
      app.add_subcommand("gen-instance", "write a seeded instance file");
  gen_cmd->add_option("--kind", kind);
  gen_cmd->add_option("--n", n);
  gen_cmd->add_option("--m", m);
  gen_cmd->add_option("--alpha", gen_alpha);
  gen_cmd->add_option("--L", gen_lipschitz);
  gen_cmd->add_option("--delta", gen_delta);
  gen_cmd->add_option("--seed", seed);
  gen_cmd->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) {
      return cmd_run(instance_path, alg_name, epsilon, alpha, max_iters,
                     record_every, seed, out);
    }
    if (*verify_cmd) {
      return cmd_verify(suite, instance_path, iters, tol, epsilon, resolution,
                        seed, out);
    }
    if (*compare_cmd) {
      return cmd_compare(instance_path, alg_names, epsilons, compare_max_iters,
                         seed, out);
    }
    if (*gen_cmd) {
      return cmd_gen_instance(kind, n, m, gen_alpha, gen_lipschitz, gen_delta,
                              seed, out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
