#ifndef CERTOPT_HARNESS_HPP_
#define CERTOPT_HARNESS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "certopt/algorithms.hpp"
#include "certopt/instances.hpp"
#include "certopt/oracles.hpp"

namespace certopt {

enum class Algorithm {
  kMda,
  kGcg,
  kAggGcgPrimal,
  kAggGcgDual,
  kTaa,
  kGem,
};

std::string algorithm_name(Algorithm alg);
Algorithm parse_algorithm(const std::string& name);

enum class AlphaPolicy { kExplicit, kFromEpsilon };

struct RunConfig {
  Algorithm algorithm = Algorithm::kMda;
  double epsilon = 1e-3;
  AlphaPolicy alpha_policy = AlphaPolicy::kFromEpsilon;
  double alpha = 1.0;  // used when alpha_policy is kExplicit
  long max_iters = 100000;
  long record_every = 1;
  std::uint64_t seed = 0;
};

enum class RunStatus { kCertified, kPdConverged, kBudgetExhausted };
std::string status_name(RunStatus status);

/// Thrown by sweeps that must reach a certificate but run out of budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One recorded metrics row. Dual-side fields are absent when the instance
/// has no f*; the certificate gap is a diagnostic (never a stopping rule)
/// for the two-average method.
struct IterationTrace {
  long iter = 0;
  double phi_at_test = 0.0;
  std::optional<double> psi_at_dual;
  std::optional<double> cert_gap;
  std::optional<double> pd_gap;
  long long wall_ns = 0;
};

struct RunResult {
  std::vector<IterationTrace> trace;
  RunStatus status = RunStatus::kBudgetExhausted;
  long iterations = 0;
  Vec output_point;
  std::optional<double> final_cert_gap;
  std::optional<double> final_pd_gap;
  double alpha_used = 0.0;
  bool alpha_from_epsilon = false;
};

/// Drives one algorithm to an epsilon-certificate (or, for the two-average
/// method, to a small primal-dual gap), up to the iteration budget.
RunResult run(const ProblemOracles& problem, const RunConfig& config);

struct CheckResult {
  std::string desc;
  double violation = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct VerificationReport {
  std::string suite;
  std::vector<CheckResult> checks;

  void add(std::string desc, double violation, double tol);
  bool overall() const;  // pass iff every check passes
};

std::string report_to_json(const VerificationReport& report);

/// Runs the one-average primal and dual methods side by side from
/// z0 = grad f(y0) (optionally perturbed in its first coordinate as a
/// negative control) and checks the three iterate identities.
VerificationReport check_correspondence_one_avg(const ProblemOracles& problem,
                                                const Vec& y0, int k_max,
                                                double tol,
                                                double z0_perturb = 0.0);

/// Two-average self-duality: primal from (y0, s0 = grad f(y0)), dual from
/// (z0, v0 = y0) with z0 = s0 (or perturbed when z0_equal_s0 is false).
VerificationReport check_correspondence_two_avg(const ProblemOracles& problem,
                                                const Vec& y0,
                                                bool z0_equal_s0, int k_max,
                                                double tol);

/// Three-average / extrapolated-gradient correspondence from
/// s0 = z0 = g0 = grad f(y0). lambda_scale != 1 mismatches the primal step
/// weight as a negative control.
VerificationReport check_correspondence_three_avg(
    const ProblemOracles& problem, const Vec& y0, int k_max, double tol,
    double lambda_scale = 1.0);

/// Per-algorithm contraction envelopes and step inequalities, with slack
/// 1e-9 * (1 + |bound|). For the extrapolation method this also covers the
/// scalar-schedule identities up to scalar_k_max.
VerificationReport check_rates(const ProblemOracles& problem, Algorithm alg,
                               const Vec& y0, int k_max,
                               int scalar_k_max = 1000);

/// End-to-end soundness: with alpha = epsilon/(2M), certified points of the
/// primal certificate-bearing methods are epsilon-optimal for the
/// unregularized objective against the grid reference minimum.
VerificationReport check_soundness(const Instance& instance, double epsilon,
                                   double resolution);

/// Oracle identity suite: conjugate-pair equalities, GLMO agreement,
/// finite-difference gradients, weak duality, model minorization and strong
/// convexity, on random samples.
VerificationReport check_identities(const ProblemOracles& problem, int samples,
                                    std::uint64_t seed);

struct SlopeFit {
  double slope = 0.0;
  std::vector<double> epsilons;
  std::vector<long> iterations;
};

/// Iterations-to-certificate across an epsilon sweep with alpha =
/// epsilon/(2M), plus the fitted log-log slope of iterations against
/// 1/epsilon.
SlopeFit complexity_slope(const Instance& instance, Algorithm alg,
                          const std::vector<double>& epsilons, long max_iters);

}  // namespace certopt

#endif  // CERTOPT_HARNESS_HPP_
