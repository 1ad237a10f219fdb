#ifndef CERTOPT_INSTANCES_HPP_
#define CERTOPT_INSTANCES_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include <Eigen/Core>

#include "certopt/oracles.hpp"

namespace certopt {

/// Entropically smoothed zero-sum matrix game over the simplex. The payoff
/// matrix is rescaled to unit spectral norm at construction; the primal
/// regularizer is the entropy translated by log n so it is nonnegative with
/// maximum log n over the simplex.
struct MatrixGameInstance {
  Mat payoff;          // n x n, unit spectral norm
  double lipschitz;    // weight 1/L on the dual entropy
  double alpha;        // primal entropy weight
  std::uint64_t seed = 0;
};

/// Smoothed Fisher market in log prices: exponential revenue term plus
/// per-buyer entropically smoothed utilities, box-constrained prices, and a
/// quadratic penalty on deviation from a benchmark log price.
struct FisherMarketInstance {
  Mat valuations;  // m buyers x n goods, positive
  Vec budgets;     // m, positive
  double delta;    // entropic smoothing
  Vec mu_lo, mu_hi, mu_ref;
  double alpha;
  std::uint64_t seed = 0;
};

/// Desk-scale testbed: quadratic smooth part over a box with quadratic
/// regularizer; every oracle has a closed form.
struct QuadBoxToy {
  int n = 1;
  double alpha = 1.0;
  double lipschitz = 1.0;
  Vec lo, hi;
};

using Instance =
    std::variant<MatrixGameInstance, FisherMarketInstance, QuadBoxToy>;

MatrixGameInstance make_game(int n, std::uint64_t seed, double alpha = 1.0,
                             double lipschitz = 1.0);
FisherMarketInstance make_fisher(int m, int n, std::uint64_t seed,
                                 double alpha = 1.0, double delta = 1.0);
QuadBoxToy make_quadbox(int n, double alpha = 1.0, double lipschitz = 1.0);

/// Rescales a payoff matrix to unit spectral norm (no-op on a zero matrix).
Mat normalize_payoff(Mat payoff);

/// Conservative smoothness bound for the Fisher smooth part over its box:
/// n * exp(max mu_hi) + (sum of budgets) / delta.
double fisher_smoothness(const FisherMarketInstance& inst);

ProblemOracles game_oracles(const MatrixGameInstance& inst);
ProblemOracles fisher_oracles(const FisherMarketInstance& inst);
ProblemOracles quadbox_oracles(const QuadBoxToy& inst);
ProblemOracles make_oracles(const Instance& inst);

Instance with_alpha(Instance inst, double alpha);
double instance_alpha(const Instance& inst);
std::string instance_kind(const Instance& inst);

/// Feasible region of an instance, for grid search.
struct DomainSpec {
  enum class Kind { kSimplex, kBox };
  Kind kind = Kind::kBox;
  int n = 0;
  Vec lo, hi;  // box only

  static DomainSpec Simplex(int n);
  static DomainSpec Box(Vec lo, Vec hi);
};

DomainSpec domain_spec(const Instance& inst);

struct BruteForceResult {
  Vec argmin;
  double min_value = 0.0;
  // Documented upper estimate of the grid error: (curvature/2)*resolution^2.
  double error_bound = 0.0;
};

/// Exhaustive mesh search over the domain at the given spacing. Reference
/// oracle for frozen expected values and soundness checks; dimension <= 3.
/// Deterministic regardless of the number of worker threads.
BruteForceResult brute_force_min(const std::function<double(const Vec&)>& f,
                                 const DomainSpec& domain, double resolution,
                                 double curvature_bound, int threads = 0);

/// Convenience overload minimizing the regularized objective of a problem.
BruteForceResult brute_force_min(const ProblemOracles& problem,
                                 const DomainSpec& domain, double resolution,
                                 int threads = 0);

/// What an instance JSON file holds: the generator configuration, with
/// optional explicit data overriding the seeded generators.
struct InstanceConfig {
  std::string kind;  // "game" | "fisher" | "quadbox"
  int n = 2;
  int m = 2;
  double alpha = 1.0;
  double lipschitz = 1.0;
  double delta = 1.0;
  std::uint64_t seed = 0;
  std::optional<Mat> payoff;
  std::optional<Mat> valuations;
  std::optional<Vec> budgets;
  std::optional<Vec> mu_lo, mu_hi, mu_ref;
  std::optional<Vec> box_lo, box_hi;
};

InstanceConfig parse_instance_config(const std::string& json_text);
std::string instance_config_to_json(const InstanceConfig& config);
Instance realize(const InstanceConfig& config);
Instance load_instance(const std::string& path);

// Numerically stable helpers shared by the instances.
double log_sum_exp(const Vec& v);
Vec softmax(const Vec& v);
/// sum_i q_i log q_i with the 0*log(0)=0 convention; nonpositive entries
/// contribute zero.
double neg_entropy(const Vec& q);

}  // namespace certopt

#endif  // CERTOPT_INSTANCES_HPP_
