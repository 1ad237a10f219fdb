#ifndef CERTOPT_ORACLES_HPP_
#define CERTOPT_ORACLES_HPP_

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace certopt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Thrown when a point fails the instance's domain membership test.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an instance lacks a capability (conjugate evaluator,
/// Bregman prox) that an operation or algorithm requires.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Default tolerance for domain membership tests (simplex: |sum-1| and
// componentwise nonnegativity; box: componentwise slack).
inline constexpr double kDomainTol = 1e-9;

/// Result of a generalized linear minimization oracle call:
/// the minimizer and minimum value of  <v,x> + h(x) + alpha*w(x).
struct GlmoResult {
  Vec argmin;
  double min_value = 0.0;
};

/// Smooth convex part of the objective with Lipschitz-continuous gradient.
struct SmoothOracle {
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> grad;
  double lipschitz = 0.0;  // smoothness constant w.r.t. the instance norm
};

/// Composite (regularized) part h(x) + alpha*w(x) together with its exact
/// linear minimization oracle over dom h.
struct CompositeOracle {
  double alpha = 0.0;                          // regularization weight
  std::function<GlmoResult(const Vec&)> glmo;  // min <v,x> + h(x) + alpha*w(x)
  std::function<double(const Vec&)> eval_h_alpha;  // h(x)+alpha*w(x) on dom h
  std::function<bool(const Vec&, double)> in_domain;
  double w_bound = 0.0;  // M = max of w over dom h
};

/// Conjugate-side callbacks. Members may be empty when the instance has no
/// usable closed form; dual-side algorithms and metrics check availability.
struct ConjugateOracle {
  std::function<double(const Vec&)> eval_f_conj;          // f*(z), optional
  std::function<Vec(const Vec&)> grad_h_alpha_conj;       // z -> grad (h^a)*(-z)
  std::function<double(const Vec&)> eval_h_alpha_conj;    // (h^a)*(-z), optional
  std::function<GlmoResult(const Vec&)> glmo_f_conj;      // min <v,g> + f*(g), optional
  // Solves the extrapolated-gradient subproblem
  //   argmin_g  a*(<-vhat,g> + f*(g)) + (tau/alpha) * D(g || g_prev)
  // where D is the Bregman divergence of L*f* linearized at
  // fstar_subgrad_prev, an element of the subdifferential of f* at g_prev.
  std::function<Vec(const Vec& vhat, const Vec& g_prev,
                    const Vec& fstar_subgrad_prev, double a, double tau,
                    double alpha)>
      bregman_prox;  // optional
  // Upper bound on max_g D(g || g0) over dom f*, when finite. Optional.
  std::function<double(const Vec& g0)> bregman_radius;
};

/// Norm pairing used for smoothness/strong-convexity constants.
enum class NormKind { kEuclidean, kEll1 };

/// Immutable bundle describing one regularized composite problem.
/// Safe to share read-only across concurrent runs; all evaluators are pure.
struct ProblemOracles {
  SmoothOracle smooth;
  CompositeOracle composite;
  ConjugateOracle conjugate;
  NormKind norm_kind = NormKind::kEuclidean;
  int dim = 0;
  Vec initial_point;  // a canonical point of dom h
  // Rebuilds the same instance with a different regularization weight.
  std::function<ProblemOracles(double)> rebind_alpha;
  // Samplers for property tests: a random dom h point, and (if the dual side
  // is supported) a random dom f* point.
  std::function<Vec(Rng&)> sample_primal;
  std::function<Vec(Rng&)> sample_dual;

  bool has_f_conj() const { return static_cast<bool>(conjugate.eval_f_conj); }
  bool has_bregman_prox() const {
    return static_cast<bool>(conjugate.bregman_prox);
  }
};

/// Norm of the instance's primal pairing (ell2 or ell1).
double primal_norm(const ProblemOracles& problem, const Vec& x);
/// The corresponding dual norm (ell2 or ell-infinity).
double dual_norm(const ProblemOracles& problem, const Vec& z);

/// Regularized objective f(x) + h(x) + alpha*w(x). Throws DomainError when
/// x fails the membership test beyond tolerance.
double phi_alpha(const ProblemOracles& problem, const Vec& x);

/// Dual objective (h^a)*(-z) + f*(z), with the first term computed through
/// the GLMO. Throws UnsupportedError when the instance has no f* evaluator.
double psi_alpha(const ProblemOracles& problem, const Vec& z);

/// Primal-dual gap phi_alpha(x) + psi_alpha(z); nonnegative up to roundoff.
double pd_gap(const ProblemOracles& problem, const Vec& x, const Vec& z);

}  // namespace certopt

#endif  // CERTOPT_ORACLES_HPP_
