#ifndef CERTOPT_ALGORITHMS_HPP_
#define CERTOPT_ALGORITHMS_HPP_

#include "certopt/acp.hpp"
#include "certopt/oracles.hpp"

namespace certopt {

/// One-average step weight alpha/(L+alpha).
double schedule_eta(double alpha, double lipschitz);

/// Three-average step weight 2*alpha/(alpha + sqrt(alpha^2 + 4*L*alpha)).
/// Satisfies L/alpha = (1-lambda)/lambda^2.
double schedule_lambda(double alpha, double lipschitz);

/// Modified dual averaging. The dual average s doubles as the aggregated
/// model gradient; x is the GLMO response and y the smoothed test sequence.
struct MdaState {
  Vec x;
  Vec s;
  Vec y;
  double eta = 0.0;
  AcpAggregator model;
};

MdaState mda_init(const ProblemOracles& problem, const Vec& y0);
MdaState mda_step(MdaState state, const ProblemOracles& problem);

/// Generalized conditional gradient on the dual. z is the averaged dual
/// iterate, zbar the last inner response, ytilde the primal average whose
/// gap contracts alongside psi.
struct GcgState {
  Vec z;
  Vec zbar;
  Vec ytilde;
  double eta = 0.0;
};

GcgState gcg_init(const ProblemOracles& problem, const Vec& z0);
GcgState gcg_step(GcgState state, const ProblemOracles& problem);

/// Two-average method, primal form. Updates are lagged: x_{k+1} comes from
/// s_k, then y advances with x_{k+1} while s mixes in the gradient at the
/// pre-update y.
struct AggGcgPrimalState {
  Vec y;
  Vec s;
  Vec x;  // most recent GLMO output
  double eta = 0.0;
};

AggGcgPrimalState agg_gcg_primal_init(const ProblemOracles& problem,
                                      const Vec& y0, const Vec& s0);
AggGcgPrimalState agg_gcg_primal_step(AggGcgPrimalState state,
                                      const ProblemOracles& problem);

/// Two-average method, dual form; mirror image of the primal variant.
struct AggGcgDualState {
  Vec z;
  Vec v;
  Vec zbar;  // most recent inner response
  double eta = 0.0;
};

AggGcgDualState agg_gcg_dual_init(const ProblemOracles& problem, const Vec& z0,
                                  const Vec& v0);
AggGcgDualState agg_gcg_dual_step(AggGcgDualState state,
                                  const ProblemOracles& problem);

/// Three-average accelerated method. xtilde is the lookahead linearization
/// point; the model aggregates cuts at the xtilde sequence with weight
/// lambda.
struct TaaState {
  Vec y;
  Vec x;
  Vec xtilde;
  Vec s;
  double lambda = 0.0;
  AcpAggregator model;
};

TaaState taa_init(const ProblemOracles& problem, const Vec& y0);
TaaState taa_step(TaaState state, const ProblemOracles& problem);

/// Gradient extrapolation method on the dual. The scalar schedule satisfies
/// A*alpha = tau*L and a^2 = tau*A_next at every step. fstar_subgrad threads
/// the subgradient of f* at g used to linearize the Bregman term; it is
/// advanced by the prox optimality identity
///   A_next * subgrad_next = A * subgrad + a * vhat.
struct GemState {
  Vec g;
  Vec z;
  Vec v;
  Vec v_prev;
  Vec vhat;
  Vec fstar_subgrad;
  double tau = 0.0;
  double a_prev = 0.0;
  double big_a = 1.0;
  double last_cut_weight = 0.0;  // a_k / A_{k+1} of the step just taken
  AcpAggregator dual_model;
};

GemState gem_init(const ProblemOracles& problem, const Vec& g0,
                  const Vec& fstar_subgrad0);
GemState gem_step(GemState state, const ProblemOracles& problem);

}  // namespace certopt

#endif  // CERTOPT_ALGORITHMS_HPP_
