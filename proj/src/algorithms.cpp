#include "certopt/algorithms.hpp"

#include <cmath>

namespace certopt {

namespace {

void require_positive(double alpha, double lipschitz, const char* who) {
  if (!(alpha > 0.0) || !(lipschitz > 0.0)) {
    throw std::invalid_argument(std::string(who) +
                                ": alpha and L must be positive");
  }
}

double dual_cut_value(const ProblemOracles& problem, const Vec& z) {
  // (h^alpha)*(-z), via the GLMO.
  return -problem.composite.glmo(z).min_value;
}

}  // namespace

double schedule_eta(double alpha, double lipschitz) {
  require_positive(alpha, lipschitz, "schedule_eta");
  return alpha / (lipschitz + alpha);
}

double schedule_lambda(double alpha, double lipschitz) {
  require_positive(alpha, lipschitz, "schedule_lambda");
  return 2.0 * alpha /
         (alpha + std::sqrt(alpha * alpha + 4.0 * lipschitz * alpha));
}

MdaState mda_init(const ProblemOracles& problem, const Vec& y0) {
  MdaState state;
  state.eta = schedule_eta(problem.composite.alpha, problem.smooth.lipschitz);
  state.model = acp_init(y0, problem.smooth.eval(y0), problem.smooth.grad(y0));
  state.s = state.model.s_agg;
  state.x = problem.composite.glmo(state.s).argmin;
  state.y = y0;
  return state;
}

MdaState mda_step(MdaState state, const ProblemOracles& problem) {
  const double eta = state.eta;
  const Vec grad_x = problem.smooth.grad(state.x);
  state.model = acp_update(std::move(state.model), eta, state.x,
                           problem.smooth.eval(state.x), grad_x);
  state.s = state.model.s_agg;
  state.x = problem.composite.glmo(state.s).argmin;
  state.y = (1.0 - eta) * state.y + eta * state.x;
  return state;
}

GcgState gcg_init(const ProblemOracles& problem, const Vec& z0) {
  GcgState state;
  state.eta = schedule_eta(problem.composite.alpha, problem.smooth.lipschitz);
  state.z = z0;
  state.ytilde = problem.conjugate.grad_h_alpha_conj(z0);
  state.zbar = problem.smooth.grad(state.ytilde);
  return state;
}

GcgState gcg_step(GcgState state, const ProblemOracles& problem) {
  const double eta = state.eta;
  const Vec x = problem.conjugate.grad_h_alpha_conj(state.z);
  state.zbar = problem.smooth.grad(x);  // closed form of the inner argmin
  state.ytilde = (1.0 - eta) * state.ytilde + eta * x;
  state.z = (1.0 - eta) * state.z + eta * state.zbar;
  return state;
}

AggGcgPrimalState agg_gcg_primal_init(const ProblemOracles& problem,
                                      const Vec& y0, const Vec& s0) {
  AggGcgPrimalState state;
  state.eta = schedule_eta(problem.composite.alpha, problem.smooth.lipschitz);
  state.y = y0;
  state.s = s0;
  state.x = problem.composite.glmo(s0).argmin;
  return state;
}

AggGcgPrimalState agg_gcg_primal_step(AggGcgPrimalState state,
                                      const ProblemOracles& problem) {
  const double eta = state.eta;
  state.x = problem.composite.glmo(state.s).argmin;
  const Vec grad_y_old = problem.smooth.grad(state.y);
  state.y = (1.0 - eta) * state.y + eta * state.x;
  state.s = (1.0 - eta) * state.s + eta * grad_y_old;
  return state;
}

AggGcgDualState agg_gcg_dual_init(const ProblemOracles& problem, const Vec& z0,
                                  const Vec& v0) {
  AggGcgDualState state;
  state.eta = schedule_eta(problem.composite.alpha, problem.smooth.lipschitz);
  state.z = z0;
  state.v = v0;
  state.zbar = problem.smooth.grad(v0);
  return state;
}

AggGcgDualState agg_gcg_dual_step(AggGcgDualState state,
                                  const ProblemOracles& problem) {
  const double eta = state.eta;
  state.zbar = problem.smooth.grad(state.v);  // closed form of the inner argmin
  const Vec response_old_z = problem.conjugate.grad_h_alpha_conj(state.z);
  state.z = (1.0 - eta) * state.z + eta * state.zbar;
  state.v = (1.0 - eta) * state.v + eta * response_old_z;
  return state;
}

TaaState taa_init(const ProblemOracles& problem, const Vec& y0) {
  TaaState state;
  state.lambda =
      schedule_lambda(problem.composite.alpha, problem.smooth.lipschitz);
  state.model = acp_init(y0, problem.smooth.eval(y0), problem.smooth.grad(y0));
  state.s = state.model.s_agg;
  state.x = problem.composite.glmo(state.s).argmin;
  state.xtilde = y0;
  state.y = y0;
  return state;
}

TaaState taa_step(TaaState state, const ProblemOracles& problem) {
  const double lambda = state.lambda;
  state.xtilde = (1.0 - lambda) * state.y + lambda * state.x;
  state.model =
      acp_update(std::move(state.model), lambda, state.xtilde,
                 problem.smooth.eval(state.xtilde),
                 problem.smooth.grad(state.xtilde));
  state.s = state.model.s_agg;
  state.x = problem.composite.glmo(state.s).argmin;
  state.y = (1.0 - lambda) * state.y + lambda * state.x;
  return state;
}

GemState gem_init(const ProblemOracles& problem, const Vec& g0,
                  const Vec& fstar_subgrad0) {
  if (!problem.has_bregman_prox()) {
    throw UnsupportedError("gem: instance lacks a Bregman prox for L*f*");
  }
  if (!problem.has_f_conj()) {
    throw UnsupportedError("gem: instance lacks f* support");
  }
  GemState state;
  state.g = g0;
  state.z = g0;
  state.v = problem.conjugate.grad_h_alpha_conj(g0);
  state.v_prev = state.v;
  state.vhat = state.v;
  state.fstar_subgrad = fstar_subgrad0;
  state.tau = problem.composite.alpha / problem.smooth.lipschitz;
  state.a_prev = 0.0;
  state.big_a = 1.0;
  state.dual_model = acp_init(g0, dual_cut_value(problem, g0), -state.v);
  return state;
}

GemState gem_step(GemState state, const ProblemOracles& problem) {
  const double alpha = problem.composite.alpha;
  const double lipschitz = problem.smooth.lipschitz;

  const double a = (state.tau + std::sqrt(state.tau * state.tau +
                                          4.0 * state.tau * state.big_a)) /
                   2.0;
  const double tau_next = state.tau + alpha * a / lipschitz;
  const double big_a_next = state.big_a + a;

  state.vhat = state.v + (state.a_prev / a) * (state.v - state.v_prev);
  const Vec g_next = problem.conjugate.bregman_prox(
      state.vhat, state.g, state.fstar_subgrad, a, state.tau, alpha);
  // Prox optimality pins the next f* subgradient.
  state.fstar_subgrad =
      (state.big_a * state.fstar_subgrad + a * state.vhat) / big_a_next;

  state.z = (state.big_a / big_a_next) * state.z + (a / big_a_next) * g_next;
  state.g = g_next;
  state.v_prev = state.v;
  state.v = problem.conjugate.grad_h_alpha_conj(state.z);
  state.last_cut_weight = a / big_a_next;
  state.dual_model =
      acp_update(std::move(state.dual_model), state.last_cut_weight, state.z,
                 dual_cut_value(problem, state.z), -state.v);

  state.a_prev = a;
  state.tau = tau_next;
  state.big_a = big_a_next;
  return state;
}

}  // namespace certopt
