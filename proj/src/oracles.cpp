#include "certopt/oracles.hpp"

namespace certopt {

double primal_norm(const ProblemOracles& problem, const Vec& x) {
  return problem.norm_kind == NormKind::kEll1 ? x.lpNorm<1>() : x.norm();
}

double dual_norm(const ProblemOracles& problem, const Vec& z) {
  return problem.norm_kind == NormKind::kEll1 ? z.lpNorm<Eigen::Infinity>()
                                              : z.norm();
}

double phi_alpha(const ProblemOracles& problem, const Vec& x) {
  if (!problem.composite.in_domain(x, kDomainTol)) {
    throw DomainError("phi_alpha: point outside dom h beyond tolerance");
  }
  return problem.smooth.eval(x) + problem.composite.eval_h_alpha(x);
}

double psi_alpha(const ProblemOracles& problem, const Vec& z) {
  if (!problem.has_f_conj()) {
    throw UnsupportedError("psi_alpha: instance lacks f* support");
  }
  const double h_conj = -problem.composite.glmo(z).min_value;
  return h_conj + problem.conjugate.eval_f_conj(z);
}

double pd_gap(const ProblemOracles& problem, const Vec& x, const Vec& z) {
  return phi_alpha(problem, x) + psi_alpha(problem, z);
}

}  // namespace certopt
