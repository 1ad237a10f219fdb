#include "certopt/acp.hpp"

namespace certopt {

AcpAggregator acp_init(const Vec& y0, double f_y0, const Vec& grad_y0) {
  AcpAggregator model;
  model.s_agg = grad_y0;
  model.chi = CompensatedValue(f_y0 - grad_y0.dot(y0));
  model.num_cuts = 1;
  return model;
}

AcpAggregator acp_update(AcpAggregator model, double zeta, const Vec& x_j,
                         double f_xj, const Vec& grad_xj) {
  if (!(zeta >= 0.0 && zeta <= 1.0)) {
    throw std::invalid_argument("acp_update: zeta outside [0,1]");
  }
  model.s_agg = (1.0 - zeta) * model.s_agg + zeta * grad_xj;
  model.chi.scale(1.0 - zeta);
  model.chi.add(zeta * (f_xj - grad_xj.dot(x_j)));
  ++model.num_cuts;
  return model;
}

AcpMinimum acp_min(const AcpAggregator& model,
                   const std::function<GlmoResult(const Vec&)>& glmo) {
  GlmoResult r = glmo(model.s_agg);
  return {std::move(r.argmin), model.chi.value() + r.min_value};
}

AcpMinimum acp_min(const AcpAggregator& model, const ProblemOracles& problem) {
  return acp_min(model, problem.composite.glmo);
}

Certificate certificate_gap(const AcpAggregator& model,
                            const ProblemOracles& problem, const Vec& u,
                            double epsilon_target) {
  Certificate cert;
  cert.test_point = u;
  cert.model = model;
  cert.gap = phi_alpha(problem, u) - acp_min(model, problem).min_value;
  cert.epsilon_target = epsilon_target;
  return cert;
}

}  // namespace certopt
