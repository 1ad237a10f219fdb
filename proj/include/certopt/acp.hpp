#ifndef CERTOPT_ACP_HPP_
#define CERTOPT_ACP_HPP_

#include <cmath>
#include <limits>

#include "certopt/oracles.hpp"

namespace certopt {

/// Scalar accumulator with Neumaier error compensation. The aggregated
/// affine constant of the cutting-plane model is a long product-sum chain;
/// compensation keeps certificate gaps meaningful near the 1e-10 scale.
class CompensatedValue {
 public:
  CompensatedValue() = default;
  explicit CompensatedValue(double v) : sum_(v) {}

  void scale(double s) {
    sum_ *= s;
    err_ *= s;
  }

  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      err_ += (sum_ - t) + x;
    } else {
      err_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + err_; }

 private:
  double sum_ = 0.0;
  double err_ = 0.0;
};

/// Running aggregated cutting-plane model
///   Gamma(x) = chi + <s_agg, x> + h^alpha(x),
/// where s_agg is the convex combination of recorded gradients and chi the
/// identically weighted combination of the affine constants
/// value(x_j) - <grad(x_j), x_j>. The same state serves the dual model when
/// driven with dual-side linearizations and the f*-side GLMO.
struct AcpAggregator {
  Vec s_agg;
  CompensatedValue chi;
  int num_cuts = 0;
};

/// Model with a single cut at y0.
AcpAggregator acp_init(const Vec& y0, double f_y0, const Vec& grad_y0);

/// Mixes a new cut at x_j into the model with weight zeta in [0,1].
AcpAggregator acp_update(AcpAggregator model, double zeta, const Vec& x_j,
                         double f_xj, const Vec& grad_xj);

struct AcpMinimum {
  Vec argmin;
  double min_value = 0.0;
};

/// Exact minimizer and minimum of the model: the composite-side GLMO applied
/// to the aggregated gradient, shifted by chi.
AcpMinimum acp_min(const AcpAggregator& model,
                   const std::function<GlmoResult(const Vec&)>& glmo);
AcpMinimum acp_min(const AcpAggregator& model, const ProblemOracles& problem);

/// Certificate pairing a test point with a model; gap = phi_alpha(u) - min.
struct Certificate {
  Vec test_point;
  AcpAggregator model;
  double gap = 0.0;
  double epsilon_target = std::numeric_limits<double>::quiet_NaN();
};

Certificate certificate_gap(
    const AcpAggregator& model, const ProblemOracles& problem, const Vec& u,
    double epsilon_target = std::numeric_limits<double>::quiet_NaN());

}  // namespace certopt

#endif  // CERTOPT_ACP_HPP_
