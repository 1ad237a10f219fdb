#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "certopt/acp.hpp"
#include "certopt/algorithms.hpp"
#include "certopt/instances.hpp"
#include "test_support.hpp"

using namespace certopt;
using namespace certopt_test;

namespace {
const double kLog2 = std::log(2.0);
}

TEST_CASE("acp_init seeds the model with one cut") {
  // quadbox at y0 = 1: f(1) = 0.5, grad = 1.
  AcpAggregator m = acp_init(vec1(1.0), 0.5, vec1(1.0));
  CHECK(m.s_agg[0] == doctest::Approx(1.0));
  CHECK(m.chi.value() == doctest::Approx(-0.5));
  CHECK(m.num_cuts == 1);

  m = acp_init(vec1(0.0), 0.0, vec1(0.0));
  CHECK(m.s_agg[0] == doctest::Approx(0.0));
  CHECK(m.chi.value() == doctest::Approx(0.0));

  const ProblemOracles game = game_oracles(identity_game2());
  const Vec u = vec2(0.5, 0.5);
  m = acp_init(u, game.smooth.eval(u), game.smooth.grad(u));
  CHECK((m.s_agg - vec2(0.5, 0.5)).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK(m.chi.value() == doctest::Approx(kLog2).epsilon(1e-12));
}

TEST_CASE("acp_update degenerate weights and hand example") {
  AcpAggregator base = acp_init(vec1(1.0), 0.5, vec1(1.0));

  AcpAggregator same = acp_update(base, 0.0, vec1(-1.0), 0.5, vec1(-1.0));
  CHECK(same.s_agg[0] == doctest::Approx(base.s_agg[0]));
  CHECK(same.chi.value() == doctest::Approx(base.chi.value()));
  CHECK(same.num_cuts == 2);

  AcpAggregator single = acp_update(base, 1.0, vec1(-1.0), 0.5, vec1(-1.0));
  CHECK(single.s_agg[0] == doctest::Approx(-1.0));
  CHECK(single.chi.value() == doctest::Approx(-0.5));

  AcpAggregator half = acp_update(base, 0.5, vec1(-1.0), 0.5, vec1(-1.0));
  CHECK(half.s_agg[0] == doctest::Approx(0.0));
  CHECK(half.chi.value() == doctest::Approx(-0.5));

  CHECK_THROWS_AS(acp_update(base, 1.5, vec1(0.0), 0.0, vec1(0.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(acp_update(base, -0.1, vec1(0.0), 0.0, vec1(0.0)),
                  std::invalid_argument);
}

TEST_CASE("acp_min closed forms") {
  const ProblemOracles box = quadbox_oracles(quadbox1());
  AcpAggregator m = acp_init(vec1(1.0), 0.5, vec1(1.0));
  m = acp_update(m, 0.5, vec1(-1.0), 0.5, vec1(-1.0));  // s=0, chi=-0.5
  const AcpMinimum r = acp_min(m, box);
  CHECK(r.argmin[0] == doctest::Approx(0.0));
  CHECK(r.min_value == doctest::Approx(-0.5));

  // Single cut at the interior optimum is exact.
  AcpAggregator at_opt = acp_init(vec1(0.0), 0.0, vec1(0.0));
  CHECK(acp_min(at_opt, box).min_value ==
        doctest::Approx(phi_alpha(box, vec1(0.0))));
}

TEST_CASE("acp_min on the identity game agrees with the grid minimum") {
  const ProblemOracles game = game_oracles(identity_game2());
  const Vec u = vec2(0.5, 0.5);
  const AcpAggregator m = acp_init(u, game.smooth.eval(u), game.smooth.grad(u));
  const AcpMinimum r = acp_min(m, game);
  CHECK((r.argmin - u).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK(r.min_value == doctest::Approx(0.5 + kLog2).epsilon(1e-12));
  // Uniform is optimal for the symmetric game, so the model is tight there.
  const BruteForceResult grid = brute_force_min(game, DomainSpec::Simplex(2), 1e-4);
  CHECK(r.min_value <= grid.min_value + grid.error_bound + 1e-9);
}

TEST_CASE("certificate gap is zero for a tight affine model") {
  // Hand-assembled affine smooth part over the unit box.
  ProblemOracles p = quadbox_oracles(quadbox1());
  p.smooth.eval = [](const Vec& x) { return 2.0 * x[0]; };
  p.smooth.grad = [](const Vec&) { return vec1(2.0); };
  const AcpAggregator m = acp_init(vec1(0.3), 0.6, vec1(2.0));
  const AcpMinimum mn = acp_min(m, p);
  const Certificate cert = certificate_gap(m, p, mn.argmin);
  CHECK(cert.gap == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("certificate gap contracts along a one-average run") {
  const ProblemOracles box = quadbox_oracles(quadbox1());
  MdaState st = mda_init(box, vec1(1.0));
  double t0 = certificate_gap(st.model, box, st.y).gap;
  double prev = t0;
  for (int k = 1; k <= 8; ++k) {
    st = mda_step(std::move(st), box);
    const double t = certificate_gap(st.model, box, st.y).gap;
    CHECK(t <= 0.5 * prev + 1e-12);  // eta = 1/2 here
    CHECK(t <= t0 * std::pow(0.5, k) * (1 + 1e-9));
    prev = t;
  }
}

TEST_CASE("model minorizes phi and is alpha-strongly convex") {
  const ProblemOracles game = game_oracles(make_game(4, 11, 0.3));
  MdaState st = mda_init(game, game.initial_point);
  for (int k = 0; k < 6; ++k) st = mda_step(std::move(st), game);
  const AcpMinimum mn = acp_min(st.model, game);
  Rng rng(13);
  for (int s = 0; s < 100; ++s) {
    const Vec x = game.sample_primal(rng);
    const double model_x = st.model.chi.value() + st.model.s_agg.dot(x) +
                           game.composite.eval_h_alpha(x);
    CHECK(model_x <= phi_alpha(game, x) + 1e-9);
    const double dist = primal_norm(game, x - mn.argmin);
    CHECK(model_x >= mn.min_value +
                         0.5 * game.composite.alpha * dist * dist - 1e-9);
  }
}

TEST_CASE("certificate gap dominates the primal-dual gap") {
  const ProblemOracles game = game_oracles(make_game(4, 11, 0.3));
  MdaState st = mda_init(game, game.initial_point);
  for (int k = 0; k < 6; ++k) st = mda_step(std::move(st), game);
  Rng rng(17);
  for (int s = 0; s < 100; ++s) {
    const Vec u = game.sample_primal(rng);
    const Certificate cert = certificate_gap(st.model, game, u);
    CHECK(cert.gap >= pd_gap(game, u, st.model.s_agg) - 1e-9);
  }
}

TEST_CASE("the same aggregator drives the dual-side model") {
  // Cuts are linearizations of (h^a)*(-.) recorded along a dual-average
  // run; the composite side is f*, minimized through its own oracle.
  const ProblemOracles game = game_oracles(make_game(4, 11, 0.3));
  const Vec y0 = game.initial_point;
  GcgState st = gcg_init(game, game.smooth.grad(y0));
  auto dual_cut_value = [&](const Vec& z) {
    return -game.composite.glmo(z).min_value;
  };
  AcpAggregator dual = acp_init(st.z, dual_cut_value(st.z),
                                -game.conjugate.grad_h_alpha_conj(st.z));
  Vec vbar = game.conjugate.grad_h_alpha_conj(st.z);
  for (int k = 0; k < 10; ++k) {
    st = gcg_step(std::move(st), game);
    const Vec response = game.conjugate.grad_h_alpha_conj(st.z);
    dual = acp_update(dual, st.eta, st.z, dual_cut_value(st.z), -response);
    vbar = (1.0 - st.eta) * vbar + st.eta * response;
  }
  Rng rng(23);
  const AcpMinimum mn = acp_min(dual, game.conjugate.glmo_f_conj);
  for (int s = 0; s < 100; ++s) {
    const Vec g = game.sample_dual(rng);
    const double model_g =
        dual.chi.value() + dual.s_agg.dot(g) + game.conjugate.eval_f_conj(g);
    CHECK(model_g <= psi_alpha(game, g) + 1e-9);  // minorizes psi
    // Dual certificate dominates the primal-dual gap at the averaged point.
    CHECK(psi_alpha(game, g) - mn.min_value >=
          phi_alpha(game, vbar) + psi_alpha(game, g) - 1e-9);
  }
}

TEST_CASE("compensated accumulator survives scaling chains") {
  CompensatedValue acc(1.0);
  for (int i = 0; i < 2000; ++i) {
    acc.scale(0.999);
    acc.add(0.001 * 0.5);
  }
  // EMA of the constant 0.5 from 1.0: value = 0.5 + 0.5*0.999^2000.
  const double expect = 0.5 + 0.5 * std::pow(0.999, 2000);
  CHECK(acc.value() == doctest::Approx(expect).epsilon(1e-13));
}
