#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "certopt/instances.hpp"
#include "certopt/oracles.hpp"
#include "test_support.hpp"

using namespace certopt;
using namespace certopt_test;

namespace {
const double kLog2 = std::log(2.0);
}

TEST_CASE("phi_alpha on the symmetric identity game") {
  const ProblemOracles p = game_oracles(identity_game2());
  CHECK(phi_alpha(p, vec2(0.5, 0.5)) == doctest::Approx(0.5 + kLog2).epsilon(1e-12));
}

TEST_CASE("phi_alpha on the quadratic box toy") {
  const ProblemOracles p = quadbox_oracles(quadbox1());
  CHECK(phi_alpha(p, vec1(0.0)) == doctest::Approx(0.0));
  CHECK(phi_alpha(p, vec1(0.5)) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("phi_alpha rejects points outside the domain") {
  const ProblemOracles box = quadbox_oracles(quadbox1());
  CHECK_THROWS_AS(phi_alpha(box, vec1(1.5)), DomainError);
  const ProblemOracles game = game_oracles(identity_game2());
  CHECK_THROWS_AS(phi_alpha(game, vec2(0.7, 0.7)), DomainError);
  CHECK_THROWS_AS(phi_alpha(game, vec2(1.2, -0.2)), DomainError);
}

TEST_CASE("psi_alpha on the identity game matches the grid oracle") {
  const ProblemOracles p = game_oracles(identity_game2());
  const Vec z = vec2(0.5, 0.5);
  // Independent route: (h^a)*(-z) = -min over the simplex of <z,x>+H(x)+log2.
  const auto inner = [&](const Vec& x) {
    return z.dot(x) + neg_entropy(x) + kLog2;
  };
  const BruteForceResult grid =
      brute_force_min(inner, DomainSpec::Simplex(2), 1e-4, 2.0);
  CHECK(grid.min_value == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(psi_alpha(p, z) == doctest::Approx(-0.5 - kLog2).epsilon(1e-9));
}

TEST_CASE("psi_alpha zero case and unsupported instance") {
  const ProblemOracles box = quadbox_oracles(quadbox1());
  CHECK(psi_alpha(box, vec1(0.0)) == doctest::Approx(0.0));
  const ProblemOracles fisher = fisher_oracles(make_fisher(2, 2, 7));
  CHECK_THROWS_AS(psi_alpha(fisher, vec2(0.1, 0.1)), UnsupportedError);
  // Game f* is only defined on gradient-space points.
  const ProblemOracles game = game_oracles(identity_game2());
  CHECK_THROWS_AS(psi_alpha(game, vec2(5.0, 5.0)), DomainError);
}

TEST_CASE("pd_gap fixed points and hand value") {
  const ProblemOracles game = game_oracles(identity_game2());
  CHECK(pd_gap(game, vec2(0.5, 0.5), vec2(0.5, 0.5)) ==
        doctest::Approx(0.0).epsilon(1e-12));
  const ProblemOracles box = quadbox_oracles(quadbox1());
  CHECK(pd_gap(box, vec1(0.0), vec1(0.0)) == doctest::Approx(0.0));
  CHECK(pd_gap(box, vec1(0.5), vec1(0.0)) == doctest::Approx(0.25));
}

TEST_CASE("weak duality holds on random feasible pairs") {
  for (const Instance& inst :
       {Instance(make_game(4, 11)), Instance(make_quadbox(3))}) {
    const ProblemOracles p = make_oracles(inst);
    Rng rng(99);
    for (int s = 0; s < 100; ++s) {
      const Vec x = p.sample_primal(rng);
      const Vec z = p.sample_dual(rng);
      CHECK(pd_gap(p, x, z) >= -1e-9);
    }
  }
}

TEST_CASE("Fenchel-Young equality at gradient pairs") {
  for (const Instance& inst :
       {Instance(make_game(5, 3)), Instance(make_quadbox(4))}) {
    const ProblemOracles p = make_oracles(inst);
    Rng rng(5);
    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
      const Vec x = p.sample_primal(rng);
      const Vec g = p.smooth.grad(x);
      worst = std::max(worst, std::abs(p.smooth.eval(x) +
                                       p.conjugate.eval_f_conj(g) - x.dot(g)));
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("conjugate gradient of h^alpha equals the glmo argmin") {
  for (const Instance& inst :
       {Instance(make_game(5, 3)), Instance(make_quadbox(4)),
        Instance(make_fisher(2, 3, 17))}) {
    const ProblemOracles p = make_oracles(inst);
    Rng rng(21);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
      Vec z(p.dim);
      for (int i = 0; i < p.dim; ++i) z[i] = 2.0 * normal(rng);
      worst = std::max(worst,
                       (p.conjugate.grad_h_alpha_conj(z) -
                        p.composite.glmo(z).argmin)
                           .lpNorm<Eigen::Infinity>());
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("gradients match central finite differences") {
  for (const Instance& inst :
       {Instance(make_game(5, 3)), Instance(make_quadbox(4)),
        Instance(make_fisher(3, 2, 17))}) {
    const ProblemOracles p = make_oracles(inst);
    Rng rng(31);
    double worst = 0.0;
    for (int s = 0; s < 50; ++s) {
      const Vec x = p.sample_primal(rng);
      const Vec g = p.smooth.grad(x);
      const Vec fd = fd_gradient(p.smooth.eval, x);
      worst = std::max(worst, (g - fd).lpNorm<Eigen::Infinity>() /
                                  std::max(1.0, g.lpNorm<Eigen::Infinity>()));
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("smooth part satisfies the Bregman two-sided bound") {
  for (const Instance& inst :
       {Instance(make_game(5, 3)), Instance(make_quadbox(4)),
        Instance(make_fisher(2, 3, 17))}) {
    const ProblemOracles p = make_oracles(inst);
    Rng rng(37);
    for (int s = 0; s < 60; ++s) {
      const Vec x = p.sample_primal(rng);
      const Vec y = p.sample_primal(rng);
      const double bregman =
          p.smooth.eval(y) - p.smooth.eval(x) - p.smooth.grad(x).dot(y - x);
      const double dist = primal_norm(p, y - x);
      CHECK(bregman >= -1e-9);
      CHECK(bregman <= 0.5 * p.smooth.lipschitz * dist * dist + 1e-9);
    }
  }
}

TEST_CASE("glmo minimum value and conjugate value are consistent") {
  for (const Instance& inst :
       {Instance(make_game(5, 3)), Instance(make_quadbox(4)),
        Instance(make_fisher(2, 3, 17))}) {
    const ProblemOracles p = make_oracles(inst);
    Rng rng(43);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int s = 0; s < 50; ++s) {
      Vec v(p.dim);
      for (int i = 0; i < p.dim; ++i) v[i] = normal(rng);
      const GlmoResult r = p.composite.glmo(v);
      CHECK(p.composite.in_domain(r.argmin, kDomainTol));
      CHECK(std::abs(r.min_value -
                     (v.dot(r.argmin) + p.composite.eval_h_alpha(r.argmin))) <=
            1e-9);
      CHECK(std::abs(p.conjugate.eval_h_alpha_conj(v) + r.min_value) <= 1e-9);
    }
  }
}

TEST_CASE("composite strong convexity at glmo optima") {
  for (const Instance& inst :
       {Instance(make_game(5, 3)), Instance(make_quadbox(4))}) {
    const ProblemOracles p = make_oracles(inst);
    const double alpha = p.composite.alpha;
    Rng rng(47);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int s = 0; s < 60; ++s) {
      Vec v(p.dim);
      for (int i = 0; i < p.dim; ++i) v[i] = normal(rng);
      const GlmoResult r = p.composite.glmo(v);
      const Vec y = p.sample_primal(rng);
      const double excess =
          v.dot(y) + p.composite.eval_h_alpha(y) - r.min_value;
      const double dist = primal_norm(p, y - r.argmin);
      CHECK(excess >= 0.5 * alpha * dist * dist - 1e-9);
    }
  }
}
