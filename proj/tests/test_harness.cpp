#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "json.hpp"

#include "certopt/harness.hpp"
#include "test_support.hpp"

using namespace certopt;
using namespace certopt_test;

TEST_CASE("one-average run certifies the quadratic toy quickly") {
  const ProblemOracles box = quadbox_oracles(quadbox1());
  RunConfig cfg;
  cfg.algorithm = Algorithm::kMda;
  cfg.epsilon = 1e-6;
  cfg.alpha_policy = AlphaPolicy::kExplicit;
  cfg.alpha = 1.0;
  cfg.max_iters = 1000;
  const RunResult r = run(box, cfg);
  CHECK(r.status == RunStatus::kCertified);
  CHECK(r.iterations <= 60);
  REQUIRE(r.final_cert_gap.has_value());
  CHECK(*r.final_cert_gap <= 5e-7);
}

TEST_CASE("singleton game certifies immediately") {
  const ProblemOracles game = game_oracles(make_game(1, 0));
  RunConfig cfg;
  cfg.algorithm = Algorithm::kTaa;
  cfg.epsilon = 1e-3;
  cfg.max_iters = 10;
  const RunResult r = run(game, cfg);
  CHECK(r.status == RunStatus::kCertified);
  CHECK(r.iterations <= 1);
}

TEST_CASE("two-average method on the market never certifies") {
  const ProblemOracles fisher = fisher_oracles(make_fisher(2, 2, 7));
  RunConfig cfg;
  cfg.algorithm = Algorithm::kAggGcgPrimal;
  cfg.epsilon = 1e-2;
  cfg.max_iters = 50;
  const RunResult r = run(fisher, cfg);
  CHECK(r.status == RunStatus::kBudgetExhausted);
  // Dual-side metrics are simply absent.
  for (const IterationTrace& row : r.trace) {
    CHECK_FALSE(row.psi_at_dual.has_value());
    CHECK_FALSE(row.pd_gap.has_value());
    CHECK(row.cert_gap.has_value());  // diagnostic still recorded
  }
}

TEST_CASE("dual algorithms refuse the market instance") {
  const ProblemOracles fisher = fisher_oracles(make_fisher(2, 2, 7));
  for (Algorithm alg :
       {Algorithm::kGcg, Algorithm::kAggGcgDual, Algorithm::kGem}) {
    RunConfig cfg;
    cfg.algorithm = alg;
    CHECK_THROWS_AS(run(fisher, cfg), UnsupportedError);
    try {
      run(fisher, cfg);
    } catch (const UnsupportedError& e) {
      CHECK(std::string(e.what()).find("lacks f*") != std::string::npos);
    }
  }
}

TEST_CASE("correspondence suites pass on game and toy") {
  const ProblemOracles game = game_oracles(make_game(4, 11, 0.3));
  const Vec y0 = game.initial_point;
  CHECK(check_correspondence_one_avg(game, y0, 100, 1e-8).overall());
  CHECK(check_correspondence_two_avg(game, y0, true, 100, 1e-8).overall());
  CHECK(check_correspondence_three_avg(game, y0, 100, 1e-8).overall());

  const ProblemOracles box = quadbox_oracles(quadbox1());
  CHECK(check_correspondence_one_avg(box, vec1(1.0), 100, 1e-8).overall());
  CHECK(check_correspondence_two_avg(box, vec1(1.0), true, 100, 1e-8).overall());
  CHECK(check_correspondence_three_avg(box, vec1(1.0), 100, 1e-8).overall());
}

TEST_CASE("correspondence negative controls fail loudly") {
  const ProblemOracles game = game_oracles(make_game(4, 11, 0.3));
  const Vec y0 = game.initial_point;

  const VerificationReport one =
      check_correspondence_one_avg(game, y0, 50, 1e-8, /*z0_perturb=*/1e-3);
  CHECK_FALSE(one.overall());
  double worst = 0.0;
  for (const CheckResult& c : one.checks) worst = std::max(worst, c.violation);
  CHECK(worst >= 1e-4);

  const VerificationReport two =
      check_correspondence_two_avg(game, y0, /*z0_equal_s0=*/false, 50, 1e-8);
  CHECK_FALSE(two.overall());

  const VerificationReport three =
      check_correspondence_three_avg(game, y0, 50, 1e-8, /*lambda_scale=*/1.001);
  CHECK_FALSE(three.overall());
}

TEST_CASE("rate envelopes pass per algorithm") {
  const ProblemOracles game = game_oracles(make_game(5, 3, 0.25));
  const Vec y0 = game.initial_point;
  for (Algorithm alg : {Algorithm::kMda, Algorithm::kTaa, Algorithm::kGcg,
                        Algorithm::kAggGcgPrimal}) {
    const VerificationReport r = check_rates(game, alg, y0, 150);
    CHECK(r.overall());
  }
  CHECK(check_rates(game, Algorithm::kGem, y0, 100, 700).overall());

  const ProblemOracles box = quadbox_oracles(quadbox1());
  CHECK(check_rates(box, Algorithm::kMda, vec1(1.0), 150).overall());
  CHECK(check_rates(box, Algorithm::kTaa, vec1(1.0), 150).overall());
  // No Bregman radius: the scalar identities are still checked.
  CHECK(check_rates(box, Algorithm::kGem, vec1(1.0), 50, 300).overall());
}

TEST_CASE("soundness checks pass at desk scale") {
  CHECK(check_soundness(make_quadbox(1), 1e-3, 1e-4).overall());
  CHECK(check_soundness(make_game(2, 42), 1e-2, 1e-4).overall());
}

TEST_CASE("identity suite passes per family") {
  CHECK(check_identities(game_oracles(make_game(5, 3, 0.4)), 100, 7).overall());
  CHECK(check_identities(quadbox_oracles(make_quadbox(3)), 100, 7).overall());
  CHECK(check_identities(fisher_oracles(make_fisher(2, 2, 7)), 100, 7).overall());
}

TEST_CASE("traces are deterministic and internally consistent") {
  const ProblemOracles game = game_oracles(make_game(6, 5, 0.2));
  for (Algorithm alg :
       {Algorithm::kMda, Algorithm::kGcg, Algorithm::kAggGcgPrimal,
        Algorithm::kAggGcgDual, Algorithm::kTaa, Algorithm::kGem}) {
    RunConfig cfg;
    cfg.algorithm = alg;
    cfg.epsilon = 1e-4;
    cfg.alpha_policy = AlphaPolicy::kExplicit;
    cfg.alpha = 0.2;
    cfg.max_iters = 400;
    const RunResult a = run(game, cfg);
    const RunResult b = run(game, cfg);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
      CHECK(a.trace[i].iter == b.trace[i].iter);
      CHECK(a.trace[i].phi_at_test == b.trace[i].phi_at_test);
      CHECK(a.trace[i].psi_at_dual == b.trace[i].psi_at_dual);
      CHECK(a.trace[i].cert_gap == b.trace[i].cert_gap);
      CHECK(a.trace[i].pd_gap == b.trace[i].pd_gap);
      if (a.trace[i].cert_gap && a.trace[i].pd_gap) {
        CHECK(*a.trace[i].cert_gap >= *a.trace[i].pd_gap - 1e-9);
      }
    }
  }
}

TEST_CASE("alpha policy from epsilon uses the regularization bound") {
  const ProblemOracles game = game_oracles(make_game(4, 11));
  RunConfig cfg;
  cfg.algorithm = Algorithm::kMda;
  cfg.epsilon = 1e-2;
  cfg.alpha_policy = AlphaPolicy::kFromEpsilon;
  cfg.max_iters = 100000;
  const RunResult r = run(game, cfg);
  CHECK(r.alpha_from_epsilon);
  CHECK(r.alpha_used ==
        doctest::Approx(1e-2 / (2.0 * std::log(4.0))).epsilon(1e-12));
}

TEST_CASE("report serialization shape") {
  VerificationReport report;
  report.suite = "demo";
  report.add("first", 1e-12, 1e-9);
  report.add("second", 2.0, 1e-9);
  CHECK_FALSE(report.overall());
  const auto j = nlohmann::json::parse(report_to_json(report));
  CHECK(j["suite"] == "demo");
  CHECK(j["checks"].size() == 2);
  CHECK(j["checks"][0]["pass"] == true);
  CHECK(j["checks"][1]["pass"] == false);
  CHECK(j["checks"][1]["violation"] == doctest::Approx(2.0));
  CHECK(j["overall"] == false);
}

TEST_CASE("complexity sweep orders the two certificate methods") {
  const Instance inst = make_game(10, 7, 0.05, 20.0);
  const std::vector<double> eps = {1e-1, 1e-2, 1e-3};
  const SlopeFit mda = complexity_slope(inst, Algorithm::kMda, eps, 3000000);
  const SlopeFit taa = complexity_slope(inst, Algorithm::kTaa, eps, 3000000);
  REQUIRE(mda.iterations.size() == 3);
  REQUIRE(taa.iterations.size() == 3);
  CHECK(mda.slope > taa.slope);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(taa.iterations[i] <= mda.iterations[i]);
  }
}
