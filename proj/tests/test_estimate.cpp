#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "estimate.hpp"
#include "support.hpp"

using namespace rubato;
using namespace rubato::estimate;
namespace ts = testsupport;

TEST_CASE("unconstrained transform round-trips published parameters") {
  for (const tempo::Theta& th :
       {ts::theta_richter_1976(), ts::theta_wasowski_1980()}) {
    auto u = to_unconstrained(th);
    auto back = from_unconstrained(u);
    CHECK(back.sigma2_eps == doctest::Approx(th.sigma2_eps).epsilon(1e-12));
    CHECK(back.mu_tempo == doctest::Approx(th.mu_tempo).epsilon(1e-12));
    CHECK(back.mu_acc == doctest::Approx(th.mu_acc).epsilon(1e-12));
    CHECK(back.mu_stress == doctest::Approx(th.mu_stress).epsilon(1e-12));
    CHECK(back.sigma2_tempo == doctest::Approx(th.sigma2_tempo).epsilon(1e-12));
    for (int i = 0; i < 4; ++i)
      CHECK(back.row1[i] == doctest::Approx(th.row1[i]).epsilon(1e-12));
    for (int i = 0; i < 3; ++i) {
      CHECK(back.row2[i] == doctest::Approx(th.row2[i]).epsilon(1e-12));
      CHECK(back.row3[i] == doctest::Approx(th.row3[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("uniform probability row maps to zero alr coordinates") {
  tempo::Theta th;
  th.row1 = {0.25, 0.25, 0.25, 0.25};
  auto u = to_unconstrained(th);
  CHECK(u[5] == doctest::Approx(0.0));
  CHECK(u[6] == doctest::Approx(0.0));
  CHECK(u[7] == doctest::Approx(0.0));
}

TEST_CASE("origin of the unconstrained space is inside the support") {
  std::array<double, kNumCoords> zero{};
  auto th = from_unconstrained(zero);
  CHECK(th.in_support());
}

TEST_CASE("boundary probabilities are clamped, not logged to -inf") {
  tempo::Theta th;
  th.row1 = {1.0, 0.0, 0.0, 0.0};
  auto u = to_unconstrained(th);
  for (double c : u) CHECK(std::isfinite(c));
  auto back = from_unconstrained(u);
  CHECK(back.in_support());
}

TEST_CASE("objective: out-of-support theta gives -inf") {
  tempo::Theta th;
  th.mu_acc = 1.0;
  auto score = ts::make_score(20);
  std::vector<double> y(20, 130.0);
  FitConfig cfg;
  CHECK(objective(th, y, score, cfg) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("objective: recomposition and seed invariance in greedy mode") {
  tempo::Theta th = ts::theta_wasowski_1980();
  auto score = ts::make_score(60);
  tempo::InitBelief init{132.0, 400.0};
  auto sim = tempo::simulate(th, score, init, 17);

  FitConfig cfg;
  cfg.beam = 64;
  double v1 = objective(th, sim.y, score, cfg);
  CHECK(std::isfinite(v1));

  cfg.seed = 12345;
  CHECK(objective(th, sim.y, score, cfg) == v1);

  // recomposition: best-path loglik + prior evaluated independently
  auto fp = infer(th, sim.y, score, cfg);
  double ybar = 0.0;
  for (double v : sim.y) ybar += v / double(sim.y.size());
  CHECK(v1 == doctest::Approx(fp.loglik + tempo::log_prior(th, ybar))
                  .epsilon(1e-12));
}

TEST_CASE("fit rejects too-short recordings") {
  auto score = ts::make_score(8);
  std::vector<double> y(8, 120.0);
  CHECK_THROWS_AS(fit(y, score, FitConfig{}), std::invalid_argument);
}

TEST_CASE("fit on near-constant data stays in behavior 1") {
  tempo::Theta truth;
  truth.sigma2_eps = 20.0;
  truth.row1 = {1.0, 0.0, 0.0, 0.0};
  auto score = ts::make_score(60);
  tempo::InitBelief init{130.0, 100.0};
  auto sim = tempo::simulate(truth, score, init, 8);

  FitConfig cfg;
  cfg.beam = 50;
  cfg.restarts = 2;
  cfg.max_evals = 500;
  cfg.seed = 1;
  auto fp = fit(sim.y, score, cfg);

  int n_const = 0;
  for (int b : fp.behaviors) n_const += b == 1;
  CHECK(n_const >= int(0.95 * fp.behaviors.size()));
  CHECK(fp.theta.row1[0] > 0.7);  // near the prior mode, not drifting away
  CHECK(fp.theta.sigma2_acc == 1.0);
  CHECK(fp.theta.sigma2_stress == 1.0);

  // stored objective equals a re-evaluation at theta-hat (greedy determinism)
  CHECK(fp.objective == objective(fp.theta, sim.y, score, cfg));

  // projection consistency
  for (size_t i = 0; i < fp.path.size(); ++i) {
    CHECK(fp.behaviors[i] == tempo::behavior(fp.path[i]));
  }
  CHECK(fp.smoothed_tempo.size() == sim.y.size());
}

TEST_CASE("more restarts never hurt the objective") {
  tempo::Theta truth = ts::theta_wasowski_1980();
  auto score = ts::make_score(40);
  tempo::InitBelief init{132.0, 400.0};
  auto sim = tempo::simulate(truth, score, init, 23);

  FitConfig cfg;
  cfg.beam = 40;
  cfg.restarts = 1;
  cfg.max_evals = 300;
  cfg.seed = 5;
  auto fp1 = fit(sim.y, score, cfg);
  cfg.restarts = 2;
  auto fp2 = fit(sim.y, score, cfg);
  CHECK(fp2.objective >= fp1.objective - 1e-9);
}
