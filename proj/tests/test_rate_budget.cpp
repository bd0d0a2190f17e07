#include "doctest.h"

#include "ionlink/errors.hpp"
#include "ionlink/rate_budget.hpp"

#include <random>

using namespace ionlink;
using namespace ionlink::budget;

TEST_CASE("fiber survival") {
  CHECK(fiber_survival(5, 1) == doctest::Approx(0.3162).epsilon(1e-4));
  CHECK(fiber_survival(5, 1) * fiber_survival(5, 1) == doctest::Approx(0.1));
  CHECK(fiber_survival(0, 1) == 1.0);
  CHECK(fiber_survival(10, 1) == doctest::Approx(0.1));
  CHECK_THROWS_AS(fiber_survival(-1, 1), ValidationError);
}

TEST_CASE("pair rate at the quoted operating points") {
  BudgetConfig cfg;
  cfg.p_cav = 0.01;
  // 33333/s * (0.01 * 0.3162 * 0.7)^2 / 2
  const double expected = (1 / 30e-6) * std::pow(0.01 * std::sqrt(0.1) * 0.7, 2) * 0.5;
  CHECK(pair_rate(cfg) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(pair_rate(cfg) == doctest::Approx(0.0817).epsilon(1e-3));
  CHECK(pair_rate(cfg) * 60 == doctest::Approx(4.9).epsilon(1e-3));
  cfg.p_cav = 0.06;
  CHECK(pair_rate(cfg) == doctest::Approx(2.94).epsilon(1e-3));
}

TEST_CASE("any zero factor gives zero rate") {
  for (int k = 0; k < 4; ++k) {
    BudgetConfig cfg;
    if (k == 0) cfg.p_cav = 0;
    if (k == 1) cfg.fiber_coupling = 0;
    if (k == 2) cfg.detector_eta = 0;
    if (k == 3) cfg.herald_fraction = 0;
    CHECK(pair_rate(cfg) == 0.0);
    CHECK_FALSE(time_to_pairs(cfg, 10).has_value());
  }
}

TEST_CASE("time to accumulate pairs") {
  BudgetConfig cfg;
  const auto t = time_to_pairs(cfg, 1000);
  REQUIRE(t.has_value());
  CHECK(*t / 3600 == doctest::Approx(3.4).epsilon(0.01));
  CHECK(*time_to_pairs(cfg, 0) == 0.0);
  BudgetConfig doubled = cfg;
  doubled.repetition_rate *= 2;
  CHECK(*time_to_pairs(doubled, 1000) == doctest::Approx(*t / 2));
  CHECK_THROWS_AS(time_to_pairs(cfg, -1), ValidationError);
}

TEST_CASE("rate is multiplicatively separable") {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int i = 0; i < 200; ++i) {
    BudgetConfig cfg;
    cfg.repetition_rate = 1e5 * u(rng);
    cfg.p_cav = 0.5 * u(rng);
    cfg.fiber_coupling = u(rng);
    cfg.distance_km = 40 * u(rng);
    cfg.detector_eta = u(rng);
    cfg.herald_fraction = u(rng);
    const double base = pair_rate(cfg);
    const double s = u(rng);
    BudgetConfig x = cfg;
    x.repetition_rate *= s;
    CHECK(pair_rate(x) == doctest::Approx(base * s).epsilon(1e-12));
    x = cfg;
    x.herald_fraction *= s;
    CHECK(pair_rate(x) == doctest::Approx(base * s).epsilon(1e-12));
    x = cfg;
    x.p_cav *= s;
    CHECK(pair_rate(x) == doctest::Approx(base * s * s).epsilon(1e-12));
    x = cfg;
    x.fiber_coupling *= s;
    CHECK(pair_rate(x) == doctest::Approx(base * s * s).epsilon(1e-12));
    x = cfg;
    x.detector_eta *= s;
    CHECK(pair_rate(x) == doctest::Approx(base * s * s).epsilon(1e-12));
  }
}

TEST_CASE("budget validation") {
  BudgetConfig cfg;
  cfg.p_cav = 1.2;
  CHECK_THROWS_AS(pair_rate(cfg), ValidationError);
  cfg = {};
  cfg.repetition_rate = 0;
  CHECK_THROWS_AS(pair_rate(cfg), ValidationError);
  cfg = {};
  cfg.distance_km = -3;
  CHECK_THROWS_AS(pair_rate(cfg), ValidationError);
}
