#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>

#include "oracles.hpp"
#include "srslab/activation.hpp"
#include "srslab/rng.hpp"

using namespace srslab;
using Catch::Approx;

namespace {

// Random valid srs parameters: positive, comfortably below the pole.
std::pair<double, double> random_valid_srs(Rng& rng) {
  double alpha = rng.uniform(0.5, 8.0);
  double beta = rng.uniform(0.5, std::fmin(8.0, 0.9 * alpha * std::numbers::e));
  return {alpha, beta};
}

}  // namespace

TEST_CASE("srs closed-form values") {
  Activation a = Activation::srs(5.0, 3.0);

  CHECK(eval(a, 0.0) == 0.0);

  double min_value = 5.0 * 3.0 / (3.0 - 5.0 * std::numbers::e);
  CHECK(eval(a, -3.0) == Approx(min_value).epsilon(1e-12));
  CHECK(min_value == Approx(-1.41624).margin(5e-6));

  // grid-search oracle agrees with the closed-form minimum
  auto f = [&](double x) { return eval(a, x); };
  auto gm = oracles::grid_min(f, -50.0, 50.0, 1'000'000);
  CHECK(gm.x == Approx(-3.0).margin(1e-6));
  CHECK(gm.value == Approx(min_value).margin(1e-12));

  // saturates just below alpha
  double y = eval(a, 1e6);
  CHECK(y < 5.0);
  CHECK(5.0 - y < 1e-3);

  CHECK(eval(Activation::plain(Act::SELU), 0.0) == 0.0);
}

TEST_CASE("srs derivative closed form") {
  Activation a = Activation::srs(5.0, 3.0);
  CHECK(eval_dx(a, 0.0) == 1.0);
  CHECK(eval_dx(a, -3.0) == 0.0);

  auto f = [&](double x) { return eval(a, x); };
  double fd = oracles::central_diff(f, 1.7, 1e-6);
  CHECK(oracles::rel_err(eval_dx(a, 1.7), fd) < 1e-7);
}

TEST_CASE("derivatives match finite differences for every kind") {
  const double xs[] = {-9876.5, -321.4, -57.0, -10.2, -3.3,  -1.51, -0.73,
                       -0.105,  -0.0107, 0.0107, 0.105, 0.73, 1.51,  3.3,
                       10.2,    57.0,   321.4,  9876.5};
  for (Act kind : kAllActs) {
    Activation a = Activation::plain(kind);
    CAPTURE(act_name(kind));
    for (double x : xs) {
      CAPTURE(x);
      auto f = [&](double t) { return eval(a, t); };
      double h = 1e-6 * std::fmax(1.0, std::fabs(x));
      double fd = oracles::central_diff(f, x, h);
      // floor 1: in saturated tails the true slope is ~1e-9 and central
      // differences bottom out at roundoff, so the comparison goes absolute
      CHECK(oracles::rel_err(eval_dx(a, x), fd, 1.0) < 1e-6);
    }
  }
}

TEST_CASE("parameter gradients") {
  SECTION("srs at the origin") {
    Activation a = Activation::srs(5.0, 3.0);
    auto g = eval_dparams(a, 0.0);
    REQUIRE(g.size() == 2);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.0);
  }

  SECTION("srs against finite differences") {
    Activation a = Activation::srs(5.0, 3.0);
    for (double x : {2.0, -1.3, 0.4, -7.5, 11.0}) {
      CAPTURE(x);
      auto g = eval_dparams(a, x);
      auto fa = [&](double alpha) { return eval(Activation::srs(alpha, 3.0), x); };
      auto fb = [&](double beta) { return eval(Activation::srs(5.0, beta), x); };
      CHECK(oracles::rel_err(g[0], oracles::central_diff(fa, 5.0, 1e-6)) < 1e-7);
      CHECK(oracles::rel_err(g[1], oracles::central_diff(fb, 3.0, 1e-6)) < 1e-7);
    }
  }

  SECTION("prelu negative branch") {
    Activation a = Activation::prelu(1, 0.1);
    auto g = eval_dparams(a, -2.0);
    REQUIRE(g.size() == 1);
    CHECK(g[0] == -2.0);
    CHECK(eval_dparams(a, 2.0)[0] == 0.0);
  }

  SECTION("swish alpha against finite differences") {
    Activation a = Activation::swish(1.0, true);
    for (double x : {-3.0, -0.5, 0.7, 4.0}) {
      auto fa = [&](double alpha) { return eval(Activation::swish(alpha), x); };
      CHECK(oracles::rel_err(eval_dparams(a, x)[0], oracles::central_diff(fa, 1.0, 1e-6)) < 1e-7);
    }
  }

  SECTION("parameterless kinds return empty") {
    CHECK(eval_dparams(Activation::plain(Act::ReLU), 1.0).empty());
    CHECK(eval_dparams(Activation::plain(Act::Tanh), 1.0).empty());
  }
}

TEST_CASE("srs_shape") {
  SrsShape s = srs_shape(5.0, 3.0);
  CHECK(s.min_location == -3.0);
  CHECK(s.min_value == Approx(-1.41624).margin(5e-6));
  CHECK(s.supremum == 5.0);

  // 6/(2-3e); the grid-search oracle gives the same point and value
  SrsShape d = srs_shape(3.0, 2.0);
  CHECK(d.min_location == -2.0);
  CHECK(d.min_value == Approx(6.0 / (2.0 - 3.0 * std::numbers::e)).epsilon(1e-14));
  CHECK(d.min_value == Approx(-0.97484).margin(5e-6));
  Activation a = Activation::srs(3.0, 2.0);
  auto gm = oracles::grid_min([&](double x) { return eval(a, x); }, -50.0, 50.0, 1'000'000);
  CHECK(gm.value == Approx(d.min_value).margin(1e-12));

  CHECK_THROWS_AS(srs_shape(1.0, std::numbers::e), std::invalid_argument);
}

TEST_CASE("pole condition") {
  CHECK(srs_pole_exists(0.5, 2.0));
  CHECK_FALSE(srs_pole_exists(1.0, 2.0));
  CHECK(srs_pole_exists(2.0, 6.0));

  // matches the bisection root-finder on a random parameter grid
  Rng rng(20240517);
  for (int i = 0; i < 100; ++i) {
    double alpha = rng.uniform(0.1, 8.0);
    double beta = rng.uniform(0.1, 8.0);
    CAPTURE(alpha, beta);
    CHECK(srs_pole_exists(alpha, beta) == oracles::denominator_has_root(alpha, beta));
  }
}

TEST_CASE("srs range and monotonicity") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto [alpha, beta] = random_valid_srs(rng);
    CAPTURE(alpha, beta);
    Activation a = Activation::srs(alpha, beta);
    SrsShape s = srs_shape(alpha, beta);

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) {
      double x = -100.0 + 200.0 * i / (n - 1);
      double v = eval(a, x);
      lo = std::fmin(lo, v);
      hi = std::fmax(hi, v);
    }
    CHECK(lo >= s.min_value - 1e-9);
    CHECK(hi < alpha);

    // non-decreasing for x >= 0 (1-ulp slack for the saturated tail)
    double prev = eval(a, 0.0);
    for (int i = 1; i < 100'000; ++i) {
      double x = 100.0 * i / 99'999.0;
      double v = eval(a, x);
      if (v < prev - std::fabs(prev) * 1e-15) {
        CAPTURE(x);
        FAIL("srs decreased on x >= 0");
      }
      prev = v;
    }
  }
}

TEST_CASE("origin identities for every valid parameter pair") {
  Rng rng(99);
  for (int i = 0; i < 100; ++i) {
    auto [alpha, beta] = random_valid_srs(rng);
    Activation a = Activation::srs(alpha, beta);
    CHECK(eval(a, 0.0) == 0.0);
    CHECK(eval_dx(a, 0.0) == 1.0);
    CHECK(eval_dx(a, -beta) == Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("input and parameter validation") {
  Activation a = Activation::srs(5.0, 3.0);
  double nan = std::numeric_limits<double>::quiet_NaN();
  double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(eval(a, nan), std::domain_error);
  CHECK_THROWS_AS(eval(a, inf), std::domain_error);
  CHECK_THROWS_AS(eval_dx(a, -inf), std::domain_error);

  Activation pole = Activation::srs(1.0, 4.0);  // beta > alpha*e
  CHECK_THROWS_AS(eval(pole, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(eval_dx(pole, 1.0), std::invalid_argument);

  Activation bad = Activation::srs(5.0, 3.0);
  bad.params.push_back(1.0);
  CHECK_THROWS_AS(eval(bad, 1.0), std::invalid_argument);

  Activation negative = Activation::srs(-1.0, 1.0);
  CHECK_THROWS_AS(eval(negative, 1.0), std::invalid_argument);

  Activation relu = Activation::plain(Act::ReLU);
  relu.params.push_back(0.5);
  CHECK_THROWS_AS(eval(relu, 1.0), std::invalid_argument);
}

TEST_CASE("srs projection after updates") {
  Activation a = Activation::srs(3.0, 2.0);

  a.params[1] = 10.0;  // would step past the pole
  project_srs(a);
  CHECK(a.params[1] == Approx(0.95 * 3.0 * std::numbers::e).epsilon(1e-14));

  a.params[0] = -0.5;  // would step negative
  project_srs(a);
  CHECK(a.params[0] == 0.01);

  Activation ok = Activation::srs(5.0, 3.0);
  project_srs(ok);
  CHECK(ok.params[0] == 5.0);
  CHECK(ok.params[1] == 3.0);

  // projected parameters always satisfy the evaluation preconditions
  Rng rng(123);
  for (int i = 0; i < 200; ++i) {
    Activation t = Activation::srs(rng.uniform(-2.0, 9.0), rng.uniform(-2.0, 30.0));
    project_srs(t);
    CHECK_NOTHROW(eval(t, 1.0));
    CHECK(t.params[0] >= t.clamp_floor);
    CHECK(t.params[1] >= t.clamp_floor);
    CHECK(t.params[1] <= 0.95 * t.params[0] * std::numbers::e + 1e-15);
  }
}

TEST_CASE("rrelu slope modes") {
  Activation det = Activation::rrelu(false);
  CHECK(eval(det, -4.0) == Approx(-4.0 * kRReluMid));
  CHECK(eval(det, 4.0) == 4.0);

  Activation sto = Activation::rrelu(true);
  Rng r1(42), r2(42), r3(43);
  double a = eval(sto, -1.0, r1);
  double b = eval(sto, -1.0, r2);
  double c = eval(sto, -1.0, r3);
  CHECK(a == b);           // seeded draws are reproducible
  CHECK(a != c);
  CHECK(-a > kRReluLo);    // slope inside the sampling range
  CHECK(-a < kRReluHi);
  Rng r4(7);
  CHECK(eval(sto, 2.0, r4) == 2.0);
}

TEST_CASE("activation names round-trip") {
  for (Act kind : kAllActs) {
    CHECK(act_from_name(act_name(kind)) == kind);
  }
  CHECK_THROWS_AS(act_from_name("nope"), std::invalid_argument);
}
