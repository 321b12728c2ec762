#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <stdexcept>

#include "sma/material.hpp"

using namespace sma;

TEST_CASE("h_eval is affine with the given slope and root") {
  MaterialParams p = demo_params();
  p.beta_M = 0.1;
  p.theta_M_ref = 300.0;
  CHECK(h_eval(p, Phase::twinned_martensite, 290.0) == doctest::Approx(-1.0));
  CHECK(h_eval(p, Phase::twinned_martensite, 300.0) == doctest::Approx(0.0));
  p.beta_A = 0.0;
  CHECK(h_eval(p, Phase::austenite, 123.0) == doctest::Approx(0.0));
  CHECK(h_eval(p, Phase::austenite, 456.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(h_eval(p, Phase::twinned_martensite, 0.0), std::domain_error);
  CHECK_THROWS_AS(h_eval(p, Phase::twinned_martensite, -5.0), std::domain_error);
}

TEST_CASE("h_eval midpoint identity (exact affinity)") {
  MaterialParams p = demo_params();
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> uni(100.0, 500.0);
  for (int i = 0; i < 100; ++i) {
    const double t1 = uni(gen), t2 = uni(gen);
    for (Phase ph : {Phase::austenite, Phase::twinned_martensite, Phase::detwinned_martensite}) {
      const double lhs = h_eval(p, ph, t1) + h_eval(p, ph, t2);
      const double rhs = 2.0 * h_eval(p, ph, 0.5 * (t1 + t2));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("d_eval closed-form values") {
  MaterialParams p = demo_params();
  p.d0 = p.d1 = p.d2 = 0.0;
  CHECK(d_eval(p, 0.3, 100.0) == doctest::Approx(0.0));
  CHECK(d_eval(p, 0.9, -50.0) == doctest::Approx(0.0));

  p.d0 = 0.5;
  p.d1 = 1.0;
  p.d2 = 0.0;
  CHECK(d_eval(p, 0.2, 0.0) == doctest::Approx(0.7));

  p.d0 = 0.0;
  p.d1 = 0.0;
  p.d2 = 0.4;
  p.k_d = 0.789;
  CHECK(d_eval(p, 0.0, 0.0) == doctest::Approx(0.2));

  CHECK_THROWS_AS(d_eval(p, -0.2, 0.0), std::domain_error);
  CHECK_THROWS_AS(d_eval(p, 1.5, 0.0), std::domain_error);
}

TEST_CASE("d_eval is nonnegative for valid parameters") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_real_distribution<double> sig(-500.0, 500.0);
  for (int i = 0; i < 500; ++i) {
    MaterialParams p = demo_params();
    p.d0 = uni(gen);
    p.d1 = uni(gen);
    p.d2 = uni(gen);
    p.k_d = 0.1 * uni(gen);
    CHECK(d_eval(p, uni(gen), sig(gen)) >= 0.0);
  }
}

TEST_CASE("validate accepts the demo set and reports violations") {
  CHECK(validate(demo_params()).empty());

  MaterialParams bad = demo_params();
  bad.mu = -1.0;
  auto errors = validate(bad);
  REQUIRE(errors.size() >= 1);
  bool found = false;
  for (const auto& e : errors)
    if (e.find("mu must be positive") != std::string::npos) found = true;
  CHECK(found);

  MaterialParams zero_cs = demo_params();
  zero_cs.c_s = 0.0;
  errors = validate(zero_cs);
  REQUIRE(errors.size() >= 1);
  found = false;
  for (const auto& e : errors)
    if (e.find("c_s") != std::string::npos && e.find("heat-capacity") != std::string::npos)
      found = true;
  CHECK(found);

  MaterialParams negC = demo_params();
  negC.C_AMS = -0.1;
  negC.H_S = -2.0;
  CHECK(validate(negC).size() == 2);

  CHECK_THROWS_AS(validate_or_throw(bad), std::invalid_argument);
  CHECK_NOTHROW(validate_or_throw(demo_params()));
}
