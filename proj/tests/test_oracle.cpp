#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sma/oracle.hpp"

using namespace sma;

TEST_CASE("oracle_project basics and agreement with project_K") {
  auto r = oracle_project(0.0, 0.0);
  CHECK(r.first == doctest::Approx(0.0));
  CHECK(r.second == doctest::Approx(0.0));

  r = oracle_project(2.0, 2.0);
  CHECK(r.first == doctest::Approx(0.5));
  CHECK(r.second == doctest::Approx(0.5));

  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = box(gen), v = box(gen);
    const auto a = project_K(u, v);
    const auto b = oracle_project(u, v);
    worst = std::max(worst,
                     std::max(std::abs(a.first - b.first), std::abs(a.second - b.second)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("fd_forces trivial and worked cases") {
  MaterialParams p;
  p.lambda = 15000.0;
  p.mu = 10000.0;
  p.c_s = 1.0;
  p.xi_s = 0.05;
  p.theta_0 = 1.0;
  p.theta_M_ref = p.theta_S_ref = p.theta_A_ref = 1.0;

  ThermoState s;
  s.theta = 1.0;
  s.chi_M = 0.2;
  s.chi_S = 0.2;
  s.d_tr = p.xi_s * axial_unit_deviator();
  Forces fd = fd_forces(p, s, 1e-6);
  CHECK(std::abs(fd.B_M) <= 1e-8);

  const DevTensor3 n = axial_unit_deviator();
  ThermoState t;
  t.theta = 1.0;
  t.eps = 0.03 * static_cast<const SymTensor3&>(n);
  t.chi_M = 0.1;
  t.chi_S = 0.2;
  t.d_tr = 0.05 * n;
  fd = fd_forces(p, t, 1e-6);
  CHECK(fd.B_S == doctest::Approx(-20.0).epsilon(1e-6));

  CHECK_THROWS_AS(fd_forces(p, t, 1e-2), std::invalid_argument);
}

TEST_CASE("oracle grid recovers closed-form minimizers") {
  // elastic step: stays at the initial fractions
  MaterialParams p;
  p.lambda = 15000.0;
  p.mu = 10000.0;
  p.c_s = 2.0;
  p.xi_s = 0.05;
  p.theta_0 = 293.0;
  p.theta_M_ref = p.theta_S_ref = p.theta_A_ref = 293.0;
  p.beta_M = 0.1;

  ThermoState s;
  s.theta = 293.0;
  s.chi_M = 0.24;  // not on the 1e-2 grid
  s.chi_S = 0.1;
  s.d_tr = p.xi_s * axial_unit_deviator();
  s.eps = s.chi_S * static_cast<const SymTensor3&>(s.d_tr);  // stress free
  auto r = oracle_phases_grid(p, s, 1e-2);
  CHECK(std::abs(r.first - 0.24) <= 0.5e-2 + 1e-12);
  CHECK(std::abs(r.second - 0.1) <= 0.5e-2 + 1e-12);

  // hardening case: chi_M -> 0.5
  MaterialParams ph = p;
  ph.H_M = 0.5;
  ThermoState sh;
  sh.theta = 293.0 - 12.5;
  sh.d_tr = ph.xi_s * axial_unit_deviator();
  r = oracle_phases_grid(ph, sh, 1e-3);
  CHECK(std::abs(r.first - 0.5) <= 1e-3 + 1e-12);
  CHECK(r.second == doctest::Approx(0.0));

  // forward plateau case: chi_S -> 0.57
  MaterialParams ps = p;
  ps.beta_M = 0.0;
  ps.d0 = 0.5;
  const DevTensor3 n = axial_unit_deviator();
  ThermoState ss;
  ss.theta = 293.0;
  ss.eps = 0.03 * static_cast<const SymTensor3&>(n);
  ss.d_tr = ps.xi_s * n;
  r = oracle_phases_grid(ps, ss, 1e-3);
  CHECK(r.first == doctest::Approx(0.0));
  CHECK(std::abs(r.second - 0.57) <= 1e-3 + 1e-12);
}

TEST_CASE("oracle grid rejects out-of-range resolutions") {
  MaterialParams p = demo_params();
  ThermoState s;
  s.theta = 300.0;
  CHECK_THROWS_AS(oracle_phases_grid(p, s, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(oracle_phases_grid(p, s, 0.5), std::invalid_argument);
}

TEST_CASE("solver matches the grid oracle on random configurations") {
  std::mt19937_64 gen(4242);
  SolverOptions opt;
  const double res = 2e-3;
  double worst = 0.0;
  for (int i = 0; i < 40; ++i) {
    const MaterialParams p = random_params(gen);
    const ThermoState s = random_state(p, gen, 0.0);
    const auto grid = oracle_phases_grid(p, s, res);
    const PhaseSolution sol = step_phases(p, s, opt);
    worst = std::max(worst, std::abs(grid.first - sol.chi_M));
    worst = std::max(worst, std::abs(grid.second - sol.chi_S));
  }
  CHECK(worst <= 2.0 * res);
}

TEST_CASE("halving the grid resolution at least halves the worst disagreement") {
  // Smooth plateau minimum swept densely across one grid cell: the grid
  // argmin is the nearest multiple, so the worst-case error is half a cell
  // and halves with the resolution.
  MaterialParams p;
  p.lambda = 15000.0;
  p.mu = 10000.0;
  p.c_s = 2.0;
  p.xi_s = 0.05;
  p.theta_0 = 293.0;
  p.theta_M_ref = p.theta_S_ref = p.theta_A_ref = 293.0;
  p.d0 = 0.5;
  const DevTensor3 n = axial_unit_deviator();
  double worst_coarse = 0.0, worst_fine = 0.0;
  for (int k = 0; k < 64; ++k) {
    const double target = 0.3 + 8e-3 * k / 64.0;
    const double amp = (50.0 * target + 1.5) / 1000.0;
    ThermoState s;
    s.theta = 293.0;
    s.eps = amp * static_cast<const SymTensor3&>(n);
    s.d_tr = p.xi_s * n;
    const auto coarse = oracle_phases_grid(p, s, 8e-3);
    const auto fine = oracle_phases_grid(p, s, 4e-3);
    worst_coarse = std::max(worst_coarse, std::abs(coarse.second - target));
    worst_fine = std::max(worst_fine, std::abs(fine.second - target));
  }
  CHECK(worst_fine <= 0.5 * worst_coarse + 1e-12);
  CHECK(worst_coarse <= 0.5 * 8e-3 + 1e-9);
  CHECK(worst_fine <= 0.5 * 4e-3 + 1e-9);

  // random configurations stay within one cell of the exact solver
  std::mt19937_64 gen(515);
  SolverOptions opt;
  for (int i = 0; i < 40; ++i) {
    const MaterialParams rp = random_params(gen);
    const ThermoState s = random_state(rp, gen, 0.0);
    const PhaseSolution sol = step_phases(rp, s, opt);
    const auto grid = oracle_phases_grid(rp, s, 8e-3);
    CHECK(std::abs(grid.first - sol.chi_M) <= 8e-3 + 1e-9);
    CHECK(std::abs(grid.second - sol.chi_S) <= 8e-3 + 1e-9);
  }
}

TEST_CASE("run_check is deterministic and passes at the default seed") {
  const CheckReport a = run_check(42, 20, 10, 2e-3);
  const CheckReport b = run_check(42, 20, 10, 2e-3);
  CHECK(a.ok());
  CHECK(a.fd_worst == b.fd_worst);
  CHECK(a.oracle_worst == b.oracle_worst);
  CHECK(a.project_worst == b.project_worst);
  CHECK(!a.summary().empty());
}
