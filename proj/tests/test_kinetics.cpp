#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sma/kinetics.hpp"
#include "sma/oracle.hpp"

using namespace sma;

namespace {

MaterialParams with_d(double d0, double d1 = 0.0, double d2 = 0.0, double k_d = 0.0) {
  MaterialParams p = demo_params();
  p.d0 = d0;
  p.d1 = d1;
  p.d2 = d2;
  p.k_d = k_d;
  return p;
}

Mat3 random_rotation(std::mt19937_64& gen) {
  std::normal_distribution<double> nd(0.0, 1.0);
  double a[3], b[3];
  for (int i = 0; i < 3; ++i) a[i] = nd(gen);
  for (int i = 0; i < 3; ++i) b[i] = nd(gen);
  double na = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
  for (double& x : a) x /= na;
  double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  for (int i = 0; i < 3; ++i) b[i] -= dot * a[i];
  double nb = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
  for (double& x : b) x /= nb;
  double c[3] = {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  return {{{a[0], b[0], c[0]}, {a[1], b[1], c[1]}, {a[2], b[2], c[2]}}};
}

}  // namespace

TEST_CASE("threshold R: unit for reverse drive, 1 + d for forward") {
  CHECK(r_eval(with_d(0.7), -0.5, 0.0, 0.0) == doctest::Approx(1.0));
  CHECK(r_eval(with_d(0.0), 0.5, 0.0, 0.0) == doctest::Approx(1.0));
  CHECK(r_eval(with_d(0.5), 0.5, 0.0, 0.0) == doctest::Approx(1.5));
}

TEST_CASE("yield function of the twinned mechanism") {
  CHECK(yield_fm(0.0) == doctest::Approx(-1.0));
  CHECK(yield_fm(-1.0) == doctest::Approx(0.0));
  CHECK(yield_fm(2.0) == doctest::Approx(1.0));
}

TEST_CASE("yield function of the oriented mechanism") {
  CHECK(yield_fs(with_d(0.3), -1.0, 0.0, 0.0) == doctest::Approx(0.0));
  CHECK(yield_fs(with_d(0.9), -1.0, 0.5, 0.0) == doctest::Approx(0.0));
  CHECK(yield_fs(with_d(0.5), 1.0, 0.0, 0.0) == doctest::Approx(-0.5));
  CHECK(yield_fs(with_d(0.0), 0.0, 0.0, 0.0) == doctest::Approx(-1.0));
  CHECK(yield_fs(with_d(0.4), 0.0, 0.0, 0.0) <= -1.0);  // always <= -1 for d >= 0
}

TEST_CASE("threshold asymmetry gap is 2 + d") {
  const MaterialParams p = with_d(0.35);
  const double d = d_eval(p, 0.0, 0.0);
  CHECK(yield_fs(p, 1.0 + d, 0.0, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(yield_fs(p, -1.0, 0.0, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK((1.0 + d) - (-1.0) == doctest::Approx(2.0 + d));
}

TEST_CASE("reorientation yield uses the tangential drive") {
  const double xi_s = 0.05;
  const DevTensor3 n = axial_unit_deviator();
  const DevTensor3 d_tr = xi_s * n;

  // drive parallel to the axis: absorbed by the reaction
  const DevTensor3 parallel = 3.7 * n;
  auto fd = yield_fd(parallel, d_tr, 0.3, xi_s);
  CHECK(fd.first == doctest::Approx(-0.3).epsilon(1e-12));
  CHECK(fd.second == doctest::Approx(0.0).epsilon(1e-12));

  // orthogonal shear component of norm 0.2
  DevTensor3 m;
  m.xy = 1.0 / std::sqrt(2.0);
  REQUIRE(std::abs(frob_inner(m, n)) < 1e-14);
  const DevTensor3 mixed = 1.5 * n + (-0.2) * m;
  fd = yield_fd(mixed, d_tr, 0.3, xi_s);
  CHECK(fd.first == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(fd.second == doctest::Approx(0.2).epsilon(1e-12));

  // zero threshold: positive yield value (the integrator freezes instead)
  fd = yield_fd(mixed, d_tr, 0.0, xi_s);
  CHECK(fd.first > 0.0);
}

TEST_CASE("reorientation yield is isotropic") {
  std::mt19937_64 gen(31);
  const double xi_s = 0.04;
  for (int i = 0; i < 100; ++i) {
    const DevTensor3 d_tr = xi_s * random_unit_deviator(gen);
    DevTensor3 b = 2.0 * random_unit_deviator(gen);
    const auto base = yield_fd(b, d_tr, 0.4, xi_s);
    const Mat3 r = random_rotation(gen);
    const auto rot = yield_fd(rotated(b, r), rotated(d_tr, r), 0.4, xi_s);
    CHECK(rot.first == doctest::Approx(base.first).epsilon(1e-10));
    CHECK(rot.second == doctest::Approx(base.second).epsilon(1e-10));
  }
}

TEST_CASE("dissipation increment values") {
  const MaterialParams p = with_d(0.5);
  ThermoState a;
  a.theta = 300.0;
  ThermoState b = a;
  CHECK(dissipation_increment(p, a, b, 0.0) == doctest::Approx(0.0));

  b.chi_S = 0.1;
  CHECK(dissipation_increment(p, a, b, 0.0) == doctest::Approx(0.15).epsilon(1e-12));

  ThermoState c = a;
  c.chi_S = 0.1;
  CHECK(dissipation_increment(p, c, a, 0.0) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("dissipation is positively homogeneous: subdivision adds up") {
  const MaterialParams p = with_d(0.4, 0.0, 0.3, 0.01);
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    ThermoState a;
    a.theta = 300.0;
    a.chi_M = 0.2 * uni(gen);
    a.chi_S = 0.2 * uni(gen);
    a.d_tr = p.xi_s * axial_unit_deviator();
    ThermoState b = a;
    b.chi_M = a.chi_M + 0.5 * (uni(gen) - 0.5);
    b.chi_S = a.chi_S + 0.5 * uni(gen);
    const double sigma_m = 10.0 * (uni(gen) - 0.5);
    // freeze the coefficient at the start for every subdivision, as the
    // incremental solver does
    const double d = d_eval(p, a.chi_S, sigma_m);
    auto increment = [&](const ThermoState& x, const ThermoState& y) {
      const double dM = y.chi_M - x.chi_M;
      const double dS = y.chi_S - x.chi_S;
      return std::abs(dM) + std::abs(dS) + d * std::max(dS, 0.0);
    };
    const double whole = increment(a, b);
    const int n = 7;
    double sum = 0.0;
    ThermoState prev = a;
    for (int k = 1; k <= n; ++k) {
      ThermoState mid = a;
      mid.chi_M = a.chi_M + (b.chi_M - a.chi_M) * k / n;
      mid.chi_S = a.chi_S + (b.chi_S - a.chi_S) * k / n;
      sum += increment(prev, mid);
      prev = mid;
    }
    CHECK(sum == doctest::Approx(whole).epsilon(1e-12));
  }
}
