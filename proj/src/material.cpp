#include "sma/material.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sma {

MaterialParams demo_params() {
  MaterialParams p;
  p.lambda = 15000.0;
  p.mu = 10000.0;
  p.c_s = 2.0;
  p.xi_s = 0.05;
  p.theta_0 = 293.0;
  p.beta_M = 0.1;
  p.theta_M_ref = 293.0;
  p.beta_S = 0.1;
  p.theta_S_ref = 285.0;
  p.beta_A = 0.0;
  p.theta_A_ref = 293.0;
  p.d0 = 0.25;
  p.d1 = 0.0;
  p.d2 = 0.5;
  p.k_d = 0.02;
  return p;
}

double h_eval(const MaterialParams& p, Phase phase, double theta) {
  if (!(theta > 0.0)) throw std::domain_error("h_eval: temperature must be positive");
  switch (phase) {
    case Phase::austenite:
      return p.beta_A * (theta - p.theta_A_ref);
    case Phase::twinned_martensite:
      return p.beta_M * (theta - p.theta_M_ref);
    case Phase::detwinned_martensite:
      return p.beta_S * (theta - p.theta_S_ref);
  }
  return 0.0;
}

DevTensor3 h_d_eval(const MaterialParams& p, double theta) {
  return (theta - p.theta_0) * p.h_d_coeff;
}

double d_eval(const MaterialParams& p, double chi_S, double sigma_m) {
  // Accept roundoff-level excursions produced by the solver.
  const double slack = 1e-9;
  if (chi_S < -slack || chi_S > 1.0 + slack)
    throw std::domain_error("d_eval: chi_S outside [0, 1]");
  const double c = std::min(1.0, std::max(0.0, chi_S));
  return p.d0 + p.d1 * c + p.d2 * 0.5 * (1.0 - std::tanh(p.k_d * sigma_m));
}

std::vector<std::string> validate(const MaterialParams& p) {
  std::vector<std::string> errors;
  auto require = [&errors](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };
  require(p.mu > 0.0, "mu must be positive");
  require(p.lambda + 2.0 * p.mu / 3.0 > 0.0, "lambda + 2*mu/3 must be positive (bulk response)");
  require(p.c_s > 0.0,
          "c_s must be positive (heat-capacity coefficient of the temperature "
          "equation; with affine thermal functions it equals c_s)");
  require(p.xi_s > 0.0, "xi_s must be positive");
  require(p.theta_0 > 0.0, "theta_0 must be positive");
  require(p.C_MS >= 0.0, "C_MS must be nonnegative");
  require(p.C_AM >= 0.0, "C_AM must be nonnegative");
  require(p.C_AS >= 0.0, "C_AS must be nonnegative");
  require(p.C_AMS >= 0.0, "C_AMS must be nonnegative");
  require(p.H_M >= 0.0, "H_M must be nonnegative");
  require(p.H_S >= 0.0, "H_S must be nonnegative");
  require(p.d0 >= 0.0, "d0 must be nonnegative");
  require(p.d1 >= 0.0, "d1 must be nonnegative");
  require(p.d2 >= 0.0, "d2 must be nonnegative");
  const double hd_trace = trace(p.h_d_coeff);
  require(std::abs(hd_trace) <= 1e-12 * (1.0 + frob_norm(p.h_d_coeff)),
          "h_d_coeff must be deviatoric");
  return errors;
}

void validate_or_throw(const MaterialParams& p) {
  const auto errors = validate(p);
  if (errors.empty()) return;
  std::ostringstream os;
  os << "invalid material parameters:";
  for (const auto& e : errors) os << "\n  - " << e;
  throw std::invalid_argument(os.str());
}

}  // namespace sma
