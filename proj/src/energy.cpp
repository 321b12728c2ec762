#include "sma/energy.hpp"

#include <cmath>
#include <sstream>

namespace sma {

std::string feasibility_violation(const MaterialParams& p, const ThermoState& s,
                                  double tol, double tol_freeze) {
  std::ostringstream os;
  if (!(s.theta > 0.0)) {
    os << "temperature must be positive (theta = " << s.theta << ")";
    return os.str();
  }
  if (s.chi_M < -tol || s.chi_S < -tol || s.chi_M + s.chi_S > 1.0 + tol) {
    os << "phase-fraction constraint violated: (chi_M, chi_S) = (" << s.chi_M << ", " << s.chi_S
       << ") outside the admissible triangle";
    return os.str();
  }
  const double n = frob_norm(s.d_tr);
  const bool axis_set = n > 0.5 * p.xi_s;
  if (s.chi_S > tol_freeze || axis_set) {
    if (std::abs(n - p.xi_s) > tol * (1.0 + p.xi_s)) {
      os << "orientation-norm constraint violated: ||d_tr|| = " << n << ", expected xi_s = "
         << p.xi_s;
      return os.str();
    }
  }
  return {};
}

void require_feasible(const MaterialParams& p, const ThermoState& s) {
  auto msg = feasibility_violation(p, s);
  if (!msg.empty()) throw FeasibilityError(msg);
}

SymTensor3 stress(const MaterialParams& p, const ThermoState& s) {
  const double sigma_m = bulk_modulus(p) * trace(s.eps);
  const DevTensor3 sd = 2.0 * p.mu * (dev(s.eps) - s.chi_S * s.d_tr);
  SymTensor3 out = sd;
  out.xx += sigma_m;
  out.yy += sigma_m;
  out.zz += sigma_m;
  return out;
}

double mean_stress(const MaterialParams& p, const ThermoState& s) {
  return bulk_modulus(p) * trace(s.eps);
}

double psi_int(const MaterialParams& p, double u, double v) {
  const double w = 1.0 - u - v;
  return p.C_MS * u * v + (p.C_AM * u + p.C_AS * v) * w + p.C_AMS * u * v * w +
         0.5 * p.H_M * u * u + 0.5 * p.H_S * v * v;
}

std::pair<double, double> psi_int_partials(const MaterialParams& p, double u, double v) {
  const double w = 1.0 - u - v;
  const double du = p.C_MS * v + p.C_AM * w - (p.C_AM * u + p.C_AS * v) + p.C_AMS * v * (w - u) +
                    p.H_M * u;
  const double dv = p.C_MS * u + p.C_AS * w - (p.C_AM * u + p.C_AS * v) + p.C_AMS * u * (w - v) +
                    p.H_S * v;
  return {du, dv};
}

double free_energy(const MaterialParams& p, const ThermoState& s) {
  require_feasible(p, s);
  const double tr_eps = trace(s.eps);
  const DevTensor3 ed = dev(s.eps) - s.chi_S * s.d_tr;
  const double psi_el = (0.5 * p.lambda + p.mu / 3.0) * tr_eps * tr_eps + p.mu * frob_inner(ed, ed);
  const double psi_id = p.c_s * ((s.theta - p.theta_0) - s.theta * std::log(s.theta));
  const double chi_A = 1.0 - s.chi_M - s.chi_S;
  const double psi_ch = chi_A * h_eval(p, Phase::austenite, s.theta) +
                        s.chi_M * h_eval(p, Phase::twinned_martensite, s.theta) +
                        s.chi_S * h_eval(p, Phase::detwinned_martensite, s.theta) +
                        frob_inner(h_d_eval(p, s.theta), s.d_tr);
  return psi_el + psi_id + psi_ch + psi_int(p, s.chi_M, s.chi_S);
}

Forces forces_smooth(const MaterialParams& p, const ThermoState& s) {
  require_feasible(p, s);
  const auto [dpsi_du, dpsi_dv] = psi_int_partials(p, s.chi_M, s.chi_S);
  const double h_A = h_eval(p, Phase::austenite, s.theta);
  const double h_M = h_eval(p, Phase::twinned_martensite, s.theta);
  const double h_S = h_eval(p, Phase::detwinned_martensite, s.theta);
  const DevTensor3 ed = dev(s.eps) - s.chi_S * s.d_tr;

  Forces f;
  f.B_M = -h_A + h_M + dpsi_du;
  f.B_S = -h_A + h_S + dpsi_dv - 2.0 * p.mu * frob_inner(ed, s.d_tr);
  f.B_d = -2.0 * p.mu * s.chi_S * ed + h_d_eval(p, s.theta);
  return f;
}

double entropy(const MaterialParams& p, const ThermoState& s) {
  if (!(s.theta > 0.0)) throw std::domain_error("entropy: temperature must be positive");
  const double chi_A = 1.0 - s.chi_M - s.chi_S;
  return p.c_s * std::log(s.theta) - p.beta_A * chi_A - p.beta_M * s.chi_M - p.beta_S * s.chi_S -
         frob_inner(p.h_d_coeff, s.d_tr);
}

double heating_rate(const MaterialParams& p, const ThermoState& s, const StateRates& rates,
                    const SymTensor3& sigma) {
  const double sigma_m = trace(sigma) / 3.0;
  const double d = d_eval(p, s.chi_S, sigma_m);
  const double forward_S = rates.chi_S > 0.0 ? rates.chi_S : 0.0;
  return std::abs(rates.chi_M) + std::abs(rates.chi_S) + d * forward_S +
         s.chi_S * frob_norm(rates.d_tr);
}

}  // namespace sma
