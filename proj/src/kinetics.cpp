#include "sma/kinetics.hpp"

#include <cmath>
#include <stdexcept>

namespace sma {

double r_eval(const MaterialParams& p, double drive_S, double chi_S, double sigma_m) {
  if (drive_S < 0.0) return 1.0;
  return 1.0 + d_eval(p, chi_S, sigma_m);
}

double yield_fm(double drive_M) { return std::abs(drive_M) - 1.0; }

double yield_fs(const MaterialParams& p, double drive_S, double chi_S, double sigma_m) {
  return std::abs(drive_S) - r_eval(p, drive_S, chi_S, sigma_m);
}

DevTensor3 tangential_drive(const DevTensor3& B_d, const DevTensor3& d_tr) {
  const double n = frob_norm(d_tr);
  if (!(n > 0.0)) throw std::domain_error("tangential_drive: d_tr has zero norm");
  const DevTensor3 nhat = (1.0 / n) * d_tr;
  const double normal = frob_inner(B_d, nhat);
  return -(B_d - normal * nhat);
}

std::pair<double, double> yield_fd(const DevTensor3& B_d, const DevTensor3& d_tr, double chi_S,
                                   double xi_s) {
  const double n = frob_norm(d_tr);
  if (std::abs(n - xi_s) > 1e-6 * (1.0 + xi_s))
    throw std::domain_error("yield_fd: d_tr is not on the orientation sphere");
  const double gt = frob_norm(tangential_drive(B_d, d_tr));
  return {gt - chi_S, gt};
}

double dissipation_increment(const MaterialParams& p, const ThermoState& old_state,
                             const ThermoState& new_state, double sigma_m) {
  const double dM = new_state.chi_M - old_state.chi_M;
  const double dS = new_state.chi_S - old_state.chi_S;
  const double d = d_eval(p, old_state.chi_S, sigma_m);
  const double forward_S = dS > 0.0 ? dS : 0.0;
  const double dd = frob_norm(new_state.d_tr - old_state.d_tr);
  return std::abs(dM) + std::abs(dS) + d * forward_S + old_state.chi_S * dd;
}

}  // namespace sma
