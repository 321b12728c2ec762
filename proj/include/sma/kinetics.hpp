#pragma once

#include <utility>

#include "sma/energy.hpp"
#include "sma/material.hpp"

namespace sma {

/// Yield values at the end of a step. The scalar arguments of the yield
/// functions are driving forces: positive values push the associated phase
/// fraction up (forward transformation), negative values push it down.
struct YieldReport {
  double F_M = -1.0;
  double F_S = -1.0;
  double F_d = 0.0;
  double R = 1.0;
  double tangential_drive_norm = 0.0;
};

/// Asymmetric threshold of the detwinned-martensite mechanism:
/// 1 for reverse drive, 1 + d(chi_S, sigma_m) for forward drive.
double r_eval(const MaterialParams& p, double drive_S, double chi_S, double sigma_m);

/// |drive| - 1.
double yield_fm(double drive_M);

/// |drive| - r_eval(drive, chi_S, sigma_m).
double yield_fs(const MaterialParams& p, double drive_S, double chi_S, double sigma_m);

/// Drive for the reorientation mechanism: the negative of the component of
/// B_d tangent to the sphere ||d_tr|| = xi_s. The normal component is
/// absorbed by the reaction gamma * d_tr.
DevTensor3 tangential_drive(const DevTensor3& B_d, const DevTensor3& d_tr);

/// Returns (F_d, ||G_t||) with F_d = ||G_t|| - chi_S and G_t the tangential
/// drive. Requires ||d_tr|| = xi_s.
std::pair<double, double> yield_fd(const DevTensor3& B_d, const DevTensor3& d_tr, double chi_S,
                                   double xi_s);

/// Dissipation-distance of one increment,
///   |d chi_M| + |d chi_S| + d(chi_S_old, sigma_m)(d chi_S)^+
///   + chi_S_old ||d d_tr||.
/// The asymmetry coefficient and the reorientation weight are evaluated at
/// the old state.
double dissipation_increment(const MaterialParams& p, const ThermoState& old_state,
                             const ThermoState& new_state, double sigma_m);

}  // namespace sma
