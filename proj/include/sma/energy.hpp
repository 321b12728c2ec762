#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "sma/material.hpp"
#include "sma/tensor.hpp"

namespace sma {

/// Full state of a material point.
///
/// Feasibility means (chi_M, chi_S) lies in the admissible triangle
/// K = {chi_M >= 0, chi_S >= 0, chi_M + chi_S <= 1} and, once any oriented
/// martensite exists, ||d_tr|| = xi_s. Before nucleation d_tr may be the
/// zero tensor (orientation not yet selected).
struct ThermoState {
  SymTensor3 eps;       ///< total small strain
  double theta = 300.0; ///< absolute temperature (K)
  double chi_M = 0.0;   ///< twinned (multi-variant) martensite fraction
  double chi_S = 0.0;   ///< detwinned (oriented) martensite fraction
  DevTensor3 d_tr;      ///< orientation tensor of the transformation strain
};

/// Smooth (energetic) thermodynamic forces, the partial derivatives of the
/// free energy with respect to the internal variables. Constraint reactions
/// are not included; the integrator supplies those.
struct Forces {
  double B_M = 0.0;
  double B_S = 0.0;
  DevTensor3 B_d;
};

/// Rates (or increments) of the internal variables.
struct StateRates {
  double chi_M = 0.0;
  double chi_S = 0.0;
  DevTensor3 d_tr;
};

struct FeasibilityError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Empty string when the state is feasible, otherwise a description naming
/// the violated constraint. `tol_freeze` is the chi_S level below which the
/// orientation tensor is considered inactive and may have zero norm.
std::string feasibility_violation(const MaterialParams& p, const ThermoState& s,
                                  double tol = 1e-9, double tol_freeze = 1e-8);

void require_feasible(const MaterialParams& p, const ThermoState& s);

/// Cauchy stress sigma = sigma_m I + S with sigma_m = (lambda + 2mu/3) tr eps
/// and S = 2mu (dev eps - chi_S d_tr).
SymTensor3 stress(const MaterialParams& p, const ThermoState& s);

/// Mean stress tr(sigma)/3.
double mean_stress(const MaterialParams& p, const ThermoState& s);

/// Interaction energy
///   C_MS u v + (C_AM u + C_AS v)(1-u-v) + C_AMS u v (1-u-v)
///   + H_M/2 u^2 + H_S/2 v^2
/// with u = chi_M, v = chi_S.
double psi_int(const MaterialParams& p, double chi_M, double chi_S);

/// Closed-form (d/du, d/dv) of psi_int.
std::pair<double, double> psi_int_partials(const MaterialParams& p, double chi_M, double chi_S);

/// Helmholtz free energy (finite part). Throws FeasibilityError for states
/// outside the constraint set; the indicator terms are represented as
/// feasibility checks, never as infinities.
double free_energy(const MaterialParams& p, const ThermoState& s);

/// Smooth forces conjugate to (chi_M, chi_S, d_tr).
Forces forces_smooth(const MaterialParams& p, const ThermoState& s);

/// Entropy -dPsi/dtheta.
double entropy(const MaterialParams& p, const ThermoState& s);

/// Mechanical dissipation source
///   |chi_M_rate| + |chi_S_rate| + d(chi_S, sigma_m)(chi_S_rate)^+
///   + chi_S ||d_tr_rate||,
/// nonnegative by construction.
double heating_rate(const MaterialParams& p, const ThermoState& s, const StateRates& rates,
                    const SymTensor3& sigma);

}  // namespace sma
