#pragma once

#include <string>
#include <vector>

#include "sma/tensor.hpp"

namespace sma {

enum class Phase { austenite, twinned_martensite, detwinned_martensite };

/// Model constants for the three-phase material point.
///
/// The thermal functions are affine, h_phase(theta) = beta_phase * (theta -
/// theta_phase_ref), so all second derivatives vanish and the heat-capacity
/// consistency condition reduces to c_s > 0. The tensor-valued thermal
/// function is h_d(theta) = h_d_coeff * (theta - theta_0), zero by default.
struct MaterialParams {
  double lambda = 0.0;   ///< Lame first constant (stress units)
  double mu = 0.0;       ///< shear modulus (stress units)
  double c_s = 0.0;      ///< specific heat per unit volume
  double xi_s = 0.0;     ///< transformation-strain magnitude of oriented martensite
  double theta_0 = 0.0;  ///< reference temperature (K)

  double beta_M = 0.0, theta_M_ref = 0.0;
  double beta_S = 0.0, theta_S_ref = 0.0;
  double beta_A = 0.0, theta_A_ref = 0.0;
  DevTensor3 h_d_coeff;

  // Interaction-energy constants and optional quadratic hardening.
  double C_MS = 0.0, C_AM = 0.0, C_AS = 0.0, C_AMS = 0.0;
  double H_M = 0.0, H_S = 0.0;

  // Kinetic-asymmetry function d(chi_S, sigma_m) =
  //   d0 + d1*chi_S + d2*(1 - tanh(k_d*sigma_m))/2.
  double d0 = 0.0, d1 = 0.0, d2 = 0.0, k_d = 0.0;
};

inline double bulk_modulus(const MaterialParams& p) { return p.lambda + 2.0 * p.mu / 3.0; }

/// Demo parameter set used by the built-in scenarios.
MaterialParams demo_params();

/// Affine thermal function of one phase. Throws std::domain_error for
/// non-positive temperature.
double h_eval(const MaterialParams& p, Phase phase, double theta);

/// Tensor thermal function h_d(theta).
DevTensor3 h_d_eval(const MaterialParams& p, double theta);

/// Kinetic-asymmetry coefficient; nonnegative for valid parameters.
/// Throws std::domain_error when chi_S lies outside [0, 1].
double d_eval(const MaterialParams& p, double chi_S, double sigma_m);

/// Itemized parameter validation; empty result means the set is usable.
std::vector<std::string> validate(const MaterialParams& p);

/// Convenience wrapper that throws std::invalid_argument listing all
/// violations.
void validate_or_throw(const MaterialParams& p);

}  // namespace sma
