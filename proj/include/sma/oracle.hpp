#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sma/energy.hpp"
#include "sma/integrator.hpp"
#include "sma/material.hpp"

namespace sma {

/// Brute-force reference for step_phases: exhaustive evaluation of the
/// incremental functional on a triangular grid of the given spacing,
/// boundary included. Ties go to the point closest to the current
/// fractions, then lexicographically.
std::pair<double, double> oracle_phases_grid(const MaterialParams& p, const ThermoState& s,
                                             double resolution);

/// Central finite differences of the free energy with respect to chi_M,
/// chi_S and the orientation tensor. The orientation perturbations are
/// re-projected to the sphere, so the reported B_d is the tangential
/// gradient. Requires a state strictly inside the triangle.
Forces fd_forces(const MaterialParams& p, const ThermoState& s, double h);

/// Finite-difference Cauchy stress: central differences of the free energy
/// with respect to the strain components.
SymTensor3 fd_stress(const MaterialParams& p, const ThermoState& s, double h);

/// Finite-difference entropy -dPsi/dtheta.
double fd_entropy(const MaterialParams& p, const ThermoState& s, double h);

/// Verification twin of project_K: enumerates the interior, the three edge
/// segments and the three vertices and returns the closest candidate.
std::pair<double, double> oracle_project(double chi_M, double chi_S);

/// Deterministic sampling used by the check suites and tests.
MaterialParams random_params(std::mt19937_64& gen);
ThermoState random_state(const MaterialParams& p, std::mt19937_64& gen, double chi_margin);
DevTensor3 random_unit_deviator(std::mt19937_64& gen);

struct CheckReport {
  int fd_samples = 0, fd_failures = 0;
  double fd_worst = 0.0;
  int oracle_samples = 0, oracle_failures = 0;
  double oracle_worst = 0.0;
  int project_samples = 0, project_failures = 0;
  double project_worst = 0.0;
  bool ok() const { return fd_failures == 0 && oracle_failures == 0 && project_failures == 0; }
  std::string summary() const;
};

/// Runs the three verification suites with a seeded generator.
CheckReport run_check(std::uint64_t seed, int fd_samples, int oracle_samples,
                      double resolution = 1e-3);

}  // namespace sma
