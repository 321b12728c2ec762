#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "sma/energy.hpp"
#include "sma/kinetics.hpp"
#include "sma/material.hpp"

namespace sma {

struct SolverOptions {
  double tol_kkt = 1e-10;        ///< stationarity / complementarity residual target
  double tol_chi_freeze = 1e-8;  ///< chi_S level below which d_tr is frozen
  int max_outer = 50;            ///< outer sweeps (phases <-> reorientation, stress loop)
  int max_bisect = 200;          ///< bisection iterations for the reorientation solve
  int substep_limit = 16;        ///< max subdivision of a failing increment in run_segment
};

enum class ControlMode { strain, stress, proportional };

/// Temperature handling of one increment: either a prescribed end value or a
/// lumped adiabatic update c_s dtheta = D - k_ex (theta - theta_env) dt.
struct ThetaControl {
  bool adiabatic = false;
  double value = 300.0;
  double k_ex = 0.0;
  double theta_env = 300.0;
  double dt = 1.0;
};

struct Controls {
  ControlMode mode = ControlMode::strain;
  SymTensor3 target_eps;
  SymTensor3 target_sigma;
  double target_scalar = 0.0;  ///< strain amplitude along `direction` (proportional mode)
  DevTensor3 direction;        ///< unit deviator for proportional mode
  ThetaControl theta;
};

struct Multipliers {
  double zeta_M = 0.0, zeta_S = 0.0, zeta_d = 0.0;
  double gamma_M = 0.0, gamma_S = 0.0, gamma_d = 0.0;
};

struct StepFlags {
  bool slip_M = false, slip_S = false, slip_d = false;
  bool d_tr_frozen = false;
};

struct StepResult {
  ThermoState state;
  Multipliers mult;
  YieldReport yields;
  Forces forces;  ///< smooth forces at the end-of-step state
  SymTensor3 sigma;
  double dissipation = 0.0;
  int outer_iters = 0;
  int evals = 0;
  StepFlags flags;
};

struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& msg, double residual_ = 0.0)
      : std::runtime_error(msg), residual(residual_) {}
  double residual;
};

/// Euclidean projection onto the triangle {u >= 0, v >= 0, u + v <= 1}.
std::pair<double, double> project_K(double chi_M, double chi_S);

struct PhaseSolution {
  double chi_M = 0.0, chi_S = 0.0;
  double zeta_M = 0.0, zeta_S = 0.0;
  double gamma_M = 0.0, gamma_S = 0.0;
  double drive_M = 0.0, drive_S = 0.0;  ///< -(B + gamma) at the end of the step
  double F_M = 0.0, F_S = 0.0;          ///< yield values including reactions
  double R = 1.0;                       ///< threshold applied to the S-mechanism
  double d_coeff = 0.0;                 ///< frozen asymmetry coefficient
  bool slip_M = false, slip_S = false;
  int evals = 0;
};

/// One increment of the phase fractions at fixed strain, temperature and
/// orientation: global minimizer of the incremental functional
///   J(u, v) = Psi(u, v) + |u - u0| + |v - v0| + d (v - v0)^+
/// over the triangle, with multipliers reconstructing stationarity.
PhaseSolution step_phases(const MaterialParams& p, const ThermoState& s,
                          const SolverOptions& opt);

struct ReorientationSolution {
  DevTensor3 d_tr;
  double zeta_d = 0.0;
  double gamma = 0.0;
  double F_d = 0.0;
  double drive_norm = 0.0;
  bool frozen = false;
  bool slip = false;
  int iters = 0;
};

/// One increment of the orientation tensor at fixed strain, temperature and
/// phase fractions. Slip moves d_tr on the sphere along the start-of-step
/// tangential drive until the end-of-step drive norm equals chi_S.
ReorientationSolution step_reorientation(const MaterialParams& p, const ThermoState& s,
                                         const SolverOptions& opt);

/// Full control increment: applies the control targets, alternates the two
/// sub-solves to a fixed point, handles nucleation of the orientation axis
/// and the temperature update.
StepResult step(const MaterialParams& p, const ThermoState& s, const Controls& c,
                const SolverOptions& opt);

struct ControlPath {
  Controls start;
  Controls end;
  int steps = 1;
};

/// Samples the control path into `steps` linear increments and applies
/// step() sequentially. A failing increment is retried with up to
/// `substep_limit` subdivisions before the error propagates (annotated with
/// the step index).
std::vector<StepResult> run_segment(const MaterialParams& p, const ThermoState& s0,
                                    const ControlPath& path, const SolverOptions& opt);

namespace detail {

/// Phase subproblem with the strain-dependent terms reduced to
///   E(u, v) = chem_M u + chem_S v + q_lin v + q_quad v^2 + psi_int(u, v).
/// Strain control: q_lin = -2 mu e:d_tr, q_quad = mu ||d_tr||^2.
/// Stress control (strain eliminated): q_lin = -dev(sigma):d_tr, q_quad = 0.
struct PhaseProblem {
  const MaterialParams* params = nullptr;
  double chem_M = 0.0, chem_S = 0.0;
  double q_lin = 0.0, q_quad = 0.0;
  double u0 = 0.0, v0 = 0.0;
  double d_coeff = 0.0;

  double B_M(double u, double v) const;
  double B_S(double u, double v) const;
  double smooth_energy(double u, double v) const;
  double objective(double u, double v) const;
};

PhaseProblem make_strain_phase_problem(const MaterialParams& p, const ThermoState& s);
PhaseProblem make_stress_phase_problem(const MaterialParams& p, const ThermoState& s,
                                       const SymTensor3& target_sigma);
PhaseSolution solve_phase_problem(const PhaseProblem& prob, const SolverOptions& opt);

}  // namespace detail

}  // namespace sma
