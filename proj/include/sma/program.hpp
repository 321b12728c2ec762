#pragma once

#include <string>
#include <vector>

#include "sma/integrator.hpp"

namespace sma {

/// One leg of a loading program. Targets not explicitly given chain from the
/// running state at segment start; explicit starts are validated for
/// continuity when the program runs.
struct Segment {
  ControlMode mode = ControlMode::strain;
  bool has_explicit_start = false;        ///< mechanical start target given
  bool has_explicit_theta_start = false;  ///< prescribed start temperature given
  Controls start;
  Controls end;
  int steps = 1;
};

struct LoadingProgram {
  ThermoState initial;
  std::vector<Segment> segments;
};

struct TrajectoryPoint {
  int step = 0;    ///< 1-based global step index
  double t = 0.0;  ///< segment-normalized pseudo-time
  StepResult res;
  double psi = 0.0;  ///< free energy at the end-of-step state
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  double total_dissipation() const;
};

/// Temperature-driven scenario: zero stress held while the temperature ramps
/// down through the twinned-martensite transformation and back up through
/// the reverse one.
LoadingProgram builtin_case1();

/// Stress-induced scenario: proportional strain amplitude along a fixed unit
/// deviator ramps up past completion of the oriented transformation and back
/// to zero at constant temperature.
LoadingProgram builtin_case2();

/// Runs all segments sequentially. Explicit segment starts are validated
/// against the running state; solver errors are annotated with (segment,
/// step) coordinates.
Trajectory run_program(const MaterialParams& p, const LoadingProgram& prog,
                       const SolverOptions& opt);

}  // namespace sma
