#include "sma/program.hpp"

#include <cmath>
#include <sstream>

namespace sma {

double Trajectory::total_dissipation() const {
  double sum = 0.0;
  for (const auto& pt : points) sum += pt.res.dissipation;
  return sum;
}

LoadingProgram builtin_case1() {
  LoadingProgram prog;
  prog.initial.theta = 313.0;

  Segment cool;
  cool.mode = ControlMode::stress;
  cool.has_explicit_start = true;
  cool.has_explicit_theta_start = true;
  cool.start.mode = ControlMode::stress;
  cool.start.theta.value = 313.0;
  cool.end = cool.start;
  cool.end.theta.value = 278.0;
  cool.steps = 500;

  Segment heat = cool;
  heat.start.theta.value = 278.0;
  heat.end.theta.value = 313.0;
  prog.segments = {cool, heat};
  return prog;
}

LoadingProgram builtin_case2() {
  LoadingProgram prog;
  prog.initial.theta = 313.0;
  const DevTensor3 n_hat = axial_unit_deviator();

  Segment load;
  load.mode = ControlMode::proportional;
  load.has_explicit_start = true;
  load.has_explicit_theta_start = true;
  load.start.mode = ControlMode::proportional;
  load.start.direction = n_hat;
  load.start.target_scalar = 0.0;
  load.start.theta.value = 313.0;
  load.end = load.start;
  load.end.target_scalar = 0.06;
  load.steps = 613;

  Segment unload = load;
  unload.start.target_scalar = 0.06;
  unload.end.target_scalar = 0.0;
  prog.segments = {load, unload};
  return prog;
}

namespace {

void fill_mechanical_start(const MaterialParams& p, const ThermoState& s, const Segment& seg,
                           Controls& c) {
  c.target_eps = s.eps;
  c.target_sigma = stress(p, s);
  if (seg.mode == ControlMode::proportional)
    c.target_scalar = frob_inner(dev(s.eps), seg.end.direction);
}

void check_continuity(const MaterialParams& p, const ThermoState& s, const Segment& seg,
                      std::size_t index, bool check_mechanical, bool check_theta) {
  const Controls& st = seg.start;
  const double tol = 1e-9;
  bool ok = true;
  if (check_mechanical) {
    switch (seg.mode) {
      case ControlMode::strain:
        ok = frob_norm(st.target_eps - s.eps) <= tol * (1.0 + frob_norm(s.eps));
        break;
      case ControlMode::stress: {
        const SymTensor3 sig = stress(p, s);
        ok = frob_norm(st.target_sigma - sig) <= tol * (1.0 + frob_norm(sig));
        break;
      }
      case ControlMode::proportional: {
        const double amp = frob_inner(dev(s.eps), st.direction);
        ok = std::abs(st.target_scalar - amp) <= tol * (1.0 + std::abs(amp));
        break;
      }
    }
  }
  if (check_theta && !st.theta.adiabatic &&
      std::abs(st.theta.value - s.theta) > tol * (1.0 + s.theta))
    ok = false;
  if (!ok) {
    std::ostringstream os;
    os << "run_program: segment " << index << " has an explicit start discontinuous with the "
       << "running state";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

Trajectory run_program(const MaterialParams& p, const LoadingProgram& prog,
                       const SolverOptions& opt) {
  validate_or_throw(p);
  require_feasible(p, prog.initial);
  Trajectory traj;
  ThermoState s = prog.initial;
  int global_step = 0;
  for (std::size_t i = 0; i < prog.segments.size(); ++i) {
    const Segment& seg = prog.segments[i];
    ControlPath path;
    path.end = seg.end;
    path.end.mode = seg.mode;
    path.start = seg.start;
    check_continuity(p, s, seg, i, seg.has_explicit_start, seg.has_explicit_theta_start);
    if (!seg.has_explicit_start) fill_mechanical_start(p, s, seg, path.start);
    if (!seg.has_explicit_theta_start && !path.start.theta.adiabatic)
      path.start.theta.value = s.theta;
    path.start.mode = seg.mode;
    path.start.direction = seg.end.direction;
    path.steps = seg.steps;

    std::vector<StepResult> results;
    try {
      results = run_segment(p, s, path, opt);
    } catch (const SolverError& e) {
      std::ostringstream os;
      os << "run_program: segment " << i << ": " << e.what();
      throw SolverError(os.str(), e.residual);
    }
    for (std::size_t k = 0; k < results.size(); ++k) {
      TrajectoryPoint pt;
      pt.step = ++global_step;
      pt.t = static_cast<double>(i) + static_cast<double>(k + 1) / seg.steps;
      pt.res = std::move(results[k]);
      pt.psi = free_energy(p, pt.res.state);
      traj.points.push_back(std::move(pt));
    }
    if (!traj.points.empty()) s = traj.points.back().res.state;
  }
  return traj;
}

}  // namespace sma
