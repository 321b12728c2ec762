#include "sma/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sma {

std::pair<double, double> oracle_phases_grid(const MaterialParams& p, const ThermoState& s,
                                             double resolution) {
  if (!(resolution > 0.0) || resolution > 0.1)
    throw std::invalid_argument("oracle_phases_grid: resolution must be in (0, 0.1]");
  require_feasible(p, s);
  const int n = std::max(1, static_cast<int>(std::lround(1.0 / resolution)));
  const double sigma_m = mean_stress(p, s);
  const double d = d_eval(p, s.chi_S, sigma_m);
  const double u0 = s.chi_M, v0 = s.chi_S;

  // The incremental functional evaluated through the public energy path,
  // with the asymmetry coefficient frozen at the current state exactly as in
  // the solver.
  ThermoState probe = s;
  auto objective = [&](double u, double v) {
    probe.chi_M = u;
    probe.chi_S = v;
    const double dv = v - v0;
    return free_energy(p, probe) + std::abs(u - u0) + std::abs(dv) + d * (dv > 0.0 ? dv : 0.0);
  };

  double best = std::numeric_limits<double>::infinity();
  double bu = u0, bv = v0;
  bool have_best = false;
  const double inv_n = 1.0 / n;
  for (int i = 0; i <= n; ++i) {
    const double u = i * inv_n;
    const int jmax = n - i;
    for (int j = 0; j <= jmax; ++j) {
      const double v = j * inv_n;
      const double J = objective(u, v);
      if (!std::isfinite(J)) continue;
      if (!have_best) {
        have_best = true;
        best = J;
        bu = u;
        bv = v;
        continue;
      }
      const double tie = 1e-13 * (1.0 + std::abs(best));
      if (J < best - tie) {
        best = J;
        bu = u;
        bv = v;
      } else if (J <= best + tie) {
        const double dn = (u - u0) * (u - u0) + (v - v0) * (v - v0);
        const double db = (bu - u0) * (bu - u0) + (bv - v0) * (bv - v0);
        if (dn < db - 1e-30 || (dn <= db + 1e-30 && (u < bu || (u == bu && v < bv)))) {
          best = std::min(best, J);
          bu = u;
          bv = v;
        }
      }
    }
  }
  return {bu, bv};
}

namespace {

double psi_at_chi(const MaterialParams& p, const ThermoState& s, double u, double v) {
  ThermoState t = s;
  t.chi_M = u;
  t.chi_S = v;
  return free_energy(p, t);
}

}  // namespace

Forces fd_forces(const MaterialParams& p, const ThermoState& s, double h) {
  if (!(h >= 1e-8 && h <= 1e-4)) throw std::invalid_argument("fd_forces: h must be in [1e-8, 1e-4]");
  auto central_chi = [&](bool on_M, double step) {
    const double u = s.chi_M, v = s.chi_S;
    const double up = on_M ? u + step : u;
    const double um = on_M ? u - step : u;
    const double vp = on_M ? v : v + step;
    const double vm = on_M ? v : v - step;
    return (psi_at_chi(p, s, up, vp) - psi_at_chi(p, s, um, vm)) / (2.0 * step);
  };
  auto chi_deriv = [&](bool on_M) {
    try {
      return central_chi(on_M, h);
    } catch (const FeasibilityError&) {
      // shrink once, then give up
      return central_chi(on_M, h / 10.0);
    }
  };

  Forces f;
  f.B_M = chi_deriv(true);
  f.B_S = chi_deriv(false);

  const double n = frob_norm(s.d_tr);
  if (n > 0.0) {
    // Tangential derivative on the sphere ||d_tr|| = xi_s. Perturbing a
    // stored off-diagonal component moves both matrix entries, so the
    // centered difference carries a factor 2 there.
    double* comp[6];
    DevTensor3 base = s.d_tr;
    comp[0] = &base.xx; comp[1] = &base.yy; comp[2] = &base.zz;
    comp[3] = &base.xy; comp[4] = &base.yz; comp[5] = &base.zx;
    double out[6];
    for (int k = 0; k < 6; ++k) {
      const double saved = *comp[k];
      *comp[k] = saved + h;
      DevTensor3 dp = p.xi_s * normalized_or_zero(dev(base));
      ThermoState sp = s;
      sp.d_tr = dp;
      const double fp = free_energy(p, sp);
      *comp[k] = saved - h;
      DevTensor3 dm = p.xi_s * normalized_or_zero(dev(base));
      ThermoState sm = s;
      sm.d_tr = dm;
      const double fm = free_energy(p, sm);
      *comp[k] = saved;
      const double scale = (k < 3) ? 1.0 : 0.5;
      out[k] = scale * (fp - fm) / (2.0 * h);
    }
    f.B_d.xx = out[0]; f.B_d.yy = out[1]; f.B_d.zz = out[2];
    f.B_d.xy = out[3]; f.B_d.yz = out[4]; f.B_d.zx = out[5];
    // the diagonal entries above are matrix-entry derivatives of a
    // constrained path; remove any residual trace from the projection step
    f.B_d = dev(static_cast<const SymTensor3&>(f.B_d));
  }
  return f;
}

SymTensor3 fd_stress(const MaterialParams& p, const ThermoState& s, double h) {
  SymTensor3 base = s.eps;
  double* comp[6] = {&base.xx, &base.yy, &base.zz, &base.xy, &base.yz, &base.zx};
  double out[6];
  for (int k = 0; k < 6; ++k) {
    const double saved = *comp[k];
    *comp[k] = saved + h;
    ThermoState sp = s;
    sp.eps = base;
    const double fp = free_energy(p, sp);
    *comp[k] = saved - h;
    ThermoState sm = s;
    sm.eps = base;
    const double fm = free_energy(p, sm);
    *comp[k] = saved;
    const double scale = (k < 3) ? 1.0 : 0.5;
    out[k] = scale * (fp - fm) / (2.0 * h);
  }
  return {out[0], out[1], out[2], out[3], out[4], out[5]};
}

double fd_entropy(const MaterialParams& p, const ThermoState& s, double h) {
  ThermoState sp = s, sm = s;
  sp.theta += h;
  sm.theta -= h;
  return -(free_energy(p, sp) - free_energy(p, sm)) / (2.0 * h);
}

std::pair<double, double> oracle_project(double u, double v) {
  struct Pt {
    double u, v;
  };
  std::vector<Pt> cands;
  if (u >= 0.0 && v >= 0.0 && u + v <= 1.0) cands.push_back({u, v});
  cands.push_back({std::min(std::max(u, 0.0), 1.0), 0.0});           // edge v = 0
  cands.push_back({0.0, std::min(std::max(v, 0.0), 1.0)});           // edge u = 0
  const double w = std::min(std::max(0.5 * (u - v + 1.0), 0.0), 1.0);
  cands.push_back({w, 1.0 - w});                                     // diagonal edge
  cands.push_back({0.0, 0.0});
  cands.push_back({1.0, 0.0});
  cands.push_back({0.0, 1.0});
  double best = std::numeric_limits<double>::infinity();
  Pt bp{0.0, 0.0};
  for (const Pt& c : cands) {
    const double dist = (c.u - u) * (c.u - u) + (c.v - v) * (c.v - v);
    if (dist < best) {
      best = dist;
      bp = c;
    }
  }
  return {bp.u, bp.v};
}

MaterialParams random_params(std::mt19937_64& gen) {
  auto uni = [&gen](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
  };
  MaterialParams p;
  p.mu = uni(5e3, 2e4);
  p.lambda = uni(5e3, 3e4);
  p.c_s = uni(0.5, 5.0);
  p.xi_s = uni(0.02, 0.08);
  p.theta_0 = uni(280.0, 310.0);
  p.beta_M = uni(0.0, 0.2);
  p.theta_M_ref = uni(280.0, 300.0);
  p.beta_S = uni(0.0, 0.2);
  p.theta_S_ref = uni(280.0, 300.0);
  p.beta_A = uni(0.0, 0.1);
  p.theta_A_ref = uni(280.0, 300.0);
  p.C_MS = uni(0.0, 2.0);
  p.C_AM = uni(0.0, 2.0);
  p.C_AS = uni(0.0, 2.0);
  p.C_AMS = uni(0.0, 2.0);
  p.H_M = (uni(0.0, 1.0) < 0.5) ? 0.0 : uni(0.0, 1.0);
  p.H_S = (uni(0.0, 1.0) < 0.5) ? 0.0 : uni(0.0, 1.0);
  p.d0 = uni(0.0, 1.0);
  p.d1 = uni(0.0, 1.0);
  p.d2 = uni(0.0, 1.0);
  p.k_d = uni(0.0, 0.05);
  return p;
}

DevTensor3 random_unit_deviator(std::mt19937_64& gen) {
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int attempt = 0; attempt < 100; ++attempt) {
    SymTensor3 a{nd(gen), nd(gen), nd(gen), nd(gen), nd(gen), nd(gen)};
    DevTensor3 d = dev(a);
    if (frob_norm(d) > 1e-3) return normalized_or_zero(d);
  }
  return axial_unit_deviator();
}

ThermoState random_state(const MaterialParams& p, std::mt19937_64& gen, double chi_margin) {
  auto uni = [&gen](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
  };
  ThermoState s;
  s.theta = uni(270.0, 320.0);
  // barycentric draw inside the triangle with the requested margin
  double a = uni(chi_margin, 1.0 - 2.0 * chi_margin);
  double b = uni(chi_margin, 1.0 - chi_margin - a);
  s.chi_M = a;
  s.chi_S = b;
  s.d_tr = p.xi_s * random_unit_deviator(gen);
  const DevTensor3 dir = random_unit_deviator(gen);
  const double amp = uni(-0.06, 0.06);
  SymTensor3 eps = amp * static_cast<const SymTensor3&>(dir);
  const double vol = uni(-0.01, 0.01);
  eps.xx += vol / 3.0;
  eps.yy += vol / 3.0;
  eps.zz += vol / 3.0;
  s.eps = eps;
  return s;
}

std::string CheckReport::summary() const {
  std::ostringstream os;
  os << "fd-forces      : " << (fd_samples - fd_failures) << "/" << fd_samples
     << " ok, worst rel err " << fd_worst << "\n"
     << "phase-grid     : " << (oracle_samples - oracle_failures) << "/" << oracle_samples
     << " ok, worst coord dev " << oracle_worst << "\n"
     << "projection     : " << (project_samples - project_failures) << "/" << project_samples
     << " ok, worst dev " << project_worst << "\n";
  return os.str();
}

CheckReport run_check(std::uint64_t seed, int fd_samples, int oracle_samples, double resolution) {
  CheckReport rep;
  std::mt19937_64 gen(seed);

  // gradient consistency
  rep.fd_samples = fd_samples;
  for (int i = 0; i < fd_samples; ++i) {
    const MaterialParams p = random_params(gen);
    const ThermoState s = random_state(p, gen, 0.05);
    const Forces an = forces_smooth(p, s);
    const Forces fd = fd_forces(p, s, 1e-6);
    const DevTensor3 an_t = -1.0 * tangential_drive(an.B_d, s.d_tr);
    double worst = 0.0;
    auto rel = [](double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); };
    worst = std::max(worst, rel(fd.B_M, an.B_M));
    worst = std::max(worst, rel(fd.B_S, an.B_S));
    const SymTensor3 diff = fd.B_d - an_t;
    worst = std::max(worst, frob_norm(diff) / (1.0 + frob_norm(an_t)));
    const SymTensor3 sig_an = stress(p, s);
    const SymTensor3 sig_fd = fd_stress(p, s, 1e-6);
    worst = std::max(worst, frob_norm(sig_fd - sig_an) / (1.0 + frob_norm(sig_an)));
    rep.fd_worst = std::max(rep.fd_worst, worst);
    if (worst > 1e-6) ++rep.fd_failures;
  }

  // solver vs grid oracle
  rep.oracle_samples = oracle_samples;
  SolverOptions opt;
  for (int i = 0; i < oracle_samples; ++i) {
    const MaterialParams p = random_params(gen);
    const ThermoState s = random_state(p, gen, 0.0);
    const auto grid = oracle_phases_grid(p, s, resolution);
    const PhaseSolution ps = step_phases(p, s, opt);
    const double dev_u = std::abs(grid.first - ps.chi_M);
    const double dev_v = std::abs(grid.second - ps.chi_S);
    const double worst = std::max(dev_u, dev_v);
    rep.oracle_worst = std::max(rep.oracle_worst, worst);
    if (worst > 2.0 * resolution) ++rep.oracle_failures;
  }

  // projection twin
  const int np = 10000;
  rep.project_samples = np;
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  for (int i = 0; i < np; ++i) {
    const double u = box(gen), v = box(gen);
    const auto a = project_K(u, v);
    const auto b = oracle_project(u, v);
    const double dev_p = std::max(std::abs(a.first - b.first), std::abs(a.second - b.second));
    rep.project_worst = std::max(rep.project_worst, dev_p);
    if (dev_p > 1e-12) ++rep.project_failures;
  }
  return rep;
}

}  // namespace sma
