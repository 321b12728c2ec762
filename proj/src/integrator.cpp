#include "sma/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace sma {

std::pair<double, double> project_K(double u, double v) {
  if (u + v <= 1.0) {
    // Box clamp lands inside the triangle whenever u + v <= 1.
    const double pu = std::min(std::max(u, 0.0), 1.0);
    const double pv = std::min(std::max(v, 0.0), 1.0);
    return {pu, pv};
  }
  const double w = 0.5 * (u - v + 1.0);
  if (w <= 0.0) return {0.0, 1.0};
  if (w >= 1.0) return {1.0, 0.0};
  double pu = w;
  double pv = 1.0 - w;
  if (pu + pv > 1.0) pv = 1.0 - pu;  // one-ulp guard
  return {pu, pv};
}

namespace detail {

double PhaseProblem::B_M(double u, double v) const {
  const auto parts = psi_int_partials(*params, u, v);
  return chem_M + parts.first;
}

double PhaseProblem::B_S(double u, double v) const {
  const auto parts = psi_int_partials(*params, u, v);
  return chem_S + q_lin + 2.0 * q_quad * v + parts.second;
}

double PhaseProblem::smooth_energy(double u, double v) const {
  return chem_M * u + chem_S * v + q_lin * v + q_quad * v * v + psi_int(*params, u, v);
}

double PhaseProblem::objective(double u, double v) const {
  const double du = u - u0;
  const double dv = v - v0;
  const double forward = dv > 0.0 ? dv : 0.0;
  return smooth_energy(u, v) + std::abs(du) + std::abs(dv) + d_coeff * forward;
}

PhaseProblem make_strain_phase_problem(const MaterialParams& p, const ThermoState& s) {
  PhaseProblem pr;
  pr.params = &p;
  const double h_A = h_eval(p, Phase::austenite, s.theta);
  pr.chem_M = h_eval(p, Phase::twinned_martensite, s.theta) - h_A;
  pr.chem_S = h_eval(p, Phase::detwinned_martensite, s.theta) - h_A;
  const DevTensor3 e = dev(s.eps);
  pr.q_lin = -2.0 * p.mu * frob_inner(e, s.d_tr);
  pr.q_quad = p.mu * frob_inner(s.d_tr, s.d_tr);
  pr.u0 = s.chi_M;
  pr.v0 = s.chi_S;
  pr.d_coeff = d_eval(p, s.chi_S, mean_stress(p, s));
  return pr;
}

PhaseProblem make_stress_phase_problem(const MaterialParams& p, const ThermoState& s,
                                       const SymTensor3& target_sigma) {
  PhaseProblem pr;
  pr.params = &p;
  const double h_A = h_eval(p, Phase::austenite, s.theta);
  pr.chem_M = h_eval(p, Phase::twinned_martensite, s.theta) - h_A;
  pr.chem_S = h_eval(p, Phase::detwinned_martensite, s.theta) - h_A;
  pr.q_lin = -frob_inner(dev(target_sigma), s.d_tr);
  pr.q_quad = 0.0;
  pr.u0 = s.chi_M;
  pr.v0 = s.chi_S;
  pr.d_coeff = d_eval(p, s.chi_S, trace(target_sigma) / 3.0);
  return pr;
}

namespace {

struct Cand {
  double u = 0.0, v = 0.0;
};

void curvatures(const PhaseProblem& pr, double u, double v, double& huu, double& huv,
                double& hvv) {
  const MaterialParams& p = *pr.params;
  huu = p.H_M - 2.0 * p.C_AM - 2.0 * p.C_AMS * v;
  huv = p.C_MS - p.C_AM - p.C_AS + p.C_AMS * (1.0 - 2.0 * u - 2.0 * v);
  hvv = p.H_S - 2.0 * p.C_AS - 2.0 * p.C_AMS * u + 2.0 * pr.q_quad;
}

void snap_candidate(const PhaseProblem& pr, double& u, double& v) {
  auto proj = project_K(u, v);
  u = proj.first;
  v = proj.second;
  const double snap = 1e-12;
  if (std::abs(u - pr.u0) <= snap) u = pr.u0;
  if (std::abs(v - pr.v0) <= snap) v = pr.v0;
  if (u < snap) u = 0.0;
  if (v < snap) v = 0.0;
  if (u + v > 1.0 - snap) {
    // preserve stick coordinates and vertices when closing the diagonal gap
    if (v == pr.v0)
      u = 1.0 - v;
    else if (u == pr.u0)
      v = 1.0 - u;
    else if (v == 0.0)
      u = 1.0;
    else if (u == 0.0)
      v = 1.0;
    else
      v = 1.0 - u;
  }
}

void add_candidate(const PhaseProblem& pr, std::vector<Cand>& out, double u, double v) {
  if (!std::isfinite(u) || !std::isfinite(v)) return;
  if (u < -0.5 || u > 1.5 || v < -0.5 || v > 1.5) return;
  snap_candidate(pr, u, v);
  out.push_back({u, v});
}

// Real roots of a t^2 + b t + c in [lo, hi].
void quad_roots_in(double a, double b, double c, double lo, double hi,
                   std::vector<double>& out) {
  const double scale = std::abs(a) + std::abs(b) + std::abs(c);
  if (scale == 0.0) return;
  if (std::abs(a) <= 1e-14 * scale) {
    if (std::abs(b) <= 1e-14 * scale) return;
    const double t = -c / b;
    if (t >= lo && t <= hi) out.push_back(t);
    return;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
  const double r1 = q / a;
  if (r1 >= lo && r1 <= hi) out.push_back(r1);
  if (q != 0.0) {
    const double r2 = c / q;
    if (r2 >= lo && r2 <= hi) out.push_back(r2);
  }
}

// Stationary points of the objective restricted to the segment
// x(t) = A + t (B - A), t in [0, 1]. The smooth directional derivative is
// quadratic in t, so three samples determine it exactly; the nonsmooth terms
// contribute piecewise constants between the kink crossings u = u0, v = v0.
void line_candidates(const PhaseProblem& pr, const Cand& A, const Cand& B,
                     std::vector<Cand>& out) {
  const double du = B.u - A.u;
  const double dv = B.v - A.v;
  if (du == 0.0 && dv == 0.0) return;
  auto at = [&](double t) { return Cand{A.u + t * du, A.v + t * dv}; };
  auto gsmooth = [&](double t) {
    const Cand x = at(t);
    return pr.B_M(x.u, x.v) * du + pr.B_S(x.u, x.v) * dv;
  };
  const double g0 = gsmooth(0.0), gh = gsmooth(0.5), g1 = gsmooth(1.0);
  const double qa = 2.0 * g0 - 4.0 * gh + 2.0 * g1;
  const double qb = -3.0 * g0 + 4.0 * gh - g1;
  const double qc = g0;

  std::vector<double> ts = {0.0, 1.0};
  if (du != 0.0) {
    const double t = (pr.u0 - A.u) / du;
    if (t > 0.0 && t < 1.0) ts.push_back(t);
  }
  if (dv != 0.0) {
    const double t = (pr.v0 - A.v) / dv;
    if (t > 0.0 && t < 1.0) ts.push_back(t);
  }
  std::sort(ts.begin(), ts.end());

  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double lo = ts[i], hi = ts[i + 1];
    if (hi - lo < 1e-15) continue;
    const Cand mid = at(0.5 * (lo + hi));
    double slip = 0.0;
    if (du != 0.0) slip += (mid.u > pr.u0 ? 1.0 : -1.0) * du;
    if (dv != 0.0) slip += (mid.v > pr.v0 ? 1.0 + pr.d_coeff : -1.0) * dv;
    roots.clear();
    quad_roots_in(qa, qb, qc + slip, lo, hi, roots);
    for (double t : roots) {
      const Cand x = at(t);
      add_candidate(pr, out, x.u, x.v);
    }
    add_candidate(pr, out, at(lo).u, at(lo).v);
    add_candidate(pr, out, at(hi).u, at(hi).v);
  }
}

// Interior stationary points with both fractions slipping. B_M is linear in
// u at fixed v, which eliminates u; the remaining residual in v is scanned
// for sign changes and bisected.
void interior_candidates(const PhaseProblem& pr, std::vector<Cand>& out, int& evals) {
  const MaterialParams& p = *pr.params;
  auto u_of_v = [&](double v, double su, bool& ok) {
    const double c1 = p.H_M - 2.0 * p.C_AM - 2.0 * p.C_AMS * v;
    if (std::abs(c1) < 1e-13 * (1.0 + std::abs(p.H_M) + p.C_AM + p.C_AMS)) {
      ok = false;
      return 0.0;
    }
    ok = true;
    return (-su - pr.B_M(0.0, v)) / c1;
  };
  const int n = 400;
  for (double su : {-1.0, 1.0}) {
    for (double sv : {-1.0, 1.0 + pr.d_coeff}) {
      double prev_r = 0.0, prev_v = 0.0;
      bool prev_ok = false;
      for (int i = 0; i <= n; ++i) {
        const double v = static_cast<double>(i) / n;
        bool ok = false;
        const double u = u_of_v(v, su, ok);
        ++evals;
        if (ok && (u < -0.5 || u > 1.5)) ok = false;
        double r = 0.0;
        if (ok) r = pr.B_S(u, v) + sv;
        if (ok && prev_ok && ((r < 0.0) != (prev_r < 0.0))) {
          double lo = prev_v, hi = v, rlo = prev_r;
          for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            bool mok = false;
            const double um = u_of_v(mid, su, mok);
            if (!mok) break;
            const double rm = pr.B_S(um, mid) + sv;
            ++evals;
            if ((rm < 0.0) == (rlo < 0.0)) {
              lo = mid;
              rlo = rm;
            } else {
              hi = mid;
            }
          }
          bool fok = false;
          const double vf = 0.5 * (lo + hi);
          const double uf = u_of_v(vf, su, fok);
          if (fok && std::abs(pr.B_M(uf, vf) + su) < 1e-8 &&
              std::abs(pr.B_S(uf, vf) + sv) < 1e-6) {
            add_candidate(pr, out, uf, vf);
          }
        }
        prev_r = r;
        prev_v = v;
        prev_ok = ok;
      }
    }
  }
}

// Coarse scan plus local refinement; a safety net that cannot miss a basin
// wider than the coarse spacing.
void grid_candidate(const PhaseProblem& pr, std::vector<Cand>& out, int& evals) {
  const int n = 64;
  double bu = pr.u0, bv = pr.v0;
  double bj = pr.objective(bu, bv);
  ++evals;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n - i; ++j) {
      const double u = static_cast<double>(i) / n;
      const double v = static_cast<double>(j) / n;
      const double J = pr.objective(u, v);
      ++evals;
      if (J < bj) {
        bj = J;
        bu = u;
        bv = v;
      }
    }
  }
  double h = 1.0 / n;
  for (int level = 0; level < 45; ++level) {
    const double step = 0.5 * h;
    double cu = bu, cv = bv;
    for (int i = -2; i <= 2; ++i) {
      for (int j = -2; j <= 2; ++j) {
        auto pt = project_K(cu + i * step, cv + j * step);
        const double J = pr.objective(pt.first, pt.second);
        ++evals;
        if (J < bj) {
          bj = J;
          bu = pt.first;
          bv = pt.second;
        }
      }
    }
    h = step;
  }
  add_candidate(pr, out, bu, bv);
}

// Newton refinement of the winner within its (face, slip-pattern) regime.
void polish(const PhaseProblem& pr, double& u, double& v) {
  const bool stick_u = (u == pr.u0);
  const bool stick_v = (v == pr.v0);
  if (stick_u && stick_v) return;
  const bool on_u0 = (u == 0.0);
  const bool on_v0 = (v == 0.0);
  const bool on_diag = (u + v >= 1.0 - 1e-9);
  const double su = (u > pr.u0) ? 1.0 : -1.0;
  const double sv = (v > pr.v0) ? 1.0 + pr.d_coeff : -1.0;
  const double j_before = pr.objective(u, v);
  double uu = u, vv = v;

  auto accept = [&]() {
    snap_candidate(pr, uu, vv);
    if (pr.objective(uu, vv) <= j_before + 1e-12 * (1.0 + std::abs(j_before))) {
      u = uu;
      v = vv;
    }
  };

  double huu, huv, hvv;
  if (!stick_u && !stick_v && on_diag && !on_u0 && !on_v0) {
    // move along u = 1 - v
    for (int it = 0; it < 60; ++it) {
      const double r = (pr.B_S(uu, vv) + sv) - (pr.B_M(uu, vv) + su);
      curvatures(pr, uu, vv, huu, huv, hvv);
      const double dr = hvv - 2.0 * huv + huu;
      if (std::abs(dr) < 1e-300) return;
      const double dvv = -r / dr;
      vv += dvv;
      uu = 1.0 - vv;
      if (vv < -0.1 || vv > 1.1) return;
      if (std::abs(dvv) < 1e-15) break;
    }
    accept();
    return;
  }
  if (!stick_u && (stick_v || on_v0) && !on_diag) {
    // free u at fixed v
    for (int it = 0; it < 60; ++it) {
      const double r = pr.B_M(uu, vv) + su;
      curvatures(pr, uu, vv, huu, huv, hvv);
      if (std::abs(huu) < 1e-300) return;
      const double duu = -r / huu;
      uu += duu;
      if (uu < -0.1 || uu > 1.1) return;
      if (std::abs(duu) < 1e-15) break;
    }
    accept();
    return;
  }
  if (!stick_v && (stick_u || on_u0) && !on_diag) {
    for (int it = 0; it < 60; ++it) {
      const double r = pr.B_S(uu, vv) + sv;
      curvatures(pr, uu, vv, huu, huv, hvv);
      if (std::abs(hvv) < 1e-300) return;
      const double dvv = -r / hvv;
      vv += dvv;
      if (vv < -0.1 || vv > 1.1) return;
      if (std::abs(dvv) < 1e-15) break;
    }
    accept();
    return;
  }
  if (!stick_u && !stick_v && !on_u0 && !on_v0 && !on_diag) {
    for (int it = 0; it < 60; ++it) {
      const double rm = pr.B_M(uu, vv) + su;
      const double rs = pr.B_S(uu, vv) + sv;
      curvatures(pr, uu, vv, huu, huv, hvv);
      const double det = huu * hvv - huv * huv;
      if (std::abs(det) < 1e-300) return;
      const double duu = (-rm * hvv + rs * huv) / det;
      const double dvv = (-rs * huu + rm * huv) / det;
      uu += duu;
      vv += dvv;
      if (uu < -0.1 || uu > 1.1 || vv < -0.1 || vv > 1.1) return;
      if (std::abs(duu) + std::abs(dvv) < 1e-15) break;
    }
    accept();
    return;
  }
}

struct KktOut {
  double gamma_M = 0.0, gamma_S = 0.0;
  double drive_M = 0.0, drive_S = 0.0;
  bool ok = true;
  double residual = 0.0;
  std::string what;
};

// Reconstructs the reactions (gamma_M, gamma_S) in the normal cone of the
// triangle so that the total force B + gamma satisfies the stationarity
// ranges: slip pins it to the threshold, stick keeps it inside.
KktOut reconstruct_reactions(const PhaseProblem& pr, double u, double v, double tol) {
  KktOut out;
  const double d = pr.d_coeff;
  const double BM = pr.B_M(u, v);
  const double BS = pr.B_S(u, v);
  const double du = u - pr.u0;
  const double dv = v - pr.v0;
  const bool slip_m = du != 0.0;
  const bool slip_s = dv != 0.0;
  const double su = du > 0.0 ? 1.0 : -1.0;
  const double sv = dv > 0.0 ? 1.0 + d : -1.0;
  const bool a_u = (u == 0.0);
  const bool a_v = (v == 0.0);
  const bool a_d = (u + v >= 1.0 - 1e-12);

  auto fail = [&](const std::string& what, double res) {
    out.ok = false;
    out.residual = res;
    out.what = what;
  };
  // Admissible interval for B + gamma in the stick regime.
  const double lo_m = -1.0, hi_m = 1.0;
  const double lo_s = -(1.0 + d), hi_s = 1.0;

  if (a_v && a_d) {
    // vertex (1, 0): gamma_M = nu3 >= 0, gamma_S = nu3 - nu2 <= nu3.
    // The M side fixes the admissible interval for nu3; the S reaction is
    // capped by nu3, so nu3 is raised within that interval as far as the S
    // side needs.
    double lo_n, hi_n;
    if (slip_m) {
      lo_n = hi_n = -su - BM;
      if (hi_n < -tol) fail("negative vertex multiplier (1,0)", -hi_n);
    } else {
      lo_n = std::max(0.0, lo_m - BM);
      hi_n = hi_m - BM;
      if (lo_n > hi_n + tol) fail("stick range empty at vertex (1,0)", lo_n - hi_n);
    }
    const double need_s = slip_s ? (-sv - BS) : (lo_s - BS);
    const double nu3 = std::max(0.0, std::min(std::max(lo_n, need_s), std::max(lo_n, hi_n)));
    out.gamma_M = nu3;
    if (slip_s) {
      out.gamma_S = -sv - BS;
      if (out.gamma_S > nu3 + tol) fail("cone violation at vertex (1,0)", out.gamma_S - nu3);
    } else {
      const double lo = lo_s - BS;
      const double hi = std::min(hi_s - BS, nu3);
      if (lo > hi + tol) fail("stick range empty at vertex (1,0) [S]", lo - hi);
      out.gamma_S = std::min(std::max(0.0, lo), hi);
    }
  } else if (a_u && a_d) {
    // vertex (0, 1): gamma_S = nu3 >= 0, gamma_M = nu3 - nu1 <= nu3
    double lo_n, hi_n;
    if (slip_s) {
      lo_n = hi_n = -sv - BS;
      if (hi_n < -tol) fail("negative vertex multiplier (0,1)", -hi_n);
    } else {
      lo_n = std::max(0.0, lo_s - BS);
      hi_n = hi_s - BS;
      if (lo_n > hi_n + tol) fail("stick range empty at vertex (0,1)", lo_n - hi_n);
    }
    const double need_m = slip_m ? (-su - BM) : (lo_m - BM);
    const double nu3 = std::max(0.0, std::min(std::max(lo_n, need_m), std::max(lo_n, hi_n)));
    out.gamma_S = nu3;
    if (slip_m) {
      out.gamma_M = -su - BM;
      if (out.gamma_M > nu3 + tol) fail("cone violation at vertex (0,1)", out.gamma_M - nu3);
    } else {
      const double lo = lo_m - BM;
      const double hi = std::min(hi_m - BM, nu3);
      if (lo > hi + tol) fail("stick range empty at vertex (0,1) [M]", lo - hi);
      out.gamma_M = std::min(std::max(0.0, lo), hi);
    }
  } else if (a_d) {
    // diagonal edge: gamma_M = gamma_S = nu3 >= 0
    double nu3;
    if (slip_m) {
      nu3 = -su - BM;
    } else if (slip_s) {
      nu3 = -sv - BS;
    } else {
      const double lo = std::max({0.0, lo_m - BM, lo_s - BS});
      const double hi = std::min(hi_m - BM, hi_s - BS);
      if (lo > hi + tol) fail("stick range empty on diagonal edge", lo - hi);
      nu3 = lo;
    }
    if (nu3 < -tol) fail("negative diagonal multiplier", -nu3);
    out.gamma_M = out.gamma_S = nu3;
    if (slip_m && slip_s) {
      const double res = std::abs(sv + BS + nu3);
      if (res > tol) fail("joint slip inconsistent on diagonal edge", res);
    } else if (slip_m) {
      const double t = BS + nu3;
      if (t < lo_s - tol || t > hi_s + tol) fail("S stick range on diagonal edge", 0.0);
    } else if (slip_s) {
      const double t = BM + nu3;
      if (t < lo_m - tol || t > hi_m + tol) fail("M stick range on diagonal edge", 0.0);
    }
  } else {
    // chi_M = 0 and/or chi_S = 0 edges (or interior): reactions decouple.
    if (a_u) {
      if (slip_m) {
        out.gamma_M = -su - BM;  // su = -1 here
        if (out.gamma_M > tol) fail("cone violation on chi_M = 0", out.gamma_M);
      } else {
        const double lo = lo_m - BM;
        const double hi = std::min(hi_m - BM, 0.0);
        if (lo > hi + tol) fail("stick range empty on chi_M = 0", lo - hi);
        out.gamma_M = std::min(std::max(0.0, lo), hi);
      }
    } else {
      if (slip_m) {
        out.gamma_M = 0.0;
        const double res = std::abs(su + BM);
        if (res > tol) fail("free slip stationarity [M]", res);
      } else {
        if (BM < lo_m - tol || BM > hi_m + tol) fail("stick range violated [M]", std::abs(BM) - 1.0);
        out.gamma_M = 0.0;
      }
    }
    if (a_v) {
      if (slip_s) {
        out.gamma_S = -sv - BS;  // sv = -1 here
        if (out.gamma_S > tol) fail("cone violation on chi_S = 0", out.gamma_S);
      } else {
        const double lo = lo_s - BS;
        const double hi = std::min(hi_s - BS, 0.0);
        if (lo > hi + tol) fail("stick range empty on chi_S = 0", lo - hi);
        out.gamma_S = std::min(std::max(0.0, lo), hi);
      }
    } else {
      if (slip_s) {
        out.gamma_S = 0.0;
        const double res = std::abs(sv + BS);
        if (res > tol) fail("free slip stationarity [S]", res);
      } else {
        if (BS < lo_s - tol || BS > hi_s + tol)
          fail("stick range violated [S]", std::max(BS - hi_s, lo_s - BS));
        out.gamma_S = 0.0;
      }
    }
  }

  out.drive_M = -(BM + out.gamma_M);
  out.drive_S = -(BS + out.gamma_S);
  return out;
}

}  // namespace

PhaseSolution solve_phase_problem(const PhaseProblem& pr, const SolverOptions& opt) {
  std::vector<Cand> cands;
  cands.reserve(96);
  int evals = 0;

  add_candidate(pr, cands, pr.u0, pr.v0);
  add_candidate(pr, cands, 0.0, 0.0);
  add_candidate(pr, cands, 1.0, 0.0);
  add_candidate(pr, cands, 0.0, 1.0);
  add_candidate(pr, cands, pr.u0, 0.0);
  add_candidate(pr, cands, pr.u0, 1.0 - pr.u0);
  add_candidate(pr, cands, 0.0, pr.v0);
  add_candidate(pr, cands, 1.0 - pr.v0, pr.v0);

  // K edges and the two interior kink lines.
  line_candidates(pr, {0.0, 0.0}, {1.0, 0.0}, cands);
  line_candidates(pr, {0.0, 0.0}, {0.0, 1.0}, cands);
  line_candidates(pr, {1.0, 0.0}, {0.0, 1.0}, cands);
  if (pr.u0 >= 0.0 && pr.u0 <= 1.0)
    line_candidates(pr, {pr.u0, 0.0}, {pr.u0, 1.0 - pr.u0}, cands);
  if (pr.v0 >= 0.0 && pr.v0 <= 1.0)
    line_candidates(pr, {0.0, pr.v0}, {1.0 - pr.v0, pr.v0}, cands);

  interior_candidates(pr, cands, evals);
  grid_candidate(pr, cands, evals);

  double best_j = std::numeric_limits<double>::infinity();
  double bu = pr.u0, bv = pr.v0;
  bool have_best = false;
  for (const Cand& c : cands) {
    const double J = pr.objective(c.u, c.v);
    ++evals;
    if (!std::isfinite(J)) continue;
    if (!have_best) {
      have_best = true;
      best_j = J;
      bu = c.u;
      bv = c.v;
      continue;
    }
    const double tie = 1e-13 * (1.0 + std::abs(best_j));
    if (J < best_j - tie) {
      best_j = J;
      bu = c.u;
      bv = c.v;
    } else if (J <= best_j + tie) {
      const double dn = (c.u - pr.u0) * (c.u - pr.u0) + (c.v - pr.v0) * (c.v - pr.v0);
      const double db = (bu - pr.u0) * (bu - pr.u0) + (bv - pr.v0) * (bv - pr.v0);
      if (dn < db - 1e-30 || (dn <= db + 1e-30 && (c.u < bu || (c.u == bu && c.v < bv)))) {
        best_j = std::min(best_j, J);
        bu = c.u;
        bv = c.v;
      }
    }
  }

  polish(pr, bu, bv);

  const KktOut kkt = reconstruct_reactions(pr, bu, bv, std::max(1e-9, 10.0 * opt.tol_kkt));
  if (!kkt.ok) {
    std::ostringstream os;
    os << "phase solve failed KKT reconstruction: " << kkt.what << " (residual " << kkt.residual
       << ") at (" << bu << ", " << bv << ")";
    throw SolverError(os.str(), kkt.residual);
  }

  PhaseSolution sol;
  sol.chi_M = bu;
  sol.chi_S = bv;
  sol.zeta_M = std::abs(bu - pr.u0);
  sol.zeta_S = std::abs(bv - pr.v0);
  sol.gamma_M = kkt.gamma_M;
  sol.gamma_S = kkt.gamma_S;
  sol.drive_M = kkt.drive_M;
  sol.drive_S = kkt.drive_S;
  sol.F_M = std::abs(kkt.drive_M) - 1.0;
  sol.R = kkt.drive_S >= 0.0 ? 1.0 + pr.d_coeff : 1.0;
  sol.F_S = std::abs(kkt.drive_S) - sol.R;
  sol.d_coeff = pr.d_coeff;
  sol.slip_M = sol.zeta_M > 0.0;
  sol.slip_S = sol.zeta_S > 0.0;
  sol.evals = evals;
  return sol;
}

}  // namespace detail

PhaseSolution step_phases(const MaterialParams& p, const ThermoState& s,
                          const SolverOptions& opt) {
  require_feasible(p, s);
  const auto pr = detail::make_strain_phase_problem(p, s);
  return detail::solve_phase_problem(pr, opt);
}

ReorientationSolution step_reorientation(const MaterialParams& p, const ThermoState& s,
                                         const SolverOptions& opt) {
  require_feasible(p, s);
  ReorientationSolution out;
  out.d_tr = s.d_tr;
  const double n = frob_norm(s.d_tr);
  const bool axis_set = n > 0.5 * p.xi_s;

  if (s.chi_S <= opt.tol_chi_freeze) {
    out.frozen = true;
    if (axis_set) {
      const Forces f = forces_smooth(p, s);
      const auto fd = yield_fd(f.B_d, s.d_tr, s.chi_S, p.xi_s);
      out.F_d = fd.first;
      out.drive_norm = fd.second;
      out.gamma = -frob_inner(f.B_d, (1.0 / n) * s.d_tr) / p.xi_s;
    } else {
      out.F_d = -s.chi_S;
    }
    return out;
  }
  if (!axis_set)
    throw SolverError("reorientation: orientation axis unset while chi_S > freeze tolerance");

  const Forces f0 = forces_smooth(p, s);
  const double g0n = frob_norm(tangential_drive(f0.B_d, s.d_tr));
  out.gamma = -frob_inner(f0.B_d, (1.0 / n) * s.d_tr) / p.xi_s;
  out.drive_norm = g0n;
  out.F_d = g0n - s.chi_S;

  if (g0n <= s.chi_S + opt.tol_kkt) return out;  // stick

  // Slip: move along the tangential drive until the end-of-step drive norm
  // equals chi_S. One chord cannot rotate the axis past 90 degrees, so the
  // chord is iterated with the drive re-evaluated at each landing point;
  // moderate rotations finish in the first chord.
  int iters = 0;
  DevTensor3 d_cur = s.d_tr;
  double g_cur = out.F_d;
  bool converged = false;
  for (int chord = 0; chord < opt.max_outer && !converged; ++chord) {
    ThermoState st = s;
    st.d_tr = d_cur;
    const Forces fc = forces_smooth(p, st);
    const DevTensor3 gdir = tangential_drive(fc.B_d, d_cur);
    const double gn = frob_norm(gdir);
    g_cur = gn - s.chi_S;
    if (g_cur <= opt.tol_kkt) break;

    auto residual_at = [&](double lam, DevTensor3& d_new) {
      d_new = p.xi_s * normalized_or_zero(d_cur + lam * gdir);
      ThermoState trial = s;
      trial.d_tr = d_new;
      const Forces ff = forces_smooth(p, trial);
      return frob_norm(tangential_drive(ff.B_d, d_new)) - s.chi_S;
    };

    // Walk outward along the chord. The residual may rise over a hump when
    // the misalignment is obtuse; consistency is a sign change, not a
    // descent, so only the crossing and the best-visited point matter.
    DevTensor3 d_new;
    double lo = 0.0;
    double hi = 0.01 * p.xi_s / gn;
    DevTensor3 d_best = d_cur;
    double r_best = g_cur;
    DevTensor3 d_land = d_cur;
    bool bracketed = false;
    while (true) {
      const double r_hi = residual_at(hi, d_new);
      if (++iters > 20 * opt.max_bisect)
        throw SolverError("reorientation: bracket expansion exceeded max_bisect", r_hi);
      if (r_hi <= 0.0) {
        bracketed = true;
        break;
      }
      if (r_hi < r_best) {
        r_best = r_hi;
        d_best = d_new;
      }
      if (frob_norm(d_new - d_land) <= 1e-13 * p.xi_s) break;  // 90-degree asymptote
      d_land = d_new;
      lo = hi;
      hi *= 1.6;
    }
    if (!bracketed) {
      // Re-aim the next chord: from the best visited point when the
      // residual improved, otherwise from the far end (angular progress
      // over the hump even though the residual rose).
      const DevTensor3 next = (r_best < g_cur) ? d_best : d_land;
      if (frob_norm(next - d_cur) <= 1e-13 * p.xi_s)
        throw SolverError("reorientation: chord stalled before reaching consistency", r_best);
      d_cur = next;
      continue;
    }
    double r_mid = residual_at(hi, d_new);
    for (int it = 0; it < opt.max_bisect && std::abs(r_mid) > opt.tol_kkt; ++it) {
      const double mid = 0.5 * (lo + hi);
      r_mid = residual_at(mid, d_new);
      ++iters;
      if (r_mid > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    if (std::abs(r_mid) > 1e-8)
      throw SolverError("reorientation: bisection failed to converge", r_mid);
    d_cur = d_new;
    g_cur = r_mid;
    converged = true;
  }
  if (g_cur > 1e-8)
    throw SolverError("reorientation: consistency not reached within max_outer chords", g_cur);

  out.d_tr = d_cur;
  out.slip = true;
  out.zeta_d = frob_norm(d_cur - s.d_tr);
  out.F_d = g_cur;
  out.drive_norm = g_cur + s.chi_S;
  ThermoState st = s;
  st.d_tr = d_cur;
  const Forces ff = forces_smooth(p, st);
  out.gamma = -frob_inner(ff.B_d, (1.0 / p.xi_s) * d_cur) / p.xi_s;
  out.iters = iters;
  return out;
}

namespace {

std::optional<DevTensor3> nucleation_direction(const MaterialParams& p, const ThermoState& s,
                                               const Controls& c) {
  const SymTensor3 sig = (c.mode == ControlMode::stress) ? c.target_sigma : stress(p, s);
  const DevTensor3 sd = dev(sig);
  if (frob_norm(sd) > 1e-10 * (1.0 + frob_norm(sig))) return normalized_or_zero(sd);
  const DevTensor3 ed = dev(s.eps);
  if (frob_norm(ed) > 1e-10 * (1.0 + frob_norm(s.eps))) return normalized_or_zero(ed);
  return std::nullopt;
}

SymTensor3 strain_from_stress(const MaterialParams& p, const SymTensor3& sigma, double chi_S,
                              const DevTensor3& d_tr) {
  const double tr_eps = trace(sigma) / (3.0 * bulk_modulus(p));
  const DevTensor3 ed = (1.0 / (2.0 * p.mu)) * dev(sigma) + chi_S * d_tr;
  SymTensor3 out = ed;
  out.xx += tr_eps / 3.0;
  out.yy += tr_eps / 3.0;
  out.zz += tr_eps / 3.0;
  return out;
}

}  // namespace

StepResult step(const MaterialParams& p, const ThermoState& s0, const Controls& c,
                const SolverOptions& opt) {
  require_feasible(p, s0);
  ThermoState base = s0;

  if (!c.theta.adiabatic) {
    if (!(c.theta.value > 0.0)) throw std::invalid_argument("step: prescribed theta must be positive");
    base.theta = c.theta.value;
  }

  const bool stress_mode = (c.mode == ControlMode::stress);
  switch (c.mode) {
    case ControlMode::strain:
      base.eps = c.target_eps;
      break;
    case ControlMode::proportional:
      base.eps = c.target_scalar * static_cast<const SymTensor3&>(c.direction);
      break;
    case ControlMode::stress:
      break;
  }

  // Nucleation: select the orientation axis before the phase solve so the
  // elastic coupling is present from the first increment of chi_S.
  bool axis_set = frob_norm(base.d_tr) > 0.5 * p.xi_s;
  if (!axis_set) {
    if (auto dir = nucleation_direction(p, base, c)) {
      base.d_tr = p.xi_s * (*dir);
      axis_set = true;
    }
  }
  if (stress_mode) base.eps = strain_from_stress(p, c.target_sigma, base.chi_S, base.d_tr);

  const double sigma_m_frozen =
      stress_mode ? trace(c.target_sigma) / 3.0 : mean_stress(p, base);

  ThermoState cur = base;
  PhaseSolution ph;
  ReorientationSolution ro;
  int sweeps = 0;
  int evals = 0;
  bool converged = false;

  for (sweeps = 1; sweeps <= opt.max_outer; ++sweeps) {
    ThermoState in = cur;
    in.chi_M = base.chi_M;
    in.chi_S = base.chi_S;
    if (stress_mode) {
      const auto pr = detail::make_stress_phase_problem(p, in, c.target_sigma);
      ph = detail::solve_phase_problem(pr, opt);
    } else {
      ph = step_phases(p, in, opt);
    }
    evals += ph.evals;
    double move = std::abs(ph.chi_M - cur.chi_M) + std::abs(ph.chi_S - cur.chi_S);
    cur.chi_M = ph.chi_M;
    cur.chi_S = ph.chi_S;

    if (!axis_set && cur.chi_S > opt.tol_chi_freeze) {
      // Growth driven by chemistry alone, with no stress or strain direction
      // to inherit: fall back to a fixed axis and re-solve with the elastic
      // coupling active.
      base.d_tr = p.xi_s * axial_unit_deviator();
      cur.d_tr = base.d_tr;
      axis_set = true;
      if (stress_mode) base.eps = strain_from_stress(p, c.target_sigma, base.chi_S, base.d_tr);
      ThermoState in2 = cur;
      in2.chi_M = base.chi_M;
      in2.chi_S = base.chi_S;
      in2.d_tr = base.d_tr;
      if (stress_mode) {
        const auto pr = detail::make_stress_phase_problem(p, in2, c.target_sigma);
        ph = detail::solve_phase_problem(pr, opt);
      } else {
        in2.eps = base.eps;
        ph = step_phases(p, in2, opt);
      }
      evals += ph.evals;
      cur.chi_M = ph.chi_M;
      cur.chi_S = ph.chi_S;
      move += 1.0;
    }

    if (stress_mode) cur.eps = strain_from_stress(p, c.target_sigma, cur.chi_S, cur.d_tr);

    ThermoState in_ro = cur;
    in_ro.d_tr = base.d_tr;
    // Under stress control the reorientation drive is chi_S tang(dev sigma),
    // independent of the trial axis. Feeding the elastic-only strain makes
    // the fixed-strain sub-solve reproduce exactly that drive (the
    // transformation term is normal and absorbed by the reaction).
    if (stress_mode) in_ro.eps = strain_from_stress(p, c.target_sigma, 0.0, DevTensor3{});
    ro = step_reorientation(p, in_ro, opt);
    move += frob_norm(ro.d_tr - cur.d_tr);
    cur.d_tr = ro.d_tr;
    if (stress_mode) cur.eps = strain_from_stress(p, c.target_sigma, cur.chi_S, cur.d_tr);

    if (move < std::max(opt.tol_kkt, 1e-13)) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw SolverError("step: phase/reorientation alternation did not converge within max_outer");

  if (stress_mode) {
    const SymTensor3 res = stress(p, cur) - c.target_sigma;
    const double rn = frob_norm(res);
    if (rn > 1e-8 * (1.0 + frob_norm(c.target_sigma)))
      throw SolverError("step: stress-control residual too large", rn);
  }

  // re-report the reorientation quantities at the true final state
  if (!ro.frozen && frob_norm(cur.d_tr) > 0.5 * p.xi_s) {
    const Forces ff = forces_smooth(p, cur);
    const auto fd = yield_fd(ff.B_d, cur.d_tr, cur.chi_S, p.xi_s);
    ro.F_d = fd.first;
    ro.drive_norm = fd.second;
    ro.gamma = -frob_inner(ff.B_d, (1.0 / p.xi_s) * cur.d_tr) / p.xi_s;
  }

  StepResult r;
  r.dissipation = dissipation_increment(p, s0, cur, sigma_m_frozen);

  if (c.theta.adiabatic) {
    const double dtheta =
        (r.dissipation - c.theta.k_ex * (cur.theta - c.theta.theta_env) * c.theta.dt) / p.c_s;
    cur.theta += dtheta;
    if (!(cur.theta > 0.0))
      throw SolverError("step: adiabatic update produced non-positive temperature", cur.theta);
  }

  r.state = cur;
  r.mult.zeta_M = ph.zeta_M;
  r.mult.zeta_S = ph.zeta_S;
  r.mult.zeta_d = ro.zeta_d;
  r.mult.gamma_M = ph.gamma_M;
  r.mult.gamma_S = ph.gamma_S;
  r.mult.gamma_d = ro.gamma;
  r.yields.F_M = ph.F_M;
  r.yields.F_S = ph.F_S;
  r.yields.F_d = ro.F_d;
  r.yields.R = ph.R;
  r.yields.tangential_drive_norm = ro.drive_norm;
  r.forces = forces_smooth(p, cur);
  r.sigma = stress(p, cur);
  r.outer_iters = sweeps;
  r.evals = evals;
  r.flags.slip_M = ph.slip_M;
  r.flags.slip_S = ph.slip_S;
  r.flags.slip_d = ro.slip;
  r.flags.d_tr_frozen = ro.frozen;
  return r;
}

namespace {

Controls interpolate_controls(const ControlPath& path, double f_prev, double f) {
  Controls c = path.start;
  const Controls& e = path.end;
  c.target_eps = path.start.target_eps + f * (e.target_eps - path.start.target_eps);
  c.target_sigma = path.start.target_sigma + f * (e.target_sigma - path.start.target_sigma);
  c.target_scalar = path.start.target_scalar + f * (e.target_scalar - path.start.target_scalar);
  if (!c.theta.adiabatic)
    c.theta.value = path.start.theta.value + f * (e.theta.value - path.start.theta.value);
  c.theta.dt = f - f_prev;
  return c;
}

}  // namespace

std::vector<StepResult> run_segment(const MaterialParams& p, const ThermoState& s0,
                                    const ControlPath& path, const SolverOptions& opt) {
  if (path.steps < 1) throw std::invalid_argument("run_segment: steps must be >= 1");
  if (path.start.mode != path.end.mode)
    throw std::invalid_argument("run_segment: control mode must not change within a segment");
  std::vector<StepResult> out;
  out.reserve(static_cast<std::size_t>(path.steps));
  ThermoState s = s0;
  const int n = path.steps;
  for (int k = 1; k <= n; ++k) {
    const double f_prev = static_cast<double>(k - 1) / n;
    const double f = static_cast<double>(k) / n;
    StepResult r;
    try {
      r = step(p, s, interpolate_controls(path, f_prev, f), opt);
    } catch (const SolverError&) {
      bool recovered = false;
      for (int m = 2; m <= opt.substep_limit && !recovered; m *= 2) {
        try {
          ThermoState ss = s;
          double diss = 0.0;
          StepResult rr;
          for (int j = 1; j <= m; ++j) {
            const double fp = f_prev + (f - f_prev) * (j - 1) / m;
            const double fc = f_prev + (f - f_prev) * j / m;
            rr = step(p, ss, interpolate_controls(path, fp, fc), opt);
            diss += rr.dissipation;
            ss = rr.state;
          }
          rr.dissipation = diss;
          r = rr;
          recovered = true;
        } catch (const SolverError&) {
        }
      }
      if (!recovered) {
        try {
          step(p, s, interpolate_controls(path, f_prev, f), opt);
        } catch (const SolverError& e) {
          std::ostringstream os;
          os << "run_segment: step " << k << "/" << n << " failed: " << e.what();
          throw SolverError(os.str(), e.residual);
        }
      }
    }
    s = r.state;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace sma
