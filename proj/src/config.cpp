#include "sma/config.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "sma/output.hpp"

#include <json.hpp>

namespace sma {

namespace {

using nlohmann::json;

struct Ctx {
  std::vector<std::string>* errors;
  void error(const std::string& path, const std::string& msg) {
    errors->push_back(path + ": " + msg);
  }
};

void check_keys(Ctx& ctx, const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) ctx.error(path + "." + it.key(), "unknown key");
  }
}

bool get_number(Ctx& ctx, const json& obj, const std::string& path, const std::string& key,
                double& out, bool required, double fallback) {
  out = fallback;
  if (!obj.contains(key)) {
    if (required) ctx.error(path + "." + key, "required key missing");
    return false;
  }
  const json& v = obj.at(key);
  if (!v.is_number()) {
    ctx.error(path + "." + key, "expected a number");
    return false;
  }
  out = v.get<double>();
  return true;
}

bool get_int(Ctx& ctx, const json& obj, const std::string& path, const std::string& key, int& out,
             bool required, int fallback) {
  out = fallback;
  if (!obj.contains(key)) {
    if (required) ctx.error(path + "." + key, "required key missing");
    return false;
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    ctx.error(path + "." + key, "expected an integer");
    return false;
  }
  out = v.get<int>();
  return true;
}

bool get_tensor(Ctx& ctx, const json& obj, const std::string& path, const std::string& key,
                SymTensor3& out) {
  out = {};
  if (!obj.contains(key)) return false;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 6) {
    ctx.error(path + "." + key, "expected an array of 6 numbers [xx, yy, zz, xy, yz, zx]");
    return false;
  }
  double c[6];
  for (int i = 0; i < 6; ++i) {
    if (!v[i].is_number()) {
      ctx.error(path + "." + key, "expected an array of 6 numbers [xx, yy, zz, xy, yz, zx]");
      return false;
    }
    c[i] = v[i].get<double>();
  }
  out = {c[0], c[1], c[2], c[3], c[4], c[5]};
  return true;
}

bool get_deviator(Ctx& ctx, const json& obj, const std::string& path, const std::string& key,
                  DevTensor3& out) {
  SymTensor3 full;
  if (!get_tensor(ctx, obj, path, key, full)) return false;
  if (std::abs(trace(full)) > 1e-9 * (1.0 + frob_norm(full))) {
    ctx.error(path + "." + key, "tensor must be deviatoric (zero trace)");
    return false;
  }
  out = dev(full);
  return true;
}

void parse_material(Ctx& ctx, const json& root, MaterialParams& m) {
  if (!root.contains("material")) {
    ctx.error("material", "required section missing");
    return;
  }
  const json& j = root.at("material");
  if (!j.is_object()) {
    ctx.error("material", "expected an object");
    return;
  }
  check_keys(ctx, j, "material",
             {"lambda", "mu", "c_s", "xi_s", "theta_0", "beta_M", "theta_M_ref", "beta_S",
              "theta_S_ref", "beta_A", "theta_A_ref", "h_d_tensor", "C_MS", "C_AM", "C_AS",
              "C_AMS", "H_M", "H_S", "d0", "d1", "d2", "k_d"});
  const std::string p = "material";
  get_number(ctx, j, p, "lambda", m.lambda, true, 0.0);
  get_number(ctx, j, p, "mu", m.mu, true, 0.0);
  get_number(ctx, j, p, "c_s", m.c_s, true, 0.0);
  get_number(ctx, j, p, "xi_s", m.xi_s, true, 0.0);
  get_number(ctx, j, p, "theta_0", m.theta_0, true, 0.0);
  get_number(ctx, j, p, "beta_M", m.beta_M, false, 0.0);
  get_number(ctx, j, p, "theta_M_ref", m.theta_M_ref, false, m.theta_0);
  get_number(ctx, j, p, "beta_S", m.beta_S, false, 0.0);
  get_number(ctx, j, p, "theta_S_ref", m.theta_S_ref, false, m.theta_0);
  get_number(ctx, j, p, "beta_A", m.beta_A, false, 0.0);
  get_number(ctx, j, p, "theta_A_ref", m.theta_A_ref, false, m.theta_0);
  if (j.contains("h_d_tensor")) get_deviator(ctx, j, p, "h_d_tensor", m.h_d_coeff);
  get_number(ctx, j, p, "C_MS", m.C_MS, false, 0.0);
  get_number(ctx, j, p, "C_AM", m.C_AM, false, 0.0);
  get_number(ctx, j, p, "C_AS", m.C_AS, false, 0.0);
  get_number(ctx, j, p, "C_AMS", m.C_AMS, false, 0.0);
  get_number(ctx, j, p, "H_M", m.H_M, false, 0.0);
  get_number(ctx, j, p, "H_S", m.H_S, false, 0.0);
  get_number(ctx, j, p, "d0", m.d0, false, 0.0);
  get_number(ctx, j, p, "d1", m.d1, false, 0.0);
  get_number(ctx, j, p, "d2", m.d2, false, 0.0);
  get_number(ctx, j, p, "k_d", m.k_d, false, 0.0);
  for (const auto& e : validate(m)) ctx.error("material", e);
}

void parse_solver(Ctx& ctx, const json& root, SolverOptions& s) {
  if (!root.contains("solver")) return;
  const json& j = root.at("solver");
  if (!j.is_object()) {
    ctx.error("solver", "expected an object");
    return;
  }
  check_keys(ctx, j, "solver",
             {"tol_kkt", "tol_chi_freeze", "max_outer", "max_bisect", "substep_limit"});
  const std::string p = "solver";
  get_number(ctx, j, p, "tol_kkt", s.tol_kkt, false, s.tol_kkt);
  get_number(ctx, j, p, "tol_chi_freeze", s.tol_chi_freeze, false, s.tol_chi_freeze);
  get_int(ctx, j, p, "max_outer", s.max_outer, false, s.max_outer);
  get_int(ctx, j, p, "max_bisect", s.max_bisect, false, s.max_bisect);
  get_int(ctx, j, p, "substep_limit", s.substep_limit, false, s.substep_limit);
  if (!(s.tol_kkt > 0.0)) ctx.error("solver.tol_kkt", "must be positive");
  if (!(s.tol_chi_freeze > 0.0)) ctx.error("solver.tol_chi_freeze", "must be positive");
  if (s.max_outer < 1) ctx.error("solver.max_outer", "must be >= 1");
  if (s.max_bisect < 1) ctx.error("solver.max_bisect", "must be >= 1");
  if (s.substep_limit < 1) ctx.error("solver.substep_limit", "must be >= 1");
}

void parse_initial(Ctx& ctx, const json& root, const MaterialParams& m, ThermoState& s) {
  s.theta = m.theta_0;
  if (!root.contains("initial")) return;
  const json& j = root.at("initial");
  if (!j.is_object()) {
    ctx.error("initial", "expected an object");
    return;
  }
  check_keys(ctx, j, "initial", {"theta", "eps", "chi_M", "chi_S", "d_tr"});
  get_number(ctx, j, "initial", "theta", s.theta, false, s.theta);
  get_tensor(ctx, j, "initial", "eps", s.eps);
  get_number(ctx, j, "initial", "chi_M", s.chi_M, false, 0.0);
  get_number(ctx, j, "initial", "chi_S", s.chi_S, false, 0.0);
  if (j.contains("d_tr")) {
    DevTensor3 d;
    if (get_deviator(ctx, j, "initial", "d_tr", d)) {
      const double n = frob_norm(d);
      if (n > 1e-12 && std::abs(n - m.xi_s) > 1e-9 * (1.0 + m.xi_s))
        ctx.error("initial.d_tr", "norm must be 0 (unset) or xi_s");
      s.d_tr = d;
    }
  }
  const std::string msg = feasibility_violation(m, s);
  if (!msg.empty()) ctx.error("initial", msg);
}

void parse_segment(Ctx& ctx, const json& j, const std::string& path, const MaterialParams& m,
                   Segment& seg) {
  if (!j.is_object()) {
    ctx.error(path, "expected an object");
    return;
  }
  check_keys(ctx, j, path,
             {"mode", "steps", "strain_start", "strain_end", "stress_start", "stress_end",
              "amplitude_start", "amplitude_end", "direction", "theta", "theta_start",
              "theta_end", "adiabatic"});
  if (!j.contains("mode") || !j.at("mode").is_string()) {
    ctx.error(path + ".mode", "required string: strain | stress | proportional");
    return;
  }
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "strain")
    seg.mode = ControlMode::strain;
  else if (mode == "stress")
    seg.mode = ControlMode::stress;
  else if (mode == "proportional")
    seg.mode = ControlMode::proportional;
  else {
    ctx.error(path + ".mode", "must be one of: strain, stress, proportional");
    return;
  }
  seg.start.mode = seg.end.mode = seg.mode;
  get_int(ctx, j, path, "steps", seg.steps, true, 1);
  if (seg.steps < 1) ctx.error(path + ".steps", "must be >= 1");

  auto forbid = [&](const char* key) {
    if (j.contains(key)) ctx.error(path + "." + key, "not applicable for mode '" + mode + "'");
  };
  switch (seg.mode) {
    case ControlMode::strain: {
      if (!get_tensor(ctx, j, path, "strain_end", seg.end.target_eps))
        ctx.error(path + ".strain_end", "required for strain mode");
      seg.has_explicit_start = get_tensor(ctx, j, path, "strain_start", seg.start.target_eps);
      forbid("stress_start");
      forbid("stress_end");
      forbid("amplitude_start");
      forbid("amplitude_end");
      forbid("direction");
      break;
    }
    case ControlMode::stress: {
      if (!get_tensor(ctx, j, path, "stress_end", seg.end.target_sigma))
        ctx.error(path + ".stress_end", "required for stress mode");
      seg.has_explicit_start = get_tensor(ctx, j, path, "stress_start", seg.start.target_sigma);
      forbid("strain_start");
      forbid("strain_end");
      forbid("amplitude_start");
      forbid("amplitude_end");
      forbid("direction");
      break;
    }
    case ControlMode::proportional: {
      get_number(ctx, j, path, "amplitude_end", seg.end.target_scalar, true, 0.0);
      seg.has_explicit_start =
          get_number(ctx, j, path, "amplitude_start", seg.start.target_scalar, false, 0.0);
      DevTensor3 dir;
      if (get_deviator(ctx, j, path, "direction", dir)) {
        const double n = frob_norm(dir);
        if (n <= 1e-12) {
          ctx.error(path + ".direction", "must be a nonzero deviator");
        } else {
          seg.end.direction = normalized_or_zero(dir);
          seg.start.direction = seg.end.direction;
        }
      } else if (!j.contains("direction")) {
        ctx.error(path + ".direction", "required for proportional mode");
      }
      forbid("strain_start");
      forbid("strain_end");
      forbid("stress_start");
      forbid("stress_end");
      break;
    }
  }

  const bool has_theta = j.contains("theta");
  const bool has_span = j.contains("theta_start") || j.contains("theta_end");
  const bool has_adiabatic = j.contains("adiabatic");
  if ((has_theta && has_span) || (has_theta && has_adiabatic) || (has_span && has_adiabatic)) {
    ctx.error(path, "give exactly one of: theta, theta_start/theta_end, adiabatic");
    return;
  }
  if (has_adiabatic) {
    const json& a = j.at("adiabatic");
    if (!a.is_object()) {
      ctx.error(path + ".adiabatic", "expected an object {k_ex, theta_env}");
      return;
    }
    check_keys(ctx, a, path + ".adiabatic", {"k_ex", "theta_env"});
    seg.start.theta.adiabatic = seg.end.theta.adiabatic = true;
    double k_ex = 0.0, theta_env = 0.0;
    get_number(ctx, a, path + ".adiabatic", "k_ex", k_ex, false, 0.0);
    get_number(ctx, a, path + ".adiabatic", "theta_env", theta_env, true, 300.0);
    if (k_ex < 0.0) ctx.error(path + ".adiabatic.k_ex", "must be nonnegative");
    seg.start.theta.k_ex = seg.end.theta.k_ex = k_ex;
    seg.start.theta.theta_env = seg.end.theta.theta_env = theta_env;
  } else if (has_theta) {
    double v = 0.0;
    get_number(ctx, j, path, "theta", v, true, 300.0);
    if (!(v > 0.0)) ctx.error(path + ".theta", "must be positive");
    seg.start.theta.value = seg.end.theta.value = v;
    seg.has_explicit_theta_start = true;
  } else if (has_span) {
    double te = 0.0;
    if (!get_number(ctx, j, path, "theta_end", te, true, 300.0)) return;
    if (!(te > 0.0)) ctx.error(path + ".theta_end", "must be positive");
    seg.end.theta.value = te;
    double ts = 0.0;
    if (get_number(ctx, j, path, "theta_start", ts, false, te)) {
      if (!(ts > 0.0)) ctx.error(path + ".theta_start", "must be positive");
      seg.start.theta.value = ts;
      seg.has_explicit_theta_start = true;
    } else {
      seg.start.theta.value = te;
    }
  } else {
    ctx.error(path, "temperature handling missing: give theta, theta_start/theta_end, or adiabatic");
  }
  (void)m;
}

void parse_program(Ctx& ctx, const json& root, const MaterialParams& m, LoadingProgram& prog) {
  if (!root.contains("program")) {
    ctx.error("program", "required section missing");
    return;
  }
  const json& j = root.at("program");
  if (!j.is_array()) {
    ctx.error("program", "expected an array of segments");
    return;
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::ostringstream path;
    path << "program[" << i << "]";
    Segment seg;
    parse_segment(ctx, j[i], path.str(), m, seg);
    prog.segments.push_back(seg);
  }
}

void parse_output(Ctx& ctx, const json& root, OutputSpec& out) {
  if (!root.contains("output")) return;
  const json& j = root.at("output");
  if (!j.is_object()) {
    ctx.error("output", "expected an object");
    return;
  }
  check_keys(ctx, j, "output", {"csv", "plots"});
  if (j.contains("csv")) {
    if (!j.at("csv").is_string())
      ctx.error("output.csv", "expected a string");
    else
      out.csv = j.at("csv").get<std::string>();
  }
  if (j.contains("plots")) {
    const json& pl = j.at("plots");
    if (!pl.is_array()) {
      ctx.error("output.plots", "expected an array");
      return;
    }
    const auto& cols = csv_columns();
    auto known = [&cols](const std::string& c) {
      for (const auto& k : cols)
        if (k == c) return true;
      return false;
    };
    for (std::size_t i = 0; i < pl.size(); ++i) {
      std::ostringstream path;
      path << "output.plots[" << i << "]";
      const json& pj = pl[i];
      if (!pj.is_object()) {
        ctx.error(path.str(), "expected an object {x, y, file}");
        continue;
      }
      check_keys(ctx, pj, path.str(), {"x", "y", "file"});
      PlotSpec spec;
      for (const char* key : {"x", "y", "file"}) {
        if (!pj.contains(key) || !pj.at(key).is_string()) {
          ctx.error(path.str() + "." + key, "required string");
          continue;
        }
        const std::string v = pj.at(key).get<std::string>();
        if (key[0] == 'x')
          spec.x = v;
        else if (key[0] == 'y')
          spec.y = v;
        else
          spec.file = v;
      }
      for (const std::string* col : {&spec.x, &spec.y}) {
        if (!col->empty() && !known(*col))
          ctx.error(path.str(), "unknown column '" + *col + "'");
      }
      out.plots.push_back(spec);
    }
  }
}

}  // namespace

ParseResult parse_config(const std::string& text) {
  ParseResult result;
  Ctx ctx{&result.errors};
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    ctx.error("(document)", std::string("JSON parse error: ") + e.what());
    return result;
  }
  if (!root.is_object()) {
    ctx.error("(document)", "top level must be an object");
    return result;
  }
  check_keys(ctx, root, "(root)", {"material", "solver", "initial", "program", "output"});
  parse_material(ctx, root, result.config.material);
  parse_solver(ctx, root, result.config.solver);
  if (result.errors.empty()) {
    // initial-state and program checks need a sane material block
    parse_initial(ctx, root, result.config.material, result.config.program.initial);
    parse_program(ctx, root, result.config.material, result.config.program);
  } else if (root.contains("program")) {
    // still surface structural program errors alongside material ones
    parse_program(ctx, root, result.config.material, result.config.program);
  }
  parse_output(ctx, root, result.config.output);
  return result;
}

}  // namespace sma
