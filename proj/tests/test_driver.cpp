#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sma/config.hpp"
#include "sma/output.hpp"
#include "sma/program.hpp"

using namespace sma;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string minimal_config(const std::string& material_extra = "",
                           const std::string& segment_extra = "") {
  std::ostringstream os;
  os << R"({
  "material": { "lambda": 15000.0, "mu": 10000.0, "c_s": 2.0, "xi_s": 0.05, "theta_0": 293.0)"
     << material_extra << R"( },
  "initial": { "theta": 300.0 },
  "program": [
    { "mode": "strain", "steps": 3,
      "strain_end": [0.001, 0.0, 0.0, 0.0, 0.0, 0.0], "theta": 300.0)"
     << segment_extra << R"( }
  ]
})";
  return os.str();
}

Trajectory tiny_trajectory() {
  const ParseResult parsed = parse_config(minimal_config());
  REQUIRE(parsed.ok());
  return run_program(parsed.config.material, parsed.config.program, parsed.config.solver);
}

std::vector<std::vector<std::string>> read_csv_cells(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("bundled case1 config parses to the built-in program") {
  const ParseResult parsed = parse_config(read_file(std::string(SMA_CONFIG_DIR) + "/case1.json"));
  REQUIRE(parsed.ok());
  const LoadingProgram builtin = builtin_case1();
  REQUIRE(parsed.config.program.segments.size() == builtin.segments.size());
  CHECK(parsed.config.program.initial.theta == builtin.initial.theta);
  for (std::size_t i = 0; i < builtin.segments.size(); ++i) {
    const Segment& a = parsed.config.program.segments[i];
    const Segment& b = builtin.segments[i];
    CHECK(a.mode == b.mode);
    CHECK(a.steps == b.steps);
    CHECK(a.end.theta.value == b.end.theta.value);
    CHECK(frob_norm(a.end.target_sigma - b.end.target_sigma) == 0.0);
  }
  CHECK(parsed.config.output.csv == "case1.csv");
  REQUIRE(parsed.config.output.plots.size() == 1);
  CHECK(parsed.config.output.plots[0].x == "theta");
}

TEST_CASE("bundled case2 config parses to the built-in program") {
  const ParseResult parsed = parse_config(read_file(std::string(SMA_CONFIG_DIR) + "/case2.json"));
  REQUIRE(parsed.ok());
  const LoadingProgram builtin = builtin_case2();
  REQUIRE(parsed.config.program.segments.size() == builtin.segments.size());
  for (std::size_t i = 0; i < builtin.segments.size(); ++i) {
    const Segment& a = parsed.config.program.segments[i];
    const Segment& b = builtin.segments[i];
    CHECK(a.mode == b.mode);
    CHECK(a.steps == b.steps);
    CHECK(a.end.target_scalar == b.end.target_scalar);
    CHECK(frob_norm(a.end.direction - b.end.direction) <= 1e-12);
  }
}

TEST_CASE("config validation reports offending keys by path") {
  const std::string bad_mu = R"({
    "material": { "lambda": 1.0, "mu": -1.0, "c_s": 1.0, "xi_s": 0.05, "theta_0": 293.0 },
    "program": []
  })";
  ParseResult parsed = parse_config(bad_mu);
  REQUIRE(!parsed.ok());
  bool found = false;
  for (const auto& e : parsed.errors)
    if (e.find("material") != std::string::npos && e.find("mu") != std::string::npos) found = true;
  CHECK(found);

  ParseResult unknown = parse_config(minimal_config(", \"bogus\": 1.0"));
  REQUIRE(!unknown.ok());
  found = false;
  for (const auto& e : unknown.errors)
    if (e.find("material.bogus") != std::string::npos && e.find("unknown key") != std::string::npos)
      found = true;
  CHECK(found);

  ParseResult garbage = parse_config("not json at all {");
  CHECK(!garbage.ok());
}

TEST_CASE("omitted optional keys default to zero") {
  const ParseResult parsed = parse_config(minimal_config());
  REQUIRE(parsed.ok());
  CHECK(parsed.config.material.H_M == 0.0);
  CHECK(parsed.config.material.H_S == 0.0);
  CHECK(parsed.config.material.C_AMS == 0.0);
  CHECK(parsed.config.material.d0 == 0.0);
  CHECK(frob_norm(parsed.config.material.h_d_coeff) == 0.0);
  // solver defaults
  CHECK(parsed.config.solver.tol_kkt == doctest::Approx(1e-10));
  CHECK(parsed.config.solver.max_outer == 50);
}

TEST_CASE("config rejects mode-mismatched and missing keys") {
  ParseResult r = parse_config(minimal_config("", ", \"amplitude_end\": 0.1"));
  REQUIRE(!r.ok());
  bool found = false;
  for (const auto& e : r.errors)
    if (e.find("program[0].amplitude_end") != std::string::npos) found = true;
  CHECK(found);

  const std::string no_theta = R"({
    "material": { "lambda": 1.0, "mu": 1.0, "c_s": 1.0, "xi_s": 0.05, "theta_0": 293.0 },
    "program": [ { "mode": "strain", "steps": 1, "strain_end": [0,0,0,0,0,0] } ]
  })";
  r = parse_config(no_theta);
  REQUIRE(!r.ok());
}

TEST_CASE("write_csv emits the exact column set and round-trips bit-exactly") {
  const Trajectory traj = tiny_trajectory();
  REQUIRE(traj.points.size() == 3);
  const std::string path = "test_driver_tiny.csv";
  write_csv(traj, path);

  const auto rows = read_csv_cells(path);
  REQUIRE(rows.size() == 4);  // header + 3 steps
  const auto& cols = csv_columns();
  REQUIRE(rows[0].size() == cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) CHECK(rows[0][i] == cols[i]);

  for (std::size_t rrow = 1; rrow < rows.size(); ++rrow) {
    const TrajectoryPoint& pt = traj.points[rrow - 1];
    REQUIRE(rows[rrow].size() == cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const double parsed = std::strtod(rows[rrow][i].c_str(), nullptr);
      const double expect = csv_value(pt, cols[i]);
      CHECK(parsed == expect);  // bit-exact round trip at 17 significant digits
    }
  }
  // elastic program: no dissipation anywhere
  for (const auto& pt : traj.points) CHECK(pt.res.dissipation == 0.0);
  std::remove(path.c_str());

  // a single elastic step writes exactly header + one row
  Trajectory single;
  single.points.push_back(traj.points.front());
  write_csv(single, path);
  const auto two = read_csv_cells(path);
  CHECK(two.size() == 2);
  CHECK(two[1][33] == "0");  // diss_inc column
  std::remove(path.c_str());
}

TEST_CASE("csv_value rejects unknown columns listing the available ones") {
  const Trajectory traj = tiny_trajectory();
  CHECK_THROWS_WITH_AS(csv_value(traj.points[0], "nope"),
                       doctest::Contains("unknown column 'nope'"), std::invalid_argument);
  try {
    csv_value(traj.points[0], "nope");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("chi_M") != std::string::npos);
  }
}

TEST_CASE("emit_svg draws a polyline and handles the empty trajectory") {
  const Trajectory traj = tiny_trajectory();
  const std::string path = "test_driver_plot.svg";
  emit_svg(traj, "eps_xx", "sig_xx", path);
  const std::string svg = read_file(path);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("eps_xx") != std::string::npos);
  CHECK(svg.find("sig_xx") != std::string::npos);
  std::remove(path.c_str());

  Trajectory empty;
  emit_svg(empty, "theta", "chi_M", path);
  const std::string esvg = read_file(path);
  CHECK(esvg.find("<svg") != std::string::npos);
  CHECK(esvg.find("points=\"\"") != std::string::npos);
  std::remove(path.c_str());

  CHECK_THROWS_AS(emit_svg(traj, "bogus_column", "sig_xx", path), std::invalid_argument);
}

TEST_CASE("identical configs produce byte-identical CSV output") {
  const std::string text = minimal_config();
  const std::string pa = "test_driver_a.csv", pb = "test_driver_b.csv";
  for (const std::string* path : {&pa, &pb}) {
    const ParseResult parsed = parse_config(text);
    REQUIRE(parsed.ok());
    const Trajectory traj =
        run_program(parsed.config.material, parsed.config.program, parsed.config.solver);
    write_csv(traj, *path);
  }
  CHECK(read_file(pa) == read_file(pb));
  std::remove(pa.c_str());
  std::remove(pb.c_str());
}

TEST_CASE("empty program yields an empty trajectory") {
  const ParseResult parsed = parse_config(R"({
    "material": { "lambda": 15000.0, "mu": 10000.0, "c_s": 2.0, "xi_s": 0.05, "theta_0": 293.0 },
    "program": []
  })");
  REQUIRE(parsed.ok());
  const Trajectory traj =
      run_program(parsed.config.material, parsed.config.program, parsed.config.solver);
  CHECK(traj.points.empty());
  CHECK(traj.total_dissipation() == 0.0);
}

TEST_CASE("segment chains must be state-continuous") {
  const std::string jump = R"({
    "material": { "lambda": 15000.0, "mu": 10000.0, "c_s": 2.0, "xi_s": 0.05, "theta_0": 293.0 },
    "initial": { "theta": 300.0 },
    "program": [
      { "mode": "strain", "steps": 2, "strain_end": [0.001,0,0,0,0,0], "theta": 300.0 },
      { "mode": "strain", "steps": 2,
        "strain_start": [0.5,0,0,0,0,0], "strain_end": [0.002,0,0,0,0,0], "theta": 300.0 }
    ]
  })";
  const ParseResult parsed = parse_config(jump);
  REQUIRE(parsed.ok());
  CHECK_THROWS_AS(run_program(parsed.config.material, parsed.config.program, parsed.config.solver),
                  std::invalid_argument);
}
