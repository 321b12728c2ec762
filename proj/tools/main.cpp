#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sma/config.hpp"
#include "sma/oracle.hpp"
#include "sma/output.hpp"
#include "sma/program.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitSolver = 2;
constexpr int kExitCheck = 3;

std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

void print_summary(const sma::Trajectory& traj) {
  if (traj.points.empty()) {
    std::cout << "empty trajectory\n";
    return;
  }
  const auto& last = traj.points.back().res.state;
  std::cout << "steps: " << traj.points.size() << "\n"
            << "final: theta = " << last.theta << ", chi_M = " << last.chi_M
            << ", chi_S = " << last.chi_S << "\n"
            << "total dissipation: " << traj.total_dissipation() << "\n";
}

int run_and_write(const sma::MaterialParams& params, const sma::LoadingProgram& program,
                  const sma::SolverOptions& options, const sma::OutputSpec& output,
                  const std::string& outdir) {
  sma::Trajectory traj;
  try {
    traj = sma::run_program(params, program, options);
  } catch (const sma::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  std::filesystem::create_directories(outdir);
  const std::string csv_path = join_path(outdir, output.csv);
  sma::write_csv(traj, csv_path);
  std::cout << "wrote " << csv_path << "\n";
  for (const auto& plot : output.plots) {
    const std::string svg_path = join_path(outdir, plot.file);
    sma::emit_svg(traj, plot.x, plot.y, svg_path);
    std::cout << "wrote " << svg_path << "\n";
  }
  print_summary(traj);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Material-point simulator for a three-phase shape-memory alloy model"};
  app.require_subcommand(1);

  std::string config_path;
  std::string outdir = ".";
  auto* run = app.add_subcommand("run", "run a loading program from a JSON config");
  run->add_option("-c,--config", config_path, "configuration file")->required();
  run->add_option("-o,--outdir", outdir, "output directory");

  bool plot1 = false;
  std::string outdir1 = ".";
  auto* case1 = app.add_subcommand("case1", "built-in temperature-induced scenario");
  case1->add_flag("--plot", plot1, "emit SVG plots");
  case1->add_option("-o,--outdir", outdir1, "output directory");

  bool plot2 = false;
  std::string outdir2 = ".";
  auto* case2 = app.add_subcommand("case2", "built-in stress-induced scenario");
  case2->add_flag("--plot", plot2, "emit SVG plots");
  case2->add_option("-o,--outdir", outdir2, "output directory");

  std::uint64_t seed = 42;
  int samples = 200;
  auto* check = app.add_subcommand("check", "run the verification suites");
  check->add_option("--seed", seed, "random seed");
  check->add_option("--samples", samples, "number of solver-vs-oracle samples");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "cannot open config file: " << config_path << "\n";
        return kExitValidation;
      }
      std::stringstream buf;
      buf << in.rdbuf();
      const sma::ParseResult parsed = sma::parse_config(buf.str());
      if (!parsed.ok()) {
        std::cerr << "configuration errors:\n";
        for (const auto& e : parsed.errors) std::cerr << "  - " << e << "\n";
        return kExitValidation;
      }
      return run_and_write(parsed.config.material, parsed.config.program, parsed.config.solver,
                           parsed.config.output, outdir);
    }
    if (*case1) {
      sma::OutputSpec out;
      out.csv = "case1.csv";
      if (plot1) {
        out.plots.push_back({"theta", "chi_M", "case1_chiM_theta.svg"});
        out.plots.push_back({"theta", "B_M", "case1_BM_theta.svg"});
        out.plots.push_back({"theta", "gamma_M", "case1_gammaM_theta.svg"});
      }
      return run_and_write(sma::demo_params(), sma::builtin_case1(), sma::SolverOptions{}, out,
                           outdir1);
    }
    if (*case2) {
      sma::OutputSpec out;
      out.csv = "case2.csv";
      if (plot2) {
        out.plots.push_back({"eps_xx", "sig_xx", "case2_sig_eps.svg"});
        out.plots.push_back({"sig_xx", "chi_S", "case2_chiS_sig.svg"});
        out.plots.push_back({"sig_xx", "B_S", "case2_BS_sig.svg"});
      }
      return run_and_write(sma::demo_params(), sma::builtin_case2(), sma::SolverOptions{}, out,
                           outdir2);
    }
    if (*check) {
      const sma::CheckReport rep = sma::run_check(seed, 100, samples);
      std::cout << rep.summary();
      if (!rep.ok()) {
        std::cerr << "check suite FAILED\n";
        return kExitCheck;
      }
      std::cout << "check suite passed\n";
      return kExitOk;
    }
  } catch (const sma::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
