#pragma once

#include <string>
#include <vector>

#include "sma/program.hpp"

namespace sma {

struct PlotSpec {
  std::string x;
  std::string y;
  std::string file;
};

struct OutputSpec {
  std::string csv = "trajectory.csv";
  std::vector<PlotSpec> plots;
};

struct Config {
  MaterialParams material;
  LoadingProgram program;
  SolverOptions solver;
  OutputSpec output;
};

struct ParseResult {
  Config config;
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

/// Parses and validates a JSON configuration. The schema is strict: unknown
/// keys are rejected, and all violations are aggregated with the path of the
/// offending key.
ParseResult parse_config(const std::string& text);

}  // namespace sma
