#pragma once

#include <string>
#include <vector>

#include "sma/program.hpp"

namespace sma {

/// Column names of the trajectory CSV, in file order.
const std::vector<std::string>& csv_columns();

/// Value of the named column for one trajectory point. Throws
/// std::invalid_argument listing the available columns for unknown names.
double csv_value(const TrajectoryPoint& pt, const std::string& column);

/// Writes the trajectory as CSV: a header line, then one row per step with
/// every value printed with 17 significant digits (round-trip exact).
void write_csv(const Trajectory& traj, const std::string& path);

/// Standalone SVG with a single polyline of (x, y) pairs on linear axes.
void emit_svg(const Trajectory& traj, const std::string& x_column, const std::string& y_column,
              const std::string& path);

}  // namespace sma
