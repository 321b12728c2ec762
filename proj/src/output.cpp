#include "sma/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sma {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "step",   "t",      "theta",  "eps_xx", "eps_yy", "eps_zz", "eps_xy", "eps_yz", "eps_zx",
      "sig_xx", "sig_yy", "sig_zz", "sig_xy", "sig_yz", "sig_zx", "chi_M",  "chi_S",  "dtr_xx",
      "dtr_yy", "dtr_zz", "dtr_xy", "dtr_yz", "dtr_zx", "B_M",    "B_S",    "F_M",    "F_S",
      "F_d",    "zeta_M", "zeta_S", "zeta_d", "gamma_M", "gamma_S", "diss_inc", "psi"};
  return cols;
}

double csv_value(const TrajectoryPoint& pt, const std::string& column) {
  const ThermoState& s = pt.res.state;
  if (column == "step") return pt.step;
  if (column == "t") return pt.t;
  if (column == "theta") return s.theta;
  if (column == "eps_xx") return s.eps.xx;
  if (column == "eps_yy") return s.eps.yy;
  if (column == "eps_zz") return s.eps.zz;
  if (column == "eps_xy") return s.eps.xy;
  if (column == "eps_yz") return s.eps.yz;
  if (column == "eps_zx") return s.eps.zx;
  if (column == "sig_xx") return pt.res.sigma.xx;
  if (column == "sig_yy") return pt.res.sigma.yy;
  if (column == "sig_zz") return pt.res.sigma.zz;
  if (column == "sig_xy") return pt.res.sigma.xy;
  if (column == "sig_yz") return pt.res.sigma.yz;
  if (column == "sig_zx") return pt.res.sigma.zx;
  if (column == "chi_M") return s.chi_M;
  if (column == "chi_S") return s.chi_S;
  if (column == "dtr_xx") return s.d_tr.xx;
  if (column == "dtr_yy") return s.d_tr.yy;
  if (column == "dtr_zz") return s.d_tr.zz;
  if (column == "dtr_xy") return s.d_tr.xy;
  if (column == "dtr_yz") return s.d_tr.yz;
  if (column == "dtr_zx") return s.d_tr.zx;
  if (column == "B_M") return pt.res.forces.B_M;
  if (column == "B_S") return pt.res.forces.B_S;
  if (column == "F_M") return pt.res.yields.F_M;
  if (column == "F_S") return pt.res.yields.F_S;
  if (column == "F_d") return pt.res.yields.F_d;
  if (column == "zeta_M") return pt.res.mult.zeta_M;
  if (column == "zeta_S") return pt.res.mult.zeta_S;
  if (column == "zeta_d") return pt.res.mult.zeta_d;
  if (column == "gamma_M") return pt.res.mult.gamma_M;
  if (column == "gamma_S") return pt.res.mult.gamma_S;
  if (column == "diss_inc") return pt.res.dissipation;
  if (column == "psi") return pt.psi;
  std::ostringstream os;
  os << "unknown column '" << column << "'; available columns:";
  for (const auto& c : csv_columns()) os << " " << c;
  throw std::invalid_argument(os.str());
}

void write_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "' for writing");
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out << ',';
    out << cols[i];
  }
  out << '\n';
  for (const auto& pt : traj.points) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out << ',';
      if (cols[i] == "step")
        out << pt.step;
      else
        out << fmt17(csv_value(pt, cols[i]));
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("write_csv: I/O failure writing '" + path + "'");
}

void emit_svg(const Trajectory& traj, const std::string& x_column, const std::string& y_column,
              const std::string& path) {
  // validates the column names up front
  if (!traj.points.empty()) {
    csv_value(traj.points.front(), x_column);
    csv_value(traj.points.front(), y_column);
  } else {
    TrajectoryPoint dummy;
    csv_value(dummy, x_column);
    csv_value(dummy, y_column);
  }

  const double width = 800.0, height = 600.0;
  const double ml = 70.0, mr = 20.0, mt = 20.0, mb = 50.0;

  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  if (!traj.points.empty()) {
    xmin = xmax = csv_value(traj.points.front(), x_column);
    ymin = ymax = csv_value(traj.points.front(), y_column);
    for (const auto& pt : traj.points) {
      const double x = csv_value(pt, x_column);
      const double y = csv_value(pt, y_column);
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax - xmin <= 0.0) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin <= 0.0) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
  auto py = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_svg: cannot open '" + path + "' for writing");
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
      << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "  <line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n"
      << "  <line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << height - mb << "\" stroke=\"black\"/>\n"
      << "  <text x=\"" << 0.5 * (ml + width - mr) << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"16\">" << x_column << "</text>\n"
      << "  <text x=\"18\" y=\"" << 0.5 * (mt + height - mb)
      << "\" text-anchor=\"middle\" font-size=\"16\" transform=\"rotate(-90 18 "
      << 0.5 * (mt + height - mb) << ")\">" << y_column << "</text>\n"
      << "  <text x=\"" << ml << "\" y=\"" << height - mb + 18
      << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt17(xmin) << "</text>\n"
      << "  <text x=\"" << width - mr << "\" y=\"" << height - mb + 18
      << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt17(xmax) << "</text>\n"
      << "  <text x=\"" << ml - 6 << "\" y=\"" << height - mb
      << "\" text-anchor=\"end\" font-size=\"11\">" << fmt17(ymin) << "</text>\n"
      << "  <text x=\"" << ml - 6 << "\" y=\"" << mt + 10
      << "\" text-anchor=\"end\" font-size=\"11\">" << fmt17(ymax) << "</text>\n"
      << "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (const auto& pt : traj.points) {
    out << px(csv_value(pt, x_column)) << ',' << py(csv_value(pt, y_column)) << ' ';
  }
  out << "\"/>\n</svg>\n";
  out.flush();
  if (!out) throw std::runtime_error("emit_svg: I/O failure writing '" + path + "'");
}

}  // namespace sma
