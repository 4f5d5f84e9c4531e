#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "narrow/builder.hpp"

namespace narrow {

struct DepthRow {
  double eps = 0.0;
  double w = 0.0;
  double radius = 0.0;
  std::size_t length = 0;
  double predicted = 0.0;  // (R / w)^(d_in + 1)
};

struct DepthReport {
  Eigen::Index d_in = 0;
  std::vector<DepthRow> rows;
  std::optional<double> slope;  // least-squares slope of log(length) vs log(1/w)

  std::string to_csv() const {
    std::ostringstream ss;
    ss.precision(17);
    ss << "eps,w,R,measured_length,predicted\n";
    for (const auto& r : rows) ss << r.eps << ',' << r.w << ',' << r.radius << ',' << r.length << ',' << r.predicted << '\n';
    ss << "# slope," << (slope ? std::to_string(*slope) : std::string("n/a")) << '\n';
    return ss.str();
  }
};

// Undefined (nullopt) when fewer than two distinct lengths or widths occur,
// e.g. when every run collapsed to the constant string.
inline std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  std::set<double> xs(x.begin(), x.end());
  std::set<double> ys(y.begin(), y.end());
  if (xs.size() < 2 || ys.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return (n * sxy - sx * sy) / denom;
}

inline DepthReport depth_report(const std::vector<BuildTrace>& traces) {
  if (traces.size() < 2) throw InvalidInput("depth report needs at least two sweep points");
  DepthReport rep;
  rep.d_in = traces.front().d_in;
  std::vector<double> inv_w;
  std::vector<double> len;
  for (const auto& t : traces) {
    DepthRow row;
    row.eps = t.eps;
    row.w = t.w;
    row.radius = t.radius;
    row.length = t.total_length;
    row.predicted = std::pow(t.radius / t.w, static_cast<double>(t.d_in + 1));
    rep.rows.push_back(row);
    inv_w.push_back(1.0 / t.w);
    len.push_back(static_cast<double>(t.total_length));
  }
  rep.slope = loglog_slope(inv_w, len);
  return rep;
}

// Runs the builder at each epsilon (lengths only; nothing is verified here).
inline DepthReport depth_sweep(const Function& f, const ModulusSpec& spec, const Ball& domain,
                               const std::vector<double>& eps_values, const BuildOptions& opt = {}) {
  std::vector<BuildTrace> traces;
  for (double eps : eps_values) traces.push_back(build(f, spec, domain, eps, opt).trace);
  return depth_report(traces);
}

}  // namespace narrow
