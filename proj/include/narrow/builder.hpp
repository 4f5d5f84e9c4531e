#pragma once

#include <chrono>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "narrow/geometry.hpp"
#include "narrow/max_min_string.hpp"
#include "narrow/modulus.hpp"

namespace narrow {

// A frame with its clamp data: l(apex) = 0, l = eps on the base, replicated
// over every output component.
struct ExtensionStep {
  ExtensionFrame frame;
  AffineMap ell;
  Vector f_at_apex;
};

inline AffineMap frame_affine(const ExtensionFrame& frame, double eps, Eigen::Index d_out) {
  // l(x) = eps * (a - axis . x) / (a - h)
  const double scale = eps / frame.height();
  Matrix w(d_out, frame.axis.size());
  for (Eigen::Index k = 0; k < d_out; ++k) w.row(k) = -scale * frame.axis.transpose();
  return AffineMap(std::move(w), Vector::Constant(d_out, scale * frame.apex_offset));
}

inline ExtensionStep make_step(const ExtensionFrame& frame, double eps, const Function& f) {
  Vector at_apex = detail::checked_eval(f, frame.apex());
  AffineMap ell = frame_affine(frame, eps, at_apex.size());
  return ExtensionStep{frame, std::move(ell), std::move(at_apex)};
}

// g <- max(f(A) - l, min(f(A) + l, g)).
inline void extend_in_place(MaxMinString& g, const ExtensionStep& step) {
  require_dim(step.f_at_apex.size(), g.d_out(), "extension step output");
  g.append(Op::Min, step.ell.plus_constant(step.f_at_apex));
  g.append(Op::Max, AffineMap(-step.ell.weights(), step.f_at_apex - step.ell.offset()));
}

inline MaxMinString extend(MaxMinString g, const ExtensionStep& step) {
  extend_in_place(g, step);
  return g;
}

struct AnnulusRecord {
  std::size_t index = 0;
  double r = 0.0;
  double r_prime = 0.0;
  std::size_t steps = 0;
  std::size_t cumulative_length = 0;
};

struct BuildTrace {
  double eps = 0.0;
  double w = 0.0;       // inverse modulus at eps
  double radius = 0.0;  // R, radius of the enclosing ball
  Eigen::Index d_in = 0;
  bool heuristic = false;
  bool clamped = false;  // w >= R, constant string returned
  std::vector<AnnulusRecord> annuli;
  std::size_t total_length = 1;
  std::size_t steps_checked = 0;
  std::size_t linbound_checks = 0;
  std::size_t linbound_violations = 0;
  std::size_t densify_rounds = 0;
  double max_step_diameter = 0.0;
  double seconds = 0.0;
  std::vector<std::string> log;

  // Rows: annulus_index, r, r_prime, steps, cumulative_length.
  std::string to_csv() const {
    std::ostringstream ss;
    ss.precision(17);
    ss << "annulus_index,r,r_prime,steps,cumulative_length\n";
    for (const auto& a : annuli) {
      ss << a.index << ',' << a.r << ',' << a.r_prime << ',' << a.steps << ',' << a.cumulative_length << '\n';
    }
    return ss.str();
  }
};

struct BuildOptions {
  CoverOptions cover;
  double geometry_tolerance = 1e-12;
  double linbound_tolerance = 1e-9;
  bool check_linbound = true;
  std::size_t max_length = 50'000'000;
};

namespace detail {

inline void fail_geometry(const std::string& what, const ExtensionFrame& frame, double r, double r_prime) {
  std::ostringstream ss;
  ss.precision(17);
  ss << what << " (r=" << r << ", r'=" << r_prime << ", h=" << frame.base_offset << ", a=" << frame.apex_offset
     << ", base radius=" << frame.base_radius << ")";
  throw GeometryError(ss.str());
}

// Step hypotheses: the corner region is no wider than w, its sector contains
// B_{r'} (hence everything certified so far in this increment), and l has the
// prescribed values at the apex and on the base.
inline void check_step(const ExtensionStep& step, double w, double eps, double r, double r_prime,
                       const BuildOptions& opt, BuildTrace& trace) {
  const auto& fr = step.frame;
  const double tol = opt.geometry_tolerance;
  const double diam = fr.diameter();
  trace.max_step_diameter = std::max(trace.max_step_diameter, diam);
  if (diam > w * (1.0 + tol)) fail_geometry("corner region wider than the inverse modulus", fr, r, r_prime);
  if (fr.inscribed_radius() < r_prime * (1.0 - tol)) fail_geometry("sector does not contain B_r'", fr, r, r_prime);
  const double at_apex = step.ell(fr.apex()).cwiseAbs().maxCoeff();
  if (at_apex > tol * eps * (1.0 + fr.apex_offset / fr.height())) fail_geometry("l(apex) != 0", fr, r, r_prime);
  for (const auto& v : fr.base_vertices()) {
    const double dev = (step.ell(v).array() - eps).abs().maxCoeff();
    if (dev > tol * eps * (1.0 + fr.apex_offset / fr.height())) fail_geometry("l != eps on the base", fr, r, r_prime);
  }
  ++trace.steps_checked;
}

// Sample points of K and of the corner region, for f(A) - l - eps <= f <= f(A) + l + eps.
inline std::vector<Vector> linbound_probes(const ExtensionFrame& fr, double r) {
  std::vector<Vector> pts;
  const Vector perp = fr.perpendicular();
  const double s = std::sqrt(std::max(0.0, r * r - fr.base_offset * fr.base_offset));
  pts.push_back(r * fr.axis);
  pts.push_back(-r * fr.axis);
  pts.push_back(Vector::Zero(fr.axis.size()));
  pts.push_back(fr.base_offset * fr.axis + s * perp);
  pts.push_back(fr.base_offset * fr.axis - s * perp);
  pts.push_back(0.5 * (fr.base_offset + fr.apex_offset) * fr.axis);
  for (const auto& v : fr.base_vertices()) pts.push_back(v);
  return pts;
}

inline void check_linbound(const ExtensionStep& step, const Function& f, double eps, double r,
                           const BuildOptions& opt, BuildTrace& trace) {
  for (const auto& x : linbound_probes(step.frame, r)) {
    const Vector fx = checked_eval(f, x);
    const Vector ell = step.ell(x);
    ++trace.linbound_checks;
    for (Eigen::Index k = 0; k < fx.size(); ++k) {
      const double lo = step.f_at_apex[k] - ell[k] - eps;
      const double hi = step.f_at_apex[k] + ell[k] + eps;
      const double slack = opt.linbound_tolerance * (1.0 + std::abs(fx[k]));
      if (fx[k] < lo - slack || fx[k] > hi + slack) {
        ++trace.linbound_violations;
        if (trace.log.size() < 100) {
          std::ostringstream ss;
          ss.precision(12);
          ss << "linear bound violated at r=" << r << " component " << k << ": f=" << fx[k] << " not in [" << lo
             << ", " << hi << "]";
          trace.log.push_back(ss.str());
        }
      }
    }
  }
}

}  // namespace detail

struct BuildResult {
  MaxMinString string;
  BuildTrace trace;
};

// Grows an eps-approximation from the constant f(center) on B_w out to the
// enclosing ball, one annulus at a time, cutting a corner of diameter <= w per
// frame. f is evaluated at apexes slightly outside the ball (up to 2w).
inline BuildResult build(const Function& f, const ModulusSpec& spec, const Ball& domain, double eps,
                         const BuildOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index d_in = domain.dim();
  if (d_in < 1 || d_in > 3) throw InvalidInput("builder supports d_in in {1, 2, 3}");
  const Vector center = domain.center;
  Function shifted = [&f, center](const Vector& y) { return f(y + center); };

  BuildTrace trace;
  trace.eps = eps;
  trace.w = inverse_modulus(spec, eps);
  trace.radius = domain.radius;
  trace.d_in = d_in;
  trace.heuristic = spec.heuristic();
  if (trace.heuristic) trace.log.emplace_back("modulus is empirical: result is heuristic");

  const double w = trace.w;
  const double big_r = domain.radius;
  Vector f0 = detail::checked_eval(shifted, Vector::Zero(d_in));
  MaxMinString g = MaxMinString::constant(d_in, f0);

  if (w >= big_r) {
    trace.clamped = true;
    trace.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {g.shifted(center), std::move(trace)};
  }

  double r = w;
  std::size_t index = 0;
  while (r < big_r) {
    CoverPlan plan = cover_boundary(r, w, d_in, opt.cover);
    trace.densify_rounds += static_cast<std::size_t>(plan.densify_rounds);
    for (const auto& frame : plan.frames) {
      ExtensionStep step = make_step(frame, eps, shifted);
      detail::check_step(step, w, eps, r, plan.r_prime, opt, trace);
      if (opt.check_linbound) detail::check_linbound(step, shifted, eps, r, opt, trace);
      extend_in_place(g, step);
    }
    if (g.length() > opt.max_length) throw GeometryError("string length exceeds the configured maximum");
    if (!(plan.r_prime > r)) throw GeometryError("annulus radius failed to increase");
    trace.annuli.push_back({index++, r, plan.r_prime, plan.frames.size(), g.length()});
    r = plan.r_prime;
  }
  trace.total_length = g.length();
  trace.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {g.shifted(center), std::move(trace)};
}

}  // namespace narrow
