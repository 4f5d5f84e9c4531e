#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <utility>
#include <variant>
#include <vector>

#include "narrow/affine.hpp"

namespace narrow {

struct Lipschitz {
  double constant;
};

struct Hoelder {
  double constant;
  double exponent;  // in (0, 1]
};

// Observed oscillation per distance, sorted by distance, cumulative-max so the
// curve is nondecreasing like a true modulus.
struct Empirical {
  std::vector<std::pair<double, double>> samples;  // (delta, oscillation)
  double safety = 0.9;
};

// How fast the target may vary: epsilon -> omega^{-1}(epsilon).
class ModulusSpec {
 public:
  using Variant = std::variant<Lipschitz, Hoelder, Empirical>;

  ModulusSpec(Lipschitz l) : v_(l) {  // NOLINT(google-explicit-constructor)
    if (!(l.constant > 0.0) || !std::isfinite(l.constant)) throw InvalidInput("Lipschitz constant must be > 0");
  }
  ModulusSpec(Hoelder h) : v_(h) {  // NOLINT(google-explicit-constructor)
    if (!(h.constant > 0.0) || !std::isfinite(h.constant)) throw InvalidInput("Hoelder constant must be > 0");
    if (!(h.exponent > 0.0 && h.exponent <= 1.0)) throw InvalidInput("Hoelder exponent must lie in (0, 1]");
  }
  ModulusSpec(Empirical e) : v_(std::move(e)) {  // NOLINT(google-explicit-constructor)
    auto& emp = std::get<Empirical>(v_);
    if (!(emp.safety > 0.0 && emp.safety < 1.0)) throw InvalidInput("safety factor must lie in (0, 1)");
    if (emp.samples.empty()) throw InvalidInput("empirical modulus needs at least one sample");
    std::sort(emp.samples.begin(), emp.samples.end());
    double running = 0.0;
    for (auto& [delta, osc] : emp.samples) {
      if (!(delta > 0.0) || !(osc >= 0.0)) throw InvalidInput("empirical samples need delta > 0, oscillation >= 0");
      running = std::max(running, osc);
      osc = running;
    }
  }

  const Variant& variant() const { return v_; }

  // Empirical estimates are lower bounds on the true modulus, so anything
  // built from them carries no guarantee.
  bool heuristic() const { return std::holds_alternative<Empirical>(v_); }

  std::string describe() const {
    std::ostringstream ss;
    ss.precision(17);
    if (auto* l = std::get_if<Lipschitz>(&v_)) {
      ss << "lipschitz:" << l->constant;
    } else if (auto* h = std::get_if<Hoelder>(&v_)) {
      ss << "hoelder:" << h->constant << ":" << h->exponent;
    } else {
      const auto& e = std::get<Empirical>(v_);
      ss << "empirical:" << e.samples.size() << " samples, safety " << e.safety;
    }
    return ss.str();
  }

 private:
  Variant v_;
};

inline double inverse_modulus(const ModulusSpec& spec, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidInput("epsilon must be positive and finite");
  const auto& v = spec.variant();
  if (auto* l = std::get_if<Lipschitz>(&v)) return eps / l->constant;
  if (auto* h = std::get_if<Hoelder>(&v)) return std::pow(eps / h->constant, 1.0 / h->exponent);
  const auto& e = std::get<Empirical>(v);
  double best = 0.0;
  for (const auto& [delta, osc] : e.samples) {
    if (osc <= eps) best = std::max(best, delta);
  }
  if (best <= 0.0) {
    throw ModulusError("no sampled distance has oscillation <= " + std::to_string(eps) +
                       "; refine the modulus estimate or raise epsilon");
  }
  return e.safety * best;
}

// omega(delta). For the empirical variant this is the observed oscillation at
// the smallest sampled distance >= delta (the largest one if delta exceeds all).
inline double modulus_at(const ModulusSpec& spec, double delta) {
  if (delta <= 0.0) return 0.0;
  const auto& v = spec.variant();
  if (auto* l = std::get_if<Lipschitz>(&v)) return l->constant * delta;
  if (auto* h = std::get_if<Hoelder>(&v)) return h->constant * std::pow(delta, h->exponent);
  const auto& samples = std::get<Empirical>(v).samples;
  for (const auto& [d, osc] : samples) {
    if (d >= delta) return osc;
  }
  return samples.back().second;
}

struct EstimateOptions {
  std::size_t resolution = 1000;  // smallest probed distance = diameter / resolution
  std::size_t rungs = 200;
  std::size_t pairs_per_rung = 256;
  double safety = 0.9;
  std::uint64_t seed = 0;
};

namespace detail {

template <class Rng>
Vector random_unit(Eigen::Index d, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector u(d);
  do {
    for (Eigen::Index i = 0; i < d; ++i) u[i] = normal(rng);
  } while (u.norm() < 1e-12);
  return u / u.norm();
}

template <class Rng>
Vector random_in_ball(const Ball& ball, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto d = ball.dim();
  const double radius = ball.radius * std::pow(unif(rng), 1.0 / static_cast<double>(d));
  return ball.center + radius * random_unit(d, rng);
}

inline Vector checked_eval(const Function& f, const Vector& x) {
  Vector y = f(x);
  if (!y.allFinite()) {
    std::ostringstream ss;
    ss.precision(17);
    ss << "target is not finite at (";
    for (Eigen::Index i = 0; i < x.size(); ++i) ss << (i ? ", " : "") << x[i];
    ss << ")";
    throw NumericError(ss.str());
  }
  return y;
}

}  // namespace detail

// Probes |f(x) - f(y)| on random pairs at distances on a geometric ladder from
// diam(ball) down to diam/resolution.
inline ModulusSpec estimate_modulus(const Function& f, const Ball& ball, const EstimateOptions& opt = {}) {
  if (ball.radius <= 0.0) throw InvalidInput("modulus estimation needs a ball of positive radius");
  if (opt.rungs < 2 || opt.resolution < 2 || opt.pairs_per_rung < 1) throw InvalidInput("bad estimate options");
  std::mt19937_64 rng(opt.seed);
  const double diam = 2.0 * ball.radius;
  const double ratio = std::pow(1.0 / static_cast<double>(opt.resolution), 1.0 / static_cast<double>(opt.rungs - 1));
  Empirical emp;
  emp.safety = opt.safety;
  double delta = diam;
  for (std::size_t rung = 0; rung < opt.rungs; ++rung, delta *= ratio) {
    double osc = 0.0;
    for (std::size_t k = 0; k < opt.pairs_per_rung; ++k) {
      for (int attempt = 0; attempt < 16; ++attempt) {
        Vector x = detail::random_in_ball(ball, rng);
        Vector u = detail::random_unit(ball.dim(), rng);
        Vector y = x + delta * u;
        if (!ball.contains(y, 1e-12 * diam)) y = x - delta * u;
        if (!ball.contains(y, 1e-12 * diam)) continue;
        osc = std::max(osc, (detail::checked_eval(f, x) - detail::checked_eval(f, y)).norm());
        break;
      }
    }
    emp.samples.emplace_back(delta, osc);
  }
  return ModulusSpec(std::move(emp));
}

}  // namespace narrow
