#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "narrow/narrow.hpp"

namespace {

using narrow::Ball;
using narrow::Box;
using narrow::json;
using narrow::Vector;

enum Exit : int { kOk = 0, kVerifyFailed = 1, kUsage = 2, kInternal = 3 };

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw narrow::InvalidInput("cannot parse " + what + " '" + s + "' as a number");
  }
  while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
  if (used != s.size()) throw narrow::InvalidInput("trailing characters in " + what + " '" + s + "'");
  return v;
}

Vector to_vector(const std::string& csv, const std::string& what) {
  const auto parts = split(csv, ',');
  if (parts.empty()) throw narrow::InvalidInput(what + " is empty");
  Vector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = to_double(parts[i], what);
  return v;
}

// "box:lo..hi" (every axis), "box:lo1..hi1,lo2..hi2" (per axis) or
// "ball:c1,c2,...:r".
struct Domain {
  std::variant<Box, Ball> shape;

  Eigen::Index dim() const {
    return std::visit([](const auto& s) { return s.dim(); }, shape);
  }
  Ball ball() const {
    if (auto* b = std::get_if<Box>(&shape)) return b->enclosing_ball();
    return std::get<Ball>(shape);
  }
  Box box() const {
    if (auto* b = std::get_if<Box>(&shape)) return *b;
    const auto& ball = std::get<Ball>(shape);
    return Box(ball.center.array() - ball.radius, ball.center.array() + ball.radius);
  }
};

Domain parse_domain(const std::string& text, std::optional<Eigen::Index> din) {
  if (text.rfind("box:", 0) == 0) {
    const auto axes = split(text.substr(4), ',');
    std::vector<double> lo;
    std::vector<double> hi;
    for (const auto& axis : axes) {
      const auto dots = axis.find("..");
      if (dots == std::string::npos) throw narrow::InvalidInput("box axis '" + axis + "' needs the form lo..hi");
      lo.push_back(to_double(axis.substr(0, dots), "box bound"));
      hi.push_back(to_double(axis.substr(dots + 2), "box bound"));
    }
    Eigen::Index d = static_cast<Eigen::Index>(lo.size());
    if (d == 1 && din) d = *din;
    if (din && d != *din) throw narrow::InvalidInput("box has " + std::to_string(lo.size()) + " axes but d_in is " + std::to_string(*din));
    Vector l(d);
    Vector h(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto k = lo.size() == 1 ? 0 : static_cast<std::size_t>(i);
      l[i] = lo[k];
      h[i] = hi[k];
    }
    return Domain{Box(l, h)};
  }
  if (text.rfind("ball:", 0) == 0) {
    const auto rest = text.substr(5);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos) throw narrow::InvalidInput("ball domain needs the form ball:c1,c2,...:r");
    Vector c = to_vector(rest.substr(0, colon), "ball center");
    const double r = to_double(rest.substr(colon + 1), "ball radius");
    if (din && c.size() != *din) throw narrow::InvalidInput("ball center dimension does not match d_in");
    return Domain{Ball(c, r)};
  }
  throw narrow::InvalidInput("domain must start with box: or ball:");
}

struct ModulusFlags {
  std::optional<double> lipschitz;
  std::string hoelder;
  bool estimate = false;

  void add_to(CLI::App* cmd) {
    auto* l = cmd->add_option("--lipschitz", lipschitz, "Lipschitz constant of the target");
    auto* h = cmd->add_option("--hoelder", hoelder, "Hoelder modulus C:alpha");
    auto* e = cmd->add_flag("--estimate-modulus", estimate, "estimate the modulus by sampling (heuristic)");
    l->excludes(h)->excludes(e);
    h->excludes(e);
  }

  bool given() const { return lipschitz.has_value() || !hoelder.empty() || estimate; }

  narrow::ModulusSpec resolve(const narrow::Function& f, const Ball& ball, std::uint64_t seed) const {
    if (lipschitz) return narrow::Lipschitz{*lipschitz};
    if (!hoelder.empty()) {
      const auto parts = split(hoelder, ':');
      if (parts.size() != 2) throw narrow::InvalidInput("--hoelder needs C:alpha");
      return narrow::Hoelder{to_double(parts[0], "Hoelder constant"), to_double(parts[1], "Hoelder exponent")};
    }
    if (estimate) {
      narrow::EstimateOptions opt;
      opt.seed = seed;
      return narrow::estimate_modulus(f, ball, opt);
    }
    throw narrow::InvalidInput("give one of --lipschitz, --hoelder or --estimate-modulus");
  }
};

narrow::expr::Expr parse_fn(const std::string& src, Eigen::Index din, std::optional<Eigen::Index> dout) {
  auto e = narrow::expr::parse(src, din);
  if (dout && e.d_out() != *dout) {
    throw narrow::InvalidInput("--fn has " + std::to_string(e.d_out()) + " outputs but --dout is " +
                               std::to_string(*dout));
  }
  return e;
}

json run_config(const std::string& command, const std::vector<std::pair<std::string, json>>& fields) {
  json cfg;
  cfg["command"] = command;
  for (const auto& [k, v] : fields) cfg[k] = v;
  return cfg;
}

// Compiles, checks the net against the string, and writes it. Returns false
// (after reporting) when the check fails.
bool compile_and_write(const narrow::MaxMinString& g, const Ball& domain, const std::string& path, const json& cfg,
                       std::uint64_t seed) {
  narrow::ReluNet net = narrow::compile(g, domain);
  const auto rep = narrow::verify_compilation(net, g, domain, 10000, seed);
  if (!rep.ok()) {
    std::cerr << "compiled net does not match the string: deviation " << rep.max_deviation << " > " << rep.tolerance
              << (rep.widths_ok ? "" : ", wrong hidden width") << (rep.depth_ok ? "" : ", wrong depth") << '\n';
    return false;
  }
  net.meta().extra["run"] = cfg;
  narrow::write_file_atomic(path, narrow::serialize_net(net));
  std::cout << "net: depth " << net.depth() << ", hidden width " << g.d_in() + g.d_out() << ", max deviation "
            << rep.max_deviation << " -> " << path << '\n';
  return true;
}

void write_string(const narrow::MaxMinString& g, const std::string& path, const json& cfg) {
  json doc = narrow::string_to_json(g);
  doc["meta"] = json{{"run", cfg}};
  narrow::write_file_atomic(path, doc.dump() + "\n");
}

std::string join(const Vector& v) {
  std::ostringstream ss;
  ss.precision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) ss << (i ? "," : "") << v[i];
  return ss.str();
}

struct PointsCsv {
  std::vector<Vector> rows;
  Eigen::Index cols = 0;
};

PointsCsv read_points_csv(const std::string& path) {
  std::istringstream in(narrow::read_text_file(path));
  PointsCsv out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    Vector v = to_vector(line, "line " + std::to_string(lineno));
    if (out.cols == 0) out.cols = v.size();
    if (v.size() != out.cols) throw narrow::InvalidInput("line " + std::to_string(lineno) + " has the wrong column count");
    out.rows.push_back(std::move(v));
  }
  if (out.rows.empty()) throw narrow::InvalidInput(path + " has no data rows");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build narrow ReLU networks from max-min strings"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "seed for every random choice")->capture_default_str();

  // approximate
  std::string fn_src, domain_src, out_path, compile_path, trace_path;
  Eigen::Index din = 0;
  std::optional<Eigen::Index> dout;
  double eps = 0.0;
  ModulusFlags modulus;
  auto* approx = app.add_subcommand("approximate", "epsilon-approximation of a continuous function");
  approx->add_option("--fn", fn_src, "target expression in x1..xd")->required();
  approx->add_option("--din", din, "input dimension")->required()->check(CLI::Range(1, 3));
  approx->add_option("--dout", dout, "output dimension (checked against --fn)");
  approx->add_option("--eps", eps, "target sup error")->required();
  approx->add_option("--domain", domain_src, "box:lo..hi or ball:c1,...:r")->required();
  approx->add_option("--out", out_path, "string JSON output")->required();
  approx->add_option("--compile", compile_path, "also write the compiled net here");
  approx->add_option("--trace", trace_path, "per-annulus trace CSV");
  modulus.add_to(approx);

  // interpolate
  std::string points_path;
  std::optional<Eigen::Index> interp_din;
  Eigen::Index interp_dout = 1;
  auto* interp = app.add_subcommand("interpolate", "exact max-min string through labeled points");
  interp->add_option("--points", points_path, "CSV rows x1..xd,f1..fk")->required();
  interp->add_option("--din", interp_din, "input columns (default: all but --dout)");
  interp->add_option("--dout", interp_dout, "value columns")->capture_default_str();
  interp->add_option("--out", out_path, "string JSON output")->required();
  interp->add_option("--compile", compile_path, "also write the compiled net here");

  // compile
  std::string string_path;
  auto* comp = app.add_subcommand("compile", "lower a max-min string to a ReLU net");
  comp->add_option("--string", string_path, "string JSON")->required();
  comp->add_option("--domain", domain_src, "ball:c1,...:r or box:lo..hi")->required();
  comp->add_option("--out", out_path, "net JSON output")->required();

  // eval
  std::string net_path, input_src;
  auto* ev = app.add_subcommand("eval", "run a net on one input");
  ev->add_option("--net", net_path, "net JSON")->required();
  ev->add_option("--input", input_src, "comma-separated input")->required();

  // verify
  std::size_t grid = 0;
  std::optional<double> verify_eps;
  std::string errors_path;
  auto* ver = app.add_subcommand("verify", "grid error of a net against an expression");
  ver->add_option("--net", net_path, "net JSON")->required();
  ver->add_option("--fn", fn_src, "reference expression")->required();
  ver->add_option("--domain", domain_src, "box:lo..hi or ball:c1,...:r (default: the net's domain)");
  ver->add_option("--grid", grid, "points per axis (default 10000 / 200 / 40 by d_in)");
  ver->add_option("--eps", verify_eps, "fail (exit 1) when the error exceeds eps + grid slack");
  ver->add_option("--errors", errors_path, "per-point error CSV");
  modulus.add_to(ver);

  // analyze
  Eigen::Index analyze_din = 2;
  std::string cert_path;
  auto* an = app.add_subcommand("analyze", "lower-bound certificate against the quadratic witness");
  an->add_option("--net", net_path, "net JSON")->required();
  an->add_option("--din", analyze_din, "expected input dimension")->capture_default_str();
  an->add_option("--out", cert_path, "certificate JSON");

  // report
  std::string sweep_src;
  auto* rep = app.add_subcommand("report", "string length across an epsilon sweep");
  rep->add_option("--sweep", sweep_src, "comma-separated epsilons")->required();
  rep->add_option("--fn", fn_src, "target expression")->required();
  rep->add_option("--din", din, "input dimension")->required()->check(CLI::Range(1, 3));
  rep->add_option("--domain", domain_src, "box:lo..hi or ball:c1,...:r")->required();
  rep->add_option("--out", out_path, "CSV output")->required();
  modulus.add_to(rep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*approx) {
      const Domain dom = parse_domain(domain_src, din);
      const auto e = parse_fn(fn_src, din, dout);
      const auto f = narrow::expr::to_function(e);
      const Ball ball = dom.ball();
      const auto spec = modulus.resolve(f, ball, seed);
      auto result = narrow::build(f, spec, ball, eps);
      const auto& t = result.trace;
      const json cfg = run_config("approximate", {{"fn", fn_src}, {"din", din}, {"eps", eps}, {"domain", domain_src},
                                                  {"modulus", spec.describe()}, {"seed", seed},
                                                  {"heuristic", t.heuristic}});
      write_string(result.string, out_path, cfg);
      std::cout << "string: length " << result.string.length() << ", w " << t.w << ", R " << t.radius << ", annuli "
                << t.annuli.size() << (t.heuristic ? " (heuristic modulus)" : "") << " -> " << out_path << '\n';
      if (t.linbound_violations > 0) {
        std::cerr << "warning: " << t.linbound_violations << " of " << t.linbound_checks
                  << " linear-bound probes exceeded eps\n";
      }
      if (!trace_path.empty()) narrow::write_file_atomic(trace_path, t.to_csv());
      if (!compile_path.empty() && !compile_and_write(result.string, ball, compile_path, cfg, seed)) return kInternal;
      return kOk;
    }

    if (*interp) {
      const auto csv = read_points_csv(points_path);
      const Eigen::Index d = interp_din ? *interp_din : csv.cols - interp_dout;
      if (d < 1 || interp_dout < 1 || d + interp_dout != csv.cols) {
        throw narrow::InvalidInput("CSV has " + std::to_string(csv.cols) + " columns, expected d_in + d_out");
      }
      std::vector<Vector> pts;
      std::vector<Vector> vals;
      for (const auto& row : csv.rows) {
        pts.push_back(row.head(d));
        vals.push_back(row.tail(interp_dout));
      }
      narrow::LabeledPointSet data(d, interp_dout, pts, vals);
      narrow::InterpolateOptions opt;
      opt.seed = seed;
      const auto res = narrow::interpolate(data, opt);
      const json cfg = run_config("interpolate", {{"points", points_path}, {"din", d}, {"dout", interp_dout}, {"seed", seed}});
      write_string(res.string, out_path, cfg);
      std::cout << "string: length " << res.string.length() << " through " << pts.size() << " points -> " << out_path
                << '\n';
      if (!compile_path.empty()) {
        Vector lo = pts.front();
        Vector hi = pts.front();
        for (const auto& p : pts) {
          lo = lo.cwiseMin(p);
          hi = hi.cwiseMax(p);
        }
        Ball ball = Ball::around_box(lo, hi);
        if (ball.radius <= 0.0) ball = Ball(ball.center, 1.0);
        if (!compile_and_write(res.string, ball, compile_path, cfg, seed)) return kInternal;
      }
      return kOk;
    }

    if (*comp) {
      const auto g = narrow::deserialize_string(narrow::read_text_file(string_path));
      const Domain dom = parse_domain(domain_src, g.d_in());
      const json cfg = run_config("compile", {{"string", string_path}, {"domain", domain_src}, {"seed", seed}});
      return compile_and_write(g, dom.ball(), out_path, cfg, seed) ? kOk : kInternal;
    }

    if (*ev) {
      const auto net = narrow::deserialize_net(narrow::read_text_file(net_path));
      const Vector x = to_vector(input_src, "--input");
      narrow::require_dim(x.size(), net.d_in(), "--input");
      std::cout << join(narrow::forward(net, x)) << '\n';
      return kOk;
    }

    if (*ver) {
      const auto net = narrow::deserialize_net(narrow::read_text_file(net_path));
      std::optional<Domain> dom;
      if (!domain_src.empty()) {
        dom = parse_domain(domain_src, net.d_in());
      } else if (net.meta().domain) {
        dom = Domain{*net.meta().domain};
      } else {
        throw narrow::InvalidInput("net has no stored domain; pass --domain");
      }
      const auto e = parse_fn(fn_src, net.d_in(), net.d_out());
      const auto f = narrow::expr::to_function(e);
      const Box box = dom->box();
      const std::size_t n = grid ? grid : narrow::default_grid_size(net.d_in());
      const auto report = narrow::net_grid_error(net, f, box, n);
      double slack = 0.0;
      if (modulus.given()) slack = narrow::grid_slack(modulus.resolve(f, box.enclosing_ball(), seed), report.spacing);
      std::cout << "grid " << report.points << " points, spacing " << report.spacing << "\nmax error " << report.max_error
                << " at (" << join(report.worst_point) << ")\nmean error " << report.mean_error << "\nslack "
                << slack << '\n';
      if (!errors_path.empty()) {
        std::ostringstream csv;
        csv.precision(17);
        for (Eigen::Index i = 0; i < net.d_in(); ++i) csv << 'x' << i + 1 << ',';
        csv << "error\n";
        for (Eigen::Index p = 0; p < report.inputs.cols(); ++p) {
          csv << join(report.inputs.col(p)) << ',' << report.errors[p] << '\n';
        }
        narrow::write_file_atomic(errors_path, csv.str());
      }
      if (verify_eps && report.max_error > *verify_eps + slack) {
        std::cerr << "verification failed: max error " << report.max_error << " > eps " << *verify_eps << " + slack "
                  << slack << '\n';
        return kVerifyFailed;
      }
      return kOk;
    }

    if (*an) {
      const auto net = narrow::deserialize_net(narrow::read_text_file(net_path));
      if (net.d_in() != analyze_din) {
        throw narrow::OutOfScopeNet("net has d_in " + std::to_string(net.d_in()) + ", expected " +
                                    std::to_string(analyze_din));
      }
      const auto cert = narrow::certify_lower_bound(net, narrow::WitnessInstance(analyze_din));
      std::cout << "case " << cert.which_case << "\nhalfspaces " << cert.halfspace_count << '\n';
      if (cert.which_case == 1) {
        std::cout << "bound " << cert.bound << " (threshold " << cert.threshold << ")\n";
      } else {
        std::cout << "witness (" << join(*cert.witness) << ")\nsampled error " << cert.sampled_error << '\n';
      }
      std::cout << cert.diagnosis << '\n';
      if (!cert_path.empty()) narrow::write_file_atomic(cert_path, cert.to_json().dump(2) + "\n");
      if (cert.which_case == 1 && !cert.meets_threshold(1e-6)) return kVerifyFailed;
      return kOk;
    }

    if (*rep) {
      const Domain dom = parse_domain(domain_src, din);
      const auto e = parse_fn(fn_src, din, std::nullopt);
      const auto f = narrow::expr::to_function(e);
      const Ball ball = dom.ball();
      const auto spec = modulus.resolve(f, ball, seed);
      std::vector<double> eps_values;
      for (const auto& s : split(sweep_src, ',')) eps_values.push_back(to_double(s, "--sweep"));
      narrow::BuildOptions opt;
      opt.check_linbound = false;
      const auto report = narrow::depth_sweep(f, spec, ball, eps_values, opt);
      narrow::write_file_atomic(out_path, report.to_csv());
      std::cout << report.to_csv();
      return kOk;
    }
  } catch (const narrow::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const narrow::ModulusError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const narrow::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kUsage;
  } catch (const narrow::Error& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
