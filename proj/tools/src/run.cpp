#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "gausstv/error.hpp"
#include "gausstv/functionals.hpp"
#include "gausstv/operators.hpp"
#include "gausstv/solvers.hpp"
#include "gausstv/theorem_lab.hpp"
#include "gausstv_cli/app.hpp"
#include "gausstv_cli/expression.hpp"

namespace gausstv::cli {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string data_label(const RunConfig& c) {
  if (c.g_expr) return *c.g_expr;
  return "file:" + c.g_file->filename().string();
}

GridPtr build_grid(const RunConfig& c) {
  try {
    if (c.R) return Grid::build(c.m, BallDomain{*c.R, c.half_width()}, c.h);
    return Grid::build(c.m, BoxDomain{c.half_width()}, c.h);
  } catch (const InputError& e) {
    throw ConfigError(c.R ? "problem.R" : "problem.h", e.what());
  }
}

Problem make_problem(const RunConfig& c, ScalarField g) {
  Problem p(std::move(g));
  p.model = c.model == "ou" ? Model::ornstein_uhlenbeck : Model::total_variation;
  p.eps = c.eps;
  p.lambda = c.lambda;
  if (c.M) p.ball = BallSpec{*c.M};
  p.solver.tolerance = c.tol;
  p.solver.max_iterations = c.max_iter;
  p.solver.linear_solver = c.linear == "cholesky" ? LinearSolver::cholesky : LinearSolver::conjugate_gradient;
  p.solver.newton = c.newton;
  try {
    p.validate();
  } catch (const InputError& e) {
    throw ConfigError("problem", e.what());
  }
  return p;
}

json echo(const RunConfig& c) {
  json entries = json::object();
  for (const auto& [k, v] : c.entries) entries[k] = v;
  return entries;
}

json resolved(const RunConfig& c, const Grid& g) {
  json r;
  r["command"] = to_string(c.command);
  r["model"] = c.model;
  r["m"] = c.m;
  r["L"] = c.half_width();
  r["h"] = c.h;
  r["eps"] = c.eps;
  r["lambda"] = optional_number(c.lambda);
  r["R"] = optional_number(c.R);
  r["M"] = optional_number(c.M);
  r["g"] = data_label(c);
  r["tol"] = c.tol;
  r["max_iter"] = c.max_iter;
  r["linear"] = c.linear;
  r["newton"] = c.newton;
  r["window"] = optional_number(c.window());
  r["nodes"] = g.size();
  r["boundary_nodes"] = g.boundary().size();
  return r;
}

json report_json(const SolveReport& r, double energy) {
  json j;
  j["method"] = r.method;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["linear_iterations"] = r.linear_iterations;
  j["el_residual"] = r.el_residual;
  j["feasibility"] = r.feasibility;
  j["alignment"] = r.alignment;
  j["energy"] = energy;
  j["energy_history"] = r.energy_history;
  j["message"] = r.message;
  return j;
}

json convexity_json(const ConvexityCertificate& c) {
  json j;
  j["gap"] = c.gap;
  j["tolerance"] = c.tolerance;
  j["verdict"] = to_string(c.verdict);
  j["witness"] = {{"x", c.x}, {"x_partner", c.x_partner}, {"midpoint", c.x_midpoint}};
  j["pairs"] = c.pairs;
  return j;
}

json dual_json(const DualCertificate& d) {
  return {{"stationarity", d.stationarity},
          {"feasibility", d.feasibility},
          {"alignment", d.alignment},
          {"aligned_cells", d.aligned_cells}};
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", file.string()));
  out << text;
  if (!out) throw std::runtime_error(fmt::format("failed writing '{}'", file.string()));
}

void write_field(const std::filesystem::path& file, const ScalarField& u, const ScalarField& g, const VectorField& z) {
  std::ostringstream s;
  write_field_csv(s, u, g, z);
  write_text(file, s.str());
}

struct ReferenceError {
  double sup = 0.0;
  double l2 = 0.0;
};

std::optional<ReferenceError> reference_error(const RunConfig& c, const ScalarField& u) {
  if (!c.reference_expr) return std::nullopt;
  Expression ref = [&] {
    try {
      return Expression::parse(*c.reference_expr, c.m);
    } catch (const ExpressionError& e) {
      throw ConfigError("reference.expr", e.what());
    }
  }();
  const auto window = c.reference_window ? c.reference_window : c.window();
  const Grid& g = u.grid();
  ReferenceError e;
  double l2 = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    bool inside = true;
    for (int a = 0; a < g.dim() && window; ++a) inside = inside && std::abs(g.coord(n, a)) <= *window * (1 + 1e-12);
    if (!inside) continue;
    double v = 0.0;
    try {
      v = ref(g.point(n));
    } catch (const ExpressionError& ex) {
      throw ConfigError("reference.expr", ex.what());
    }
    const double d = u[n] - v;
    e.sup = std::max(e.sup, std::abs(d));
    l2 += d * d * g.node_weight(n);
  }
  e.l2 = std::sqrt(l2);
  return e;
}

json reference_json(const RunConfig& c, const std::optional<ReferenceError>& e) {
  if (!e) return nullptr;
  const auto window = c.reference_window ? c.reference_window : c.window();
  return {{"expr", *c.reference_expr}, {"window", optional_number(window)}, {"sup_error", e->sup}, {"l2_error", e->l2}};
}

// Nonnegative convex perturbation a (1 + max(0, b . x - s)) with seeded parameters.
ScalarField random_bump(const GridPtr& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double a = 0.1 + 0.9 * unit(rng);
  const double s = 4.0 * unit(rng) - 2.0;
  double b[2] = {2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0};
  return ScalarField::sample(grid, [&](std::span<const double> x) {
    double t = -s;
    for (std::size_t k = 0; k < x.size(); ++k) t += b[k] * x[k];
    return a * (1.0 + std::max(0.0, t));
  });
}

struct Check {
  std::string name;
  double value;
  double threshold;
  bool pass;
};

int finish(const RunConfig& c, json& report, const json& timing, int code, std::ostream& log) {
  report["status"] = code == kOk ? "ok" : code == kCertificationFailure ? "certification-failure" : "not-converged";
  report["exit_code"] = code;
  std::filesystem::create_directories(c.output_dir);
  write_text(c.output_dir / "report.json", report.dump(2) + "\n");
  write_text(c.output_dir / "timing.json", timing.dump(2) + "\n");
  fmt::print(log, "{}: {} (exit {})\n", to_string(c.command), report["status"].get<std::string>(), code);
  return code;
}

int run_single(const RunConfig& c, const Problem& p, json& report, json& timing, std::ostream& log) {
  const auto start = Clock::now();
  const Solution s = solve(p);
  timing["solve_seconds"] = s.report.seconds;
  const double energy = objective(s.u, p);
  report["solve"] = report_json(s.report, energy);
  const auto ref = reference_error(c, s.u);
  report["reference"] = reference_json(c, ref);

  std::filesystem::create_directories(c.output_dir);
  write_field(c.output_dir / "solution.csv", s.u, p.data, s.z);

  int code = s.report.converged ? kOk : kNotConverged;
  if (!s.report.converged) fmt::print(log, "solver did not converge: {} (residual {:.3e})\n", s.report.message, s.report.el_residual);

  if (c.command == Command::certify) {
    const auto cert = korevaar_gap(s.u, convexity_tolerance(c.tol, c.h), c.window());
    const auto dual = dual_certificate(s.u, s.z, p, c.window());
    json certificate;
    certificate["convexity"] = convexity_json(cert);
    certificate["dual"] = dual_json(dual);
    bool pass = cert.verdict == Verdict::convex;
    if (p.ball) {
      const auto profile = contact_angle_profile(s.u, s.z, p);
      json nodes = json::array();
      for (const auto& f : profile.nodes) {
        nodes.push_back({{"x", f.point}, {"normal", f.normal}, {"u", f.u}, {"flux", f.flux}, {"face_flux", f.face_flux}, {"flagged", f.flagged}});
      }
      // The 2D profile is informational; only the 1D endpoints are asserted.
      const bool asserted = c.m == 1;
      certificate["contact_angle"] = {{"min_abs_flux", profile.min_abs_flux},
                                      {"flagged", profile.flagged},
                                      {"asserted", asserted},
                                      {"nodes", nodes}};
      if (asserted && profile.flagged > 0) pass = false;
    }
    certificate["pass"] = pass;
    report["certificate"] = certificate;
    if (code == kOk && !pass) code = kCertificationFailure;
  }

  if (c.command == Command::verify) {
    std::vector<Check> checks;
    const bool tv = p.model == Model::total_variation;
    const auto dual = dual_certificate(s.u, s.z, p);
    checks.push_back({"stationarity", dual.stationarity, c.tol, dual.stationarity <= c.tol});
    if (tv) {
      const double feas = s.z.max_cell_norm() - 1.0;
      checks.push_back({"dual_feasibility", feas, 1e-9, feas <= 1e-9});
    }
    if (tv && p.smoothing() > 0.0) {
      double worst = 0.0;
      const auto& h = s.report.energy_history;
      for (std::size_t k = 1; k < h.size(); ++k) worst = std::max(worst, h[k] - h[k - 1]);
      checks.push_back({"energy_descent", worst, 1e-10, worst <= 1e-10});
    }
    {
      Problem from_zero = p;
      from_zero.solver.initial = std::vector<double>(p.grid().size(), 0.0);
      const Solution other = solve(from_zero);
      const double d = l2_distance(other.u, s.u);
      checks.push_back({"uniqueness", d, 10.0 * c.tol, other.report.converged && d <= 10.0 * c.tol});
    }
    std::mt19937_64 rng(c.seed);
    for (int t = 0; t < c.verify_trials; ++t) {
      const ScalarField bump = random_bump(p.grid_ptr(), rng);
      std::vector<double> lower(p.grid().size());
      for (std::size_t n = 0; n < lower.size(); ++n) lower[n] = p.data[n] - bump[n];
      Problem q = p;
      q.data = ScalarField(p.grid_ptr(), std::move(lower));
      q.solver.initial.reset();
      const Solution sq = solve(q);
      double min_diff = std::numeric_limits<double>::infinity();
      for (std::size_t n = 0; n < p.grid().size(); ++n) min_diff = std::min(min_diff, s.u[n] - sq.u[n]);
      const double threshold = -10.0 * c.tol;
      checks.push_back({fmt::format("comparison_{}", t), min_diff, threshold,
                        sq.report.converged && min_diff >= threshold});
    }
    json list = json::array();
    bool pass = true;
    for (const auto& ch : checks) {
      list.push_back({{"name", ch.name}, {"value", ch.value}, {"threshold", ch.threshold}, {"pass", ch.pass}});
      pass = pass && ch.pass;
      if (!ch.pass) fmt::print(log, "check {} failed: {:.6e} vs {:.6e}\n", ch.name, ch.value, ch.threshold);
    }
    report["verify"] = {{"checks", list}, {"pass", pass}};
    if (code == kOk && !pass) code = kCertificationFailure;
  }
  timing["total_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
  return code;
}

int run_sweep(const RunConfig& c, const Problem& p, json& report, json& timing, std::ostream& log) {
  const auto start = Clock::now();
  const auto parameter = *c.sweep_param == "eps" ? ContinuationParameter::eps : ContinuationParameter::lambda;
  const auto steps = continuation(p, parameter, c.sweep_values);
  std::filesystem::create_directories(c.output_dir);

  json entries = json::array();
  json seconds = json::array();
  std::ostringstream table;
  table << "index,value,converged,iterations,el_residual,distance_to_previous,energy,reference_sup_error,error\n";
  int code = kOk;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const auto& step = steps[k];
    json e;
    e["index"] = k;
    e["value"] = step.value;
    if (!step.solution) {
      code = kNotConverged;
      e["error"] = step.error;
      seconds.push_back(nullptr);
      entries.push_back(e);
      table << fmt::format("{},{:.17g},false,0,,,,,{}\n", k, step.value, step.error);
      continue;
    }
    const Solution& s = *step.solution;
    Problem q = p;
    if (parameter == ContinuationParameter::eps) q.eps = step.value;
    else q.lambda = step.value;
    const double energy = objective(s.u, q);
    const auto ref = reference_error(c, s.u);
    e["solve"] = report_json(s.report, energy);
    e["distance_to_previous"] = optional_number(step.distance_to_previous);
    e["reference"] = reference_json(c, ref);
    const std::string file = fmt::format("solution_{:03d}.csv", k);
    e["file"] = file;
    entries.push_back(e);
    seconds.push_back(s.report.seconds);
    write_field(c.output_dir / file, s.u, p.data, s.z);
    if (!s.report.converged) {
      code = kNotConverged;
      fmt::print(log, "entry {} ({}) did not converge: {}\n", k, step.value, s.report.message);
    }
    table << fmt::format("{},{:.17g},{},{},{:.17g},{},{:.17g},{},\n", k, step.value, s.report.converged ? "true" : "false",
                         s.report.iterations, s.report.el_residual,
                         step.distance_to_previous ? fmt::format("{:.17g}", *step.distance_to_previous) : "", energy,
                         ref ? fmt::format("{:.17g}", ref->sup) : "");
  }
  write_text(c.output_dir / "sweep.csv", table.str());
  report["sweep"] = {{"param", *c.sweep_param}, {"entries", entries}};
  timing["solve_seconds"] = seconds;
  timing["total_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
  return code;
}

}  // namespace

ScalarField load_data(const RunConfig& c, const GridPtr& grid) {
  if (c.g_expr) {
    Expression e = [&] {
      try {
        return Expression::parse(*c.g_expr, c.m);
      } catch (const ExpressionError& ex) {
        throw ConfigError("g.expr", ex.what());
      }
    }();
    try {
      return ScalarField::sample(grid, [&](std::span<const double> x) { return e(x); });
    } catch (const ExpressionError& ex) {
      throw ConfigError("g.expr", ex.what());
    }
  }
  std::ifstream in(*c.g_file);
  if (!in) throw ConfigError("g.file", fmt::format("cannot read '{}'", c.g_file->string()));
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream s(line);
    std::string token;
    while (s >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size() || !std::isfinite(v)) {
        throw ConfigError("g.file", fmt::format("'{}' is not a finite number", token));
      }
      values.push_back(v);
    }
  }
  if (values.size() != grid->size()) {
    throw ConfigError("g.file", fmt::format("expected {} values (one per node), found {}", grid->size(), values.size()));
  }
  return ScalarField(grid, std::move(values));
}

void write_field_csv(std::ostream& out, const ScalarField& u, const ScalarField& g, const VectorField& z) {
  const Grid& grid = u.grid();
  const int m = grid.dim();
  std::vector<double> du(grid.size() * m);
  apply_grad(grid, u.values(), du);
  out << (m == 1 ? "x,u,g,grad_norm,z\n" : "x1,x2,u,g,grad_norm,z1,z2\n");
  for (std::size_t n = 0; n < grid.size(); ++n) {
    double norm = 0.0;
    for (int a = 0; a < m; ++a) norm += du[n * m + a] * du[n * m + a];
    for (int a = 0; a < m; ++a) out << fmt::format("{:.17g},", grid.coord(n, a));
    out << fmt::format("{:.17g},{:.17g},{:.17g}", u[n], g[n], std::sqrt(norm));
    for (int a = 0; a < m; ++a) out << fmt::format(",{:.17g}", z(n, a));
    out << '\n';
  }
}

int run(const RunConfig& c, std::ostream& log) {
  json report;
  json timing;
  report["schema"] = kReportSchema;
  report["command"] = to_string(c.command);
  report["seed"] = c.seed;
  report["config"] = echo(c);
  try {
    const GridPtr grid = build_grid(c);
    report["resolved"] = resolved(c, *grid);
    const Problem p = make_problem(c, load_data(c, grid));
    const int code = c.command == Command::sweep ? run_sweep(c, p, report, timing, log)
                                                 : run_single(c, p, report, timing, log);
    return finish(c, report, timing, code, log);
  } catch (const ConfigError& e) {
    fmt::print(log, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const InputError& e) {
    fmt::print(log, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(log, "config error: output.dir: {}\n", e.what());
    return kConfigError;
  } catch (const std::runtime_error& e) {
    fmt::print(log, "config error: output.dir: {}\n", e.what());
    return kConfigError;
  }
}

int run(const std::filesystem::path& config_file, std::ostream& log) {
  try {
    return run(load_config(config_file), log);
  } catch (const ConfigError& e) {
    fmt::print(log, "config error: {}\n", e.what());
    return kConfigError;
  }
}

}  // namespace gausstv::cli
