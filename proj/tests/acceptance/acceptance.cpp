// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: gausstv_acceptance <path to gausstv executable> [criterion numbers...]

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "fixtures.hpp"
#include "gausstv/functionals.hpp"
#include "gausstv/operators.hpp"
#include "gausstv/solvers.hpp"
#include "gausstv/theorem_lab.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace gausstv;
using namespace testing_support;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, std::string note) {
    pass = pass && ok;
    notes.push_back((ok ? "" : "!! ") + std::move(note));
  }
};

using Fn = std::function<double(std::span<const double>)>;

double sup_abs(const ScalarField& g) {
  double s = 0;
  for (double v : g.values()) s = std::max(s, std::abs(v));
  return s;
}

// 1. grad and div_gamma are exact negative adjoints.
Outcome integration_by_parts() {
  Outcome out;
  std::mt19937_64 rng(1);
  for (const auto& g : {box(1, 6, 0.01), box(2, 5, 0.1)}) {
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
      ScalarField u = random_field(g, rng);
      VectorField z = random_vector_field(g, rng);
      const VectorField du = grad(u);
      const ScalarField dz = div_gamma(z);
      const double defect = std::abs(inner(du, z) + inner(u, dz));
      // Cauchy-Schwarz bound of either pairing.
      const double scale = std::max(std::sqrt(inner(du, du) * inner(z, z)), std::sqrt(inner(u, u) * inner(dz, dz)));
      worst = std::max(worst, defect / scale);
    }
    out.check(worst <= 1e-12, fmt::format("{}D N={}: max |defect|/scale {:.2e}", g->dim(), g->size(), worst));
  }
  return out;
}

// 2. Ornstein-Uhlenbeck closed forms and second-order convergence.
Outcome ou_closed_forms() {
  Outcome out;
  struct Case {
    const char* name;
    Fn g, u;
  };
  const Case cases[] = {
      {"g=x", [](auto x) { return x[0]; }, [](auto x) { return x[0] / 2; }},
      {"g=x^2", [](auto x) { return x[0] * x[0]; }, [](auto x) { return x[0] * x[0] / 3 + 2.0 / 3; }},
  };
  for (const auto& c : cases) {
    // The ansatz solves the continuum equation at sample points.
    double ansatz = 0;
    for (double x = -4; x <= 4; x += 0.25) {
      const double d = 1e-3;
      const double xm[] = {x - d}, x0[] = {x}, xp[] = {x + d};
      const double du = (c.u(xp) - c.u(xm)) / (2 * d), d2u = (c.u(xp) - 2 * c.u(x0) + c.u(xm)) / (d * d);
      ansatz = std::max(ansatz, std::abs(oracle::ou_residual(x, c.u(x0), du, d2u, c.g(x0))));
    }
    std::vector<double> inner_err, outer_err;
    for (double h : {0.02, 0.01, 0.005}) {
      auto grid = box(1, 6, h);
      Problem p(sample(grid, c.g));
      p.model = Model::ornstein_uhlenbeck;
      Solution s = solve_ou(p);
      if (!s.report.converged) out.check(false, fmt::format("{} h={} did not converge", c.name, h));
      outer_err.push_back(sup_error(s.u, c.u, 4.0));
      inner_err.push_back(sup_error(s.u, c.u, 2.0));
    }
    const double order = std::min(std::log2(inner_err[0] / inner_err[1]), std::log2(inner_err[1] / inner_err[2]));
    out.check(ansatz <= 1e-5, fmt::format("{}: ansatz residual {:.1e}", c.name, ansatz));
    out.check(outer_err[2] <= 1e-3, fmt::format("{}: sup error on |x|<=4 at h=0.005 {:.2e}", c.name, outer_err[2]));
    out.check(order >= 1.8, fmt::format("{}: order on |x|<=2 {:.2f} (errors {:.2e} {:.2e} {:.2e})", c.name, order,
                                        inner_err[0], inner_err[1], inner_err[2]));
  }
  return out;
}

// 3. Exact TV minimizers carry a dual certificate.
Outcome tv_dual_certificates() {
  Outcome out;
  auto grid = box(1, 6, 0.01);
  const VectorField ones = VectorField::sample_faces(grid, [](auto, int) { return 1.0; });
  for (double slope : {2.0, 1.0}) {
    Problem p(sample(grid, [slope](auto x) { return slope * x[0]; }));
    p.solver.tolerance = 1e-9;
    const Fn oracle_u = [slope](auto x) { return (slope - 1.0) * x[0]; };
    // The oracle pair (u, z = 1) satisfies the discrete equation up to O(h).
    const auto oracle_cert = dual_certificate(sample(grid, oracle_u), ones, p, 4.0);
    Solution s = solve_tv_pd(p);
    const auto cert = dual_certificate(s.u, s.z, p, 4.0);
    out.check(oracle_cert.stationarity <= 10 * grid->spacing(),
              fmt::format("g={}x: oracle pair stationarity {:.1e}", slope, oracle_cert.stationarity));
    out.check(s.report.converged, fmt::format("g={}x: {} iterations, {}", slope, s.report.iterations,
                                              s.report.converged ? "converged" : s.report.message));
    out.check(cert.stationarity <= 1e-6 && cert.feasibility <= 1e-6 && cert.alignment <= 1e-6,
              fmt::format("g={}x: stationarity {:.1e} feasibility {:.1e} alignment {:.1e} ({} aligned cells)", slope,
                          cert.stationarity, std::max(0.0, cert.feasibility), cert.alignment, cert.aligned_cells));
    const double err = sup_error(s.u, oracle_u, 4.0);
    out.check(err <= 1e-3, fmt::format("g={}x: sup |u - oracle| {:.1e}", slope, err));
  }
  return out;
}

// 4. Convex data give convex minimizers; the certifier rejects a non-convex case.
Outcome convexity_corpus() {
  Outcome out;
  struct Entry {
    const char* name;
    int m;
    Fn g;
  };
  const Entry corpus[] = {
      {"x^2", 1, [](auto x) { return x[0] * x[0]; }},
      {"|x|", 1, [](auto x) { return std::abs(x[0]); }},
      {"max(x,0)", 1, [](auto x) { return std::max(x[0], 0.0); }},
      {"exp(x)", 1, [](auto x) { return std::exp(std::min(x[0], 50.0)); }},
      {"|x|+x^2/2", 1, [](auto x) { return std::abs(x[0]) + x[0] * x[0] / 2; }},
      {"|x|_2", 2, [](auto x) { return std::hypot(x[0], x[1]); }},
      {"x1^2+x2^2", 2, [](auto x) { return x[0] * x[0] + x[1] * x[1]; }},
      {"max(x1,x2)", 2, [](auto x) { return std::max(x[0], x[1]); }},
  };
  const auto grid1 = box(1, 6, 0.01);
  const auto grid2 = box(2, 6, 0.05);
  for (const auto& e : corpus) {
    const auto& grid = e.m == 1 ? grid1 : grid2;
    const ScalarField data = sample(grid, e.g);
    const double el_tol = 1e-8 * std::max(1.0, sup_abs(data));
    const double tol = convexity_tolerance(el_tol, grid->spacing());
    std::string line = fmt::format("{} (tol {:.1e}):", e.name, tol);
    bool ok = true;
    for (double eps : {1.0, 0.1, 0.01}) {
      Problem p(data);
      p.eps = eps;
      p.solver.tolerance = el_tol;
      Solution s = solve(p);
      const auto cert = korevaar_gap(s.u, tol, 4.0);
      ok = ok && s.report.converged && cert.verdict == Verdict::convex;
      line += fmt::format(" eps={} gap {:.1e}{}", eps, cert.gap, s.report.converged ? "" : " (not converged)");
    }
    Problem ou(data);
    ou.model = Model::ornstein_uhlenbeck;
    Solution s = solve(ou);
    const auto cert = korevaar_gap(s.u, 5 * grid->spacing() * grid->spacing(), 4.0);
    ok = ok && s.report.converged && cert.verdict == Verdict::convex;
    line += fmt::format(" ou gap {:.1e}{}", cert.gap, s.report.converged ? "" : " (not converged: " + s.report.message + ")");
    out.check(ok, line);
  }
  Problem control(sample(grid1, [](auto x) { return -x[0] * x[0] + (x[0] > 0 ? 4.0 : 0.0); }));
  control.model = Model::ornstein_uhlenbeck;
  Solution s = solve(control);
  const double tol = convexity_tolerance(control.solver.tolerance, grid1->spacing());
  const auto cert = korevaar_gap(s.u, tol, 4.0);
  out.check(cert.gap >= 10 * tol && cert.verdict == Verdict::not_convex,
            fmt::format("negative control -x^2+4*step(x): gap {:.3g} = {:.0f} x tol, witness x={:.2f} x'={:.2f}",
                        cert.gap, cert.gap / tol, cert.x[0], cert.x_partner[0]));
  return out;
}

// 5. Ordered data give ordered minimizers.
Outcome comparison_principle() {
  Outcome out;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto random_convex = [&](const GridPtr& g) {
    const double a = 0.5 * U(rng), b = U(rng), s = 2 * U(rng) - 1, c = 2 * U(rng) - 1;
    return sample(g, [=](auto x) {
      double r2 = 0;
      for (double xi : x) r2 += xi * xi;
      return a * r2 + b * std::abs(x[0] - s) + c * x[x.size() - 1];
    });
  };
  const auto box1 = box(1, 6, 0.01), ball1 = ball(1, 2.0, 2.5, 0.01), box2 = box(2, 4, 0.1);
  for (int m : {1, 2}) {
    double worst = INFINITY, threshold = 0;
    int passed = 0;
    for (int trial = 0; trial < 20; ++trial) {
      const bool use_ball = m == 1 && trial % 4 == 3;
      const auto& g = m == 2 ? box2 : use_ball ? ball1 : box1;
      const ScalarField g2 = random_convex(g);
      const double a = U(rng), s = U(rng);
      std::vector<double> dir(m);
      for (double& d : dir) d = 2 * U(rng) - 1;
      // g1 = g2 + a (1 + max(0, dir . x - s)) stays convex and dominates g2.
      std::vector<double> v(g->size());
      for (std::size_t n = 0; n < g->size(); ++n) {
        double t = -s;
        for (int k = 0; k < m; ++k) t += dir[k] * g->coord(n, k);
        v[n] = g2[n] + a * (1 + std::max(0.0, t));
      }
      Problem p1(ScalarField(g, std::move(v))), p2(g2);
      p1.eps = p2.eps = trial % 2 ? 0.1 : 1.0;
      if (use_ball) {
        p2.ball = BallSpec{2 * U(rng)};
        p1.ball = BallSpec{p2.ball->boundary_level + U(rng)};
      }
      const auto r = check_comparison(p1, p2);
      passed += r.pass ? 1 : 0;
      worst = std::min(worst, r.min_difference);
      threshold = r.threshold;
    }
    out.check(passed == 20, fmt::format("{}D: {}/20 pairs ordered, worst min(u1-u2) {:.2e} (threshold {:.0e})", m,
                                        passed, worst, threshold));
  }
  return out;
}

// 6. The barrier is a supersolution once its offset reaches the bound.
Outcome barrier_supersolution() {
  Outcome out;
  const double h = 0.02;
  auto grid = ball(2, 2.0, 2.5, h);
  const ScalarField zero(grid, 0.0);
  const double C = oracle::barrier_bound(2, 1.0, 1.0, 2.0, 0.0);
  out.check(C == 5.0 && BarrierSpec::offset_bound(2, 1.0, 1.0, 2.0, 0.0) == C, fmt::format("offset bound {}", C));
  for (const std::vector<double>& center : {std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 0.0}}) {
    BarrierSpec b{center, 1.0, C, 2.0, 1.0};
    const auto r = barrier_residual(b, zero);
    const double expected = -2.0 / (1.0 * 1.0) + C - 1.0;
    out.check(r.min_residual >= -2 * h, fmt::format("x0=({},{}) C=5: min residual {:.3f} (>= {})", center[0],
                                                    center[1], r.min_residual, -2 * h));
    out.check(std::abs(r.center_residual - expected) <= 5 * h,
              fmt::format("x0=({},{}) C=5: center residual {:.4f} vs {}", center[0], center[1], r.center_residual,
                          expected));
    b.offset = 0.0;
    const auto control = barrier_residual(b, zero);
    out.check(control.min_residual <= -2.5,
              fmt::format("x0=({},{}) C=0: min residual {:.3f}", center[0], center[1], control.min_residual));
  }
  return out;
}

// 7. Above the barrier bound the solution detaches with a vertical contact angle.
Outcome contact_angle() {
  Outcome out;
  const double M = oracle::barrier_bound(1, 1.0, 1.0, 2.0, 0.0) + 1.0;
  for (double h : {0.01, 0.001}) {
    auto grid = ball(1, 2.0, 2.5, h);
    Problem p(ScalarField(grid, 0.0));
    p.eps = 1.0;
    p.ball = BallSpec{M};
    Solution s = solve_ball(p);
    const auto prof = contact_angle_profile(s.u, s.z, p);
    out.check(s.report.converged && prof.flagged == 0 && prof.min_abs_flux >= 0.99,
              fmt::format("h={}: M={} u(boundary) {:.4f}, |z.nu| at the nodes {:.4f} / {:.4f}", h, M,
                          prof.nodes.front().u, std::abs(prof.nodes.front().flux), std::abs(prof.nodes.back().flux)));
    // The innermost face lies h/2 inside and carries an O(h) deficit.
    out.notes.push_back(fmt::format("h={}: innermost face value {:.4f} (recorded)", h,
                                    std::abs(prof.nodes.front().face_flux)));
  }
  return out;
}

// 8. eps- and lambda-continuation limits and the J_lambda identity.
Outcome limits() {
  Outcome out;
  auto grid = box(1, 6, 0.01);
  Problem p(sample(grid, [](auto x) { return x[0] * x[0]; }));
  p.solver.tolerance = 1e-8 * std::max(1.0, sup_abs(p.data));

  std::vector<double> eps_schedule;
  for (int k = 0; k <= 10; ++k) eps_schedule.push_back(std::ldexp(1.0, -k));
  const auto eps_steps = continuation(p, ContinuationParameter::eps, eps_schedule);
  bool all = true;
  for (const auto& s : eps_steps) all = all && s.solution && s.solution->report.converged;
  const double tail = eps_steps.back().distance_to_previous.value_or(INFINITY);
  out.check(all && tail < 1e-2, fmt::format("eps 1..1/1024: all converged {}, distances {:.2e} {:.2e} ... {:.2e}",
                                            all, *eps_steps[1].distance_to_previous,
                                            *eps_steps[2].distance_to_previous, tail));

  Problem ou = p;
  ou.model = Model::ornstein_uhlenbeck;
  const Solution reference = solve(ou);
  std::vector<double> lambda_schedule;
  for (int k = 0; k <= 10; ++k) lambda_schedule.push_back(std::ldexp(1.0, k));
  const auto lambda_steps = continuation(p, ContinuationParameter::lambda, lambda_schedule);
  all = true;
  double identity = 0, route = 0;
  for (const auto& s : lambda_steps) {
    if (!s.solution || !s.solution->report.converged) {
      all = false;
      continue;
    }
    const double lambda = s.value;
    const ScalarField& u = s.solution->u;
    const double tv_part = lambda * smoothed_tv(u, lambda);
    const double fid = fidelity(u, p.data);
    identity = std::max(identity, std::abs(j_lambda(u, p.data, lambda) - (tv_part + fid - lambda * lambda *
                                                                                                grid->cell_mass())) /
                                      (tv_part + fid));
  }
  // Second route: u_lambda = lambda v with v the eps = 1 minimizer for data g / lambda.
  for (double lambda : {3.0, 50.0, 1000.0}) {
    std::vector<double> scaled(p.data.values().begin(), p.data.values().end());
    for (double& v : scaled) v /= lambda;
    Problem q(ScalarField(grid, std::move(scaled)));
    q.eps = 1.0;
    q.solver.tolerance = p.solver.tolerance / lambda;
    const Solution v = solve(q);
    Problem direct = p;
    direct.lambda = lambda;
    const Solution u = solve(direct);
    std::vector<double> lv(v.u.values().begin(), v.u.values().end());
    for (double& x : lv) x *= lambda;
    route = std::max(route, l2_distance(u.u, ScalarField(grid, std::move(lv))) / std::max(1.0, lambda));
  }
  const double to_ou = l2_distance(lambda_steps.back().solution->u, reference.u);
  out.check(all && to_ou < 1e-3, fmt::format("lambda 1..1024: all converged {}, |u_1024 - u_ou| {:.2e}", all, to_ou));
  out.check(identity <= 1e-10, fmt::format("J_lambda identity: max relative defect {:.1e}", identity));
  out.check(route <= 1e-6, fmt::format("rescaled eps=1 route: max |u_lambda - lambda v| / lambda {:.1e}", route));
  return out;
}

// 9. The command-line tool is reproducible and reports failures by exit code.
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_tool(const std::string& tool, const fs::path& cfg) {
  const std::string cmd = fmt::format("'{}' run '{}' 2>/dev/null", tool, cfg.string());
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli(const std::string& tool) {
  Outcome out;
  const fs::path dir = fs::temp_directory_path() / "gausstv_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return dir / name;
  };

  const auto verify = write("verify.cfg",
                            "command = verify\nproblem.eps = 0.1\nproblem.h = 0.01\ng.expr = x^2 + max(x, 0)\n"
                            "seed = 12345\nverify.trials = 3\noutput.dir = verify\n");
  const int first = run_tool(tool, verify);
  const std::string csv = slurp(dir / "verify" / "solution.csv"), json = slurp(dir / "verify" / "report.json");
  const int second = run_tool(tool, verify);
  const bool same = csv == slurp(dir / "verify" / "solution.csv") && json == slurp(dir / "verify" / "report.json");
  out.check(first == 0 && second == 0 && same && !csv.empty(),
            fmt::format("verify twice: exit {} {}, outputs bit-identical {} ({} + {} bytes)", first, second, same,
                        csv.size(), json.size()));

  const auto sweep = write("sweep.cfg", "command = sweep\nproblem.h = 0.02\ng.expr = abs(x)\nsweep.param = eps\n"
                                        "sweep.values = 1, 0.1\nseed = 3\noutput.dir = sweep\n");
  const int s1 = run_tool(tool, sweep);
  const std::string table = slurp(dir / "sweep" / "sweep.csv"), entry = slurp(dir / "sweep" / "solution_001.csv");
  const int s2 = run_tool(tool, sweep);
  const bool sweep_same = table == slurp(dir / "sweep" / "sweep.csv") && entry == slurp(dir / "sweep" / "solution_001.csv");
  out.check(s1 == 0 && s2 == 0 && sweep_same && !entry.empty(),
            fmt::format("sweep twice: exit {} {}, outputs bit-identical {}", s1, s2, sweep_same));

  const auto ou = write("ou.cfg", "command = solve\nproblem.model = ou\nproblem.h = 0.01\ng.expr = x^2\noutput.dir = ou\n");
  const int ou_code = run_tool(tool, ou);
  double ou_err = INFINITY;
  {
    std::ifstream in(dir / "ou" / "solution.csv");
    std::string line;
    std::getline(in, line);
    ou_err = 0;
    while (std::getline(in, line)) {
      double x = 0, u = 0;
      char comma = 0;
      std::istringstream row(line);
      row >> x >> comma >> u;
      if (std::abs(x) <= 4 + 1e-9) ou_err = std::max(ou_err, std::abs(u - (x * x / 3 + 2.0 / 3)));
    }
  }
  out.check(ou_code == 0 && ou_err <= 1e-3,
            fmt::format("ou x^2 solve: exit {}, CSV sup error on |x|<=4 {:.1e}", ou_code, ou_err));

  const int cert = run_tool(tool, write("cert.cfg", "command = certify\nproblem.eps = 0.01\ng.expr = abs(x)\n"
                                                    "output.dir = cert\n"));
  out.check(cert == 0, fmt::format("certify abs(x) eps=0.01: exit {}", cert));

  const int bad = run_tool(tool, write("bad.cfg", "command = solve\nproblem.eps = -1\ng.expr = x\noutput.dir = bad\n"));
  const std::string bad_log_cmd =
      fmt::format("'{}' run '{}' 2>&1 | grep -q problem.eps", tool, (dir / "bad.cfg").string());
  const bool names_key = std::system(bad_log_cmd.c_str()) == 0;
  out.check(bad == 1 && names_key, fmt::format("eps=-1: exit {}, diagnostic names problem.eps {}", bad, names_key));
  const int typo = run_tool(tool, write("typo.cfg", "command = solve\nproblem.epsilon = 1\ng.expr = x\n"));
  out.check(typo == 1, fmt::format("unknown key: exit {}", typo));
  const int nc = run_tool(tool, write("nc.cfg", "command = solve\nproblem.eps = 0.01\ng.expr = abs(x)\n"
                                                "solver.max_iter = 1\noutput.dir = nc\n"));
  out.check(nc == 3, fmt::format("max_iter=1: exit {}", nc));
  fs::remove_all(dir);
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <gausstv executable> [criteria...]\n", argv[0]);
    return 2;
  }
  const std::string tool = argv[1];
  std::set<int> only;
  for (int k = 2; k < argc; ++k) only.insert(std::atoi(argv[k]));

  const Criterion criteria[] = {
      {1, "integration by parts", 5, integration_by_parts},
      {2, "OU closed forms", 10, ou_closed_forms},
      {3, "TV dual certificates", 60, tv_dual_certificates},
      {4, "convexity corpus", 900, convexity_corpus},
      {5, "comparison principle", 300, comparison_principle},
      {6, "barrier supersolution", 30, barrier_supersolution},
      {7, "contact angle", 60, contact_angle},
      {8, "continuation limits", 600, limits},
      {9, "CLI reproducibility", 60, [&] { return cli(tool); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, fmt::format("exception: {}", e.what()));
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.check(seconds < c.budget_seconds, fmt::format("{:.1f} s (budget {:.0f} s)", seconds, c.budget_seconds));
    failures += o.pass ? 0 : 1;
    fmt::print("{} {} {}\n", o.pass ? "PASS" : "FAIL", c.id, c.name);
    for (const auto& n : o.notes) fmt::print("       {}\n", n);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
