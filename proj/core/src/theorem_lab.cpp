#include "gausstv/theorem_lab.hpp"

#include <algorithm>
#include <cmath>

#include "gausstv/error.hpp"
#include "gausstv/operators.hpp"

namespace gausstv {

namespace {

bool in_window(const Grid& g, std::size_t n, std::optional<double> window) {
  if (!window) return true;
  for (int a = 0; a < g.dim(); ++a) {
    if (std::abs(g.coord(n, a)) > *window * (1.0 + 1e-12)) return false;
  }
  return true;
}

std::vector<double> to_vector(std::span<const double> x) { return {x.begin(), x.end()}; }

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::convex:
      return "convex";
    case Verdict::not_convex:
      return "not-convex";
    case Verdict::inconclusive:
      break;
  }
  return "inconclusive";
}

double convexity_tolerance(double el_tolerance, double h) { return std::max(10.0 * el_tolerance, 5.0 * h * h); }

ConvexityCertificate korevaar_gap(const ScalarField& u, double tolerance, std::optional<double> window) {
  const Grid& g = u.grid();
  const int m = g.dim();
  const int extent = g.lattice_extent();
  ConvexityCertificate cert;
  cert.tolerance = tolerance;
  cert.gap = -std::numeric_limits<double>::infinity();

  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!in_window(g, n, window)) continue;
    const auto i = g.lattice_index(n);
    // Partners with the same lattice parity, visited in node order from n on.
    for (int j0 = i[0]; j0 < extent; j0 += 2) {
      const int j1_start = m == 1 ? 0 : (j0 == i[0] ? i[1] : i[1] % 2);
      const int j1_end = m == 1 ? 1 : extent;
      for (int j1 = j1_start; j1 < j1_end; j1 += 2) {
        const std::size_t partner = g.find({j0, j1});
        if (partner == kNoNode || !in_window(g, partner, window)) continue;
        const std::size_t mid = g.find({(i[0] + j0) / 2, m == 1 ? 0 : (i[1] + j1) / 2});
        if (mid == kNoNode) continue;
        ++cert.pairs;
        const double defect = u[mid] - 0.5 * (u[n] + u[partner]);
        if (defect > cert.gap) {
          cert.gap = defect;
          cert.node = n;
          cert.partner = partner;
          cert.midpoint = mid;
        }
      }
    }
  }

  if (cert.node == kNoNode) {
    cert.gap = 0.0;
    cert.verdict = Verdict::inconclusive;
    return cert;
  }
  cert.x = to_vector(g.point(cert.node));
  cert.x_partner = to_vector(g.point(cert.partner));
  cert.x_midpoint = to_vector(g.point(cert.midpoint));
  if (cert.gap <= tolerance) cert.verdict = Verdict::convex;
  else if (cert.gap >= 10.0 * tolerance) cert.verdict = Verdict::not_convex;
  else cert.verdict = Verdict::inconclusive;
  return cert;
}

// ---------------------------------------------------------------------------

double BarrierSpec::offset_bound(int m, double eps, double r, double R, double g_sup) {
  return m / (eps * r) + R / eps + r + g_sup;
}

bool BarrierSpec::meets_bound(double g_sup) const {
  return offset >= offset_bound(static_cast<int>(center.size()), eps, radius, ambient_radius, g_sup);
}

BarrierResidual barrier_residual(const BarrierSpec& b, const ScalarField& g) {
  const Grid& grid = g.grid();
  const int m = grid.dim();
  const double h = grid.spacing();
  if (static_cast<int>(b.center.size()) != m) throw InputError("barrier center has the wrong dimension");
  if (!(b.radius > 0.0)) throw InputError("barrier radius must be positive");
  if (!(b.eps > 0.0)) throw InputError("barrier eps must be positive");
  double center_norm = 0.0;
  for (double c : b.center) center_norm += c * c;
  center_norm = std::sqrt(center_norm);
  if (center_norm + b.radius > b.ambient_radius * (1.0 + 1e-12)) {
    throw InputError("barrier ball must lie inside the ambient ball");
  }
  if (grid.is_ball() && b.ambient_radius > grid.radius() * (1.0 + 1e-12)) {
    throw InputError("ambient radius exceeds the grid's ball");
  }
  if (!grid.is_ball() && b.ambient_radius > grid.half_width() * (1.0 + 1e-12)) {
    throw InputError("ambient ball exceeds the grid's box");
  }
  if (2.0 * b.radius / h < 8.0) throw InputError("grid must resolve the barrier ball with at least 8 nodes");

  const double r = b.radius;
  const double e2 = b.eps * b.eps;
  auto distance2 = [&](std::span<const double> x) {
    double s = 0.0;
    for (int a = 0; a < m; ++a) s += (x[a] - b.center[a]) * (x[a] - b.center[a]);
    return s;
  };
  // Only faces inside B_r matter; the denominator can vanish outside it when eps > 1.
  const VectorField z = VectorField::sample_faces(g.grid_ptr(), [&](std::span<const double> mid, int axis) {
    const double s2 = distance2(mid);
    if (s2 > r * r) return 0.0;
    return (mid[axis] - b.center[axis]) / std::sqrt(e2 * r * r + (1.0 - e2) * s2);
  });
  std::vector<double> divz(grid.size());
  apply_div_gamma(grid, z.values(), divz);

  BarrierResidual out;
  out.residual.assign(grid.size(), 0.0);
  out.evaluated.assign(grid.size(), 0);
  out.min_residual = std::numeric_limits<double>::infinity();
  double nearest = std::numeric_limits<double>::infinity();
  const double inner = (r - h) * (1.0 + 1e-12);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const double s2 = distance2(grid.point(n));
    if (s2 > inner * inner) continue;
    const double v = b.offset - std::sqrt(std::max(0.0, r * r - s2));
    const double res = -divz[n] + v - g[n];
    out.residual[n] = res;
    out.evaluated[n] = 1;
    if (res < out.min_residual) {
      out.min_residual = res;
      out.argmin = n;
    }
    if (s2 < nearest) {
      nearest = s2;
      out.center_node = n;
      out.center_residual = res;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

ContactAngleProfile contact_angle_profile(const ScalarField& u, const VectorField& z, const Problem& p, double tol) {
  const Grid& g = u.grid();
  if (&z.grid() != &g || &p.grid() != &g) throw InputError("contact angle inputs live on different grids");
  if (!p.ball) throw InputError("contact angle profile needs a ball problem");
  const double level = p.ball->boundary_level;

  ContactAngleProfile out;
  out.min_abs_flux = std::numeric_limits<double>::infinity();
  for (const BoundaryNode& b : g.boundary()) {
    BoundaryFlux f;
    f.node = b.node;
    f.point = to_vector(g.point(b.node));
    f.normal.assign(g.dim(), 0.0);
    f.normal[b.axis] = b.sign;
    f.u = u[b.node];
    // The face on the inner side is stored at the node with the smaller index along the axis.
    const std::size_t inner = g.neighbor(b.node, b.axis, -b.sign);
    if (inner != kNoNode) {
      f.face_flux = b.sign > 0 ? z(inner, b.axis) : -z(b.node, b.axis);
      f.flux = f.face_flux;
      // Faces sit at distance h/2 and 3h/2 from the boundary node; extrapolate
      // linearly to the node itself.
      const std::size_t next = g.neighbor(inner, b.axis, -b.sign);
      if (next != kNoNode) {
        const double second = b.sign > 0 ? z(next, b.axis) : -z(inner, b.axis);
        f.flux = 1.5 * f.face_flux - 0.5 * second;
      }
    }
    if (f.u < level - tol) f.flagged = f.flux < 0.99;
    else if (f.u > level + tol) f.flagged = f.flux > -0.99;
    else f.flagged = std::abs(f.flux) > 1.01;
    out.flagged += f.flagged ? 1 : 0;
    out.min_abs_flux = std::min(out.min_abs_flux, std::abs(f.flux));
    out.nodes.push_back(std::move(f));
  }
  if (out.nodes.empty()) out.min_abs_flux = 0.0;
  return out;
}

// ---------------------------------------------------------------------------

ComparisonResult check_comparison(const Problem& p1, const Problem& p2) {
  const Grid& g = p1.grid();
  const Grid& g2 = p2.grid();
  if (&g != &g2) {
    if (g.dim() != g2.dim() || g.size() != g2.size() || g.spacing() != g2.spacing() || g.is_ball() != g2.is_ball() ||
        g.half_width() != g2.half_width()) {
      throw InputError("comparison needs both problems on the same grid");
    }
  }
  if (p1.model != p2.model || p1.eps != p2.eps || p1.lambda != p2.lambda) {
    throw InputError("comparison needs the same model and smoothing");
  }
  if (p1.ball.has_value() != p2.ball.has_value()) throw InputError("comparison needs matching ball specs");
  if (p1.ball && p1.ball->boundary_level < p2.ball->boundary_level) {
    throw InputError("comparison needs M1 >= M2");
  }
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (p1.data[n] < p2.data[n]) throw InputError("comparison needs g1 >= g2 at every node");
  }

  ComparisonResult out;
  out.upper = solve(p1);
  out.lower = solve(p2);
  out.threshold = -10.0 * std::max(p1.solver.tolerance, p2.solver.tolerance);
  out.min_difference = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double d = out.upper->u[n] - out.lower->u[n];
    if (d < out.min_difference) {
      out.min_difference = d;
      out.argmin = n;
    }
  }
  out.pass = out.upper->report.converged && out.lower->report.converged && out.min_difference >= out.threshold;
  return out;
}

// ---------------------------------------------------------------------------

DualCertificate dual_certificate(const ScalarField& u, const VectorField& z, const Problem& p,
                                 std::optional<double> window) {
  const Grid& g = u.grid();
  if (&z.grid() != &g || &p.grid() != &g) throw InputError("certificate inputs live on different grids");
  const int m = g.dim();
  const double alpha = p.tv_weight();

  std::vector<double> divz(g.size());
  apply_div_gamma(g, z.values(), divz);
  std::vector<double> du(g.size() * m);
  apply_grad(g, u.values(), du);

  DualCertificate out;
  out.feasibility = -1.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!in_window(g, n, window)) continue;
    if (!g.is_boundary(n)) {
      const double r = std::abs(-alpha * divz[n] + u[n] - p.data[n]);
      if (out.stationarity_node == kNoNode || r > out.stationarity) {
        out.stationarity = r;
        out.stationarity_node = n;
      }
    }
    if (!g.is_cell(n)) continue;
    out.feasibility = std::max(out.feasibility, z.cell_norm(n) - 1.0);
    double plain = 0.0, weighted = 0.0, pairing = 0.0;
    for (int a = 0; a < m; ++a) {
      const double pa = du[n * m + a];
      const double wa = g.face_weight(n, a);
      plain += pa * pa;
      weighted += wa * wa * pa * pa;
      pairing += wa * z(n, a) * pa;
    }
    if (std::sqrt(plain) <= 10.0 * g.spacing()) continue;
    ++out.aligned_cells;
    out.alignment = std::max(out.alignment, (std::sqrt(weighted) - pairing) / g.cell_weight(n));
  }
  return out;
}

}  // namespace gausstv
