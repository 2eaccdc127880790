#include "gausstv/operators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gausstv/error.hpp"

namespace gausstv {

void apply_grad(const Grid& grid, std::span<const double> u, std::span<double> out) {
  const int m = grid.dim();
  const double inv_h = 1.0 / grid.spacing();
  for (std::size_t n = 0; n < grid.size(); ++n) {
    for (int a = 0; a < m; ++a) {
      const std::size_t next = grid.neighbor(n, a, +1);
      out[n * m + a] = next == kNoNode ? 0.0 : (u[next] - u[n]) * inv_h;
    }
  }
}

void apply_div_gamma(const Grid& grid, std::span<const double> z, std::span<double> out) {
  const int m = grid.dim();
  const double inv_h = 1.0 / grid.spacing();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    for (int a = 0; a < m; ++a) {
      const std::size_t next = grid.neighbor(n, a, +1);
      if (next == kNoNode) continue;
      const double flux = grid.face_weight(n, a) * z[n * m + a] * inv_h;
      out[n] += flux;
      out[next] -= flux;
    }
  }
  for (std::size_t n = 0; n < grid.size(); ++n) out[n] /= grid.node_weight(n);
}

VectorField grad(const ScalarField& u) {
  const Grid& g = u.grid();
  std::vector<double> out(g.size() * g.dim());
  apply_grad(g, u.values(), out);
  return VectorField(u.grid_ptr(), std::move(out));
}

ScalarField div_gamma(const VectorField& z) {
  const Grid& g = z.grid();
  std::vector<double> out(g.size());
  apply_div_gamma(g, z.values(), out);
  return ScalarField(z.grid_ptr(), std::move(out));
}

double integrate(const ScalarField& f) {
  const Grid& g = f.grid();
  double s = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) s += f[n] * g.node_weight(n);
  return s;
}

namespace {

void require_same_grid(const Grid& a, const Grid& b) {
  if (&a != &b) throw InputError("fields live on different grids");
}

}  // namespace

double inner(const ScalarField& u, const ScalarField& v) {
  require_same_grid(u.grid(), v.grid());
  const Grid& g = u.grid();
  double s = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) s += u[n] * v[n] * g.node_weight(n);
  return s;
}

double inner(const VectorField& z, const VectorField& y) {
  require_same_grid(z.grid(), y.grid());
  const Grid& g = z.grid();
  const auto w = g.face_weights();
  const auto a = z.values();
  const auto b = y.values();
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) s += a[k] * b[k] * w[k];
  return s;
}

double l2_distance(const ScalarField& u, const ScalarField& v) {
  require_same_grid(u.grid(), v.grid());
  const Grid& g = u.grid();
  double s = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double d = u[n] - v[n];
    s += d * d * g.node_weight(n);
  }
  return std::sqrt(s);
}

}  // namespace gausstv
