#include "gausstv/functionals.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "gausstv/error.hpp"
#include "gausstv/operators.hpp"

namespace gausstv {

void Problem::validate() const {
  const Grid& g = grid();
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw InputError("eps must be finite and >= 0");
  if (lambda && (!(*lambda > 0.0) || !std::isfinite(*lambda))) throw InputError("lambda must be > 0");
  if (ball) {
    if (!g.is_ball()) throw InputError("ball problem needs a ball grid");
    if (!std::isfinite(ball->boundary_level)) throw InputError("boundary level M must be finite");
    if (lambda) throw InputError("lambda is not supported on ball problems");
  }
  if (model == Model::ornstein_uhlenbeck && (ball || lambda)) {
    throw InputError("the Ornstein-Uhlenbeck model takes neither a ball spec nor lambda");
  }
  if (!(solver.tolerance > 0.0)) throw InputError("solver tolerance must be positive");
  if (solver.max_iterations < 0) throw InputError("max_iterations must be >= 0");
  if (!(solver.step_ratio > 0.0)) throw InputError("step_ratio must be positive");
  if (solver.initial && solver.initial->size() != g.size()) {
    throw InputError("initial guess length does not match node count");
  }
}

namespace {

// |p_c|^2 for the cell anchored at n, from a staggered gradient.
double weighted_square(const Grid& g, std::span<const double> du, std::size_t n) {
  double s = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    const double q = g.face_weight(n, a) * du[n * g.dim() + a];
    s += q * q;
  }
  return s;
}

std::vector<double> gradient_of(const ScalarField& u) {
  std::vector<double> du(u.size() * u.grid().dim());
  apply_grad(u.grid(), u.values(), du);
  return du;
}

}  // namespace

double tv_gamma(const ScalarField& u) {
  const Grid& g = u.grid();
  const auto du = gradient_of(u);
  double s = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (g.is_cell(n)) s += std::sqrt(weighted_square(g, du, n));
  }
  return s;
}

double smoothed_tv(const ScalarField& u, double eps) {
  const Grid& g = u.grid();
  const auto du = gradient_of(u);
  double s = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!g.is_cell(n)) continue;
    const double e = eps * g.cell_weight(n);
    s += std::sqrt(e * e + weighted_square(g, du, n));
  }
  return s;
}

double fidelity(const ScalarField& u, const ScalarField& g) {
  if (&u.grid() != &g.grid()) throw InputError("fields live on different grids");
  const Grid& grid = u.grid();
  double s = 0.0;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const double d = u[n] - g[n];
    s += d * d * grid.node_weight(n);
  }
  return 0.5 * s;
}

double j_eps(const ScalarField& u, const Problem& p) {
  return smoothed_tv(u, p.eps) + fidelity(u, p.data);
}

double ball_objective(const ScalarField& u, const Problem& p) {
  if (!p.ball) throw InputError("ball_objective needs a ball spec");
  const Grid& g = u.grid();
  double boundary = 0.0;
  for (const auto& b : g.boundary()) {
    boundary += std::abs(u[b.node] - p.ball->boundary_level) * g.boundary_weight(b.node);
  }
  return j_eps(u, p) + boundary;
}

double ou_energy(const ScalarField& u, const ScalarField& g) {
  const Grid& grid = u.grid();
  const auto du = gradient_of(u);
  const auto w = grid.face_weights();
  double s = 0.0;
  for (std::size_t k = 0; k < du.size(); ++k) s += w[k] * du[k] * du[k];
  return 0.5 * s + fidelity(u, g);
}

double j_lambda(const ScalarField& u, const ScalarField& g, double lambda) {
  if (!(lambda > 0.0)) throw InputError("j_lambda needs lambda > 0");
  const Grid& grid = u.grid();
  const auto du = gradient_of(u);
  double s = 0.0;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    if (!grid.is_cell(n)) continue;
    const double wc = grid.cell_weight(n);
    const double q2 = weighted_square(grid, du, n);
    // lambda sqrt(lambda^2 wc^2 + q2) - lambda^2 wc, written without cancellation.
    const double root = std::sqrt(lambda * lambda * wc * wc + q2);
    s += lambda * q2 / (root + lambda * wc);
  }
  return s + fidelity(u, g);
}

double objective(const ScalarField& u, const Problem& p) {
  if (p.model == Model::ornstein_uhlenbeck) return ou_energy(u, p.data);
  if (p.lambda) return j_lambda(u, p.data, *p.lambda);
  if (p.ball) return ball_objective(u, p);
  return j_eps(u, p);
}

}  // namespace gausstv
