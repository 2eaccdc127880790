#include "gausstv/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "gausstv/error.hpp"
#include "gausstv/functionals.hpp"
#include "gausstv/linear.hpp"
#include "gausstv/operators.hpp"

namespace gausstv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> starting_point(const Problem& p) {
  if (p.solver.initial) return *p.solver.initial;
  const auto g = p.data.values();
  return {g.begin(), g.end()};
}

double sup_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

double weighted_norm(const Grid& g, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) s += v[n] * v[n] * g.node_weight(n);
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Smoothed energy
//
//   E(u) = alpha sum_c [S_c - eps w_c] + 1/2 sum_n w_n (u_n - g_n)^2
//          + sum_b c_b |u_b - M|,
//   S_c  = sqrt(eps^2 w_c^2 + sum_i (w_{c,i} p_{c,i})^2).
//
// The constant alpha eps cell_mass is dropped so that large eps (the lambda
// path) does not lose digits; S_c - eps w_c is evaluated as q^2 / (S_c + eps w_c).
// ---------------------------------------------------------------------------
class SmoothedEnergy {
 public:
  SmoothedEnergy(const Problem& p)
      : grid_(p.grid()),
        data_(p.data.values()),
        alpha_(p.tv_weight()),
        eps_(p.smoothing()),
        level_(p.ball ? std::optional<double>(p.ball->boundary_level) : std::nullopt),
        du_(grid_.size() * grid_.dim()),
        scratch_(grid_.size() * grid_.dim()),
        root_(grid_.size(), 0.0) {}

  const Grid& grid() const { return grid_; }
  bool has_boundary_term() const { return level_.has_value(); }
  double level() const { return *level_; }
  double alpha() const { return alpha_; }

  double value(std::span<const double> u) {
    apply_grad(grid_, u, scratch_);
    double tv = 0.0;
    for (std::size_t n = 0; n < grid_.size(); ++n) {
      if (!grid_.is_cell(n)) continue;
      const double ew = eps_ * grid_.cell_weight(n);
      const double q2 = weighted_square(scratch_, n);
      tv += q2 / (std::sqrt(ew * ew + q2) + ew);
    }
    double fid = 0.0;
    for (std::size_t n = 0; n < grid_.size(); ++n) {
      const double d = u[n] - data_[n];
      fid += d * d * grid_.node_weight(n);
    }
    return alpha_ * tv + 0.5 * fid + boundary_value(u);
  }

  double boundary_value(std::span<const double> u) const {
    if (!level_) return 0.0;
    double s = 0.0;
    for (const auto& b : grid_.boundary()) s += grid_.boundary_weight(b.node) * std::abs(u[b.node] - *level_);
    return s;
  }

  // Gradient of the smooth part, the dual field z and the cell roots S_c.
  void gradient(std::span<const double> u, std::span<double> out, std::span<double> z) {
    const int m = grid_.dim();
    const double inv_h = 1.0 / grid_.spacing();
    apply_grad(grid_, u, du_);
    for (std::size_t n = 0; n < grid_.size(); ++n) out[n] = grid_.node_weight(n) * (u[n] - data_[n]);
    std::fill(z.begin(), z.end(), 0.0);
    for (std::size_t n = 0; n < grid_.size(); ++n) {
      if (!grid_.is_cell(n)) continue;
      const double ew = eps_ * grid_.cell_weight(n);
      const double root = std::sqrt(ew * ew + weighted_square(du_, n));
      root_[n] = root;
      if (root == 0.0) continue;
      for (int a = 0; a < m; ++a) {
        const std::size_t next = grid_.neighbor(n, a, +1);
        if (next == kNoNode) continue;
        const double wf = grid_.face_weight(n, a);
        const double za = wf * du_[n * m + a] / root;
        z[n * m + a] = za;
        const double flux = alpha_ * wf * za * inv_h;
        out[n] -= flux;
        out[next] += flux;
      }
    }
  }

  // Cell blocks at the point of the last gradient() call. Without a dual
  // estimate these majorize the energy (lagged diffusivity); with one they are
  // the symmetrized primal-dual linearization
  //   K = alpha / S [diag(w^2) - sym(w zeta (w^2 p)^T) / S],
  // which equals the Newton Hessian once zeta = w p / S and stays positive
  // definite for |zeta| <= 1, also where the Newton Hessian degenerates.
  void blocks(std::span<const double> dual, std::span<double> k) const {
    const int m = grid_.dim();
    std::fill(k.begin(), k.end(), 0.0);
    for (std::size_t n = 0; n < grid_.size(); ++n) {
      if (!grid_.is_cell(n)) continue;
      const double root = root_[n];
      if (root == 0.0) continue;
      double* kn = k.data() + n * m * m;
      for (int a = 0; a < m; ++a) {
        const double wa = grid_.face_weight(n, a);
        kn[a * m + a] = alpha_ * wa * wa / root;
        if (dual.empty()) continue;
        for (int b = 0; b < m; ++b) {
          const double wb = grid_.face_weight(n, b);
          const double cross = wa * dual[n * m + a] * wb * wb * du_[n * m + b] +
                               wa * wa * du_[n * m + a] * wb * dual[n * m + b];
          kn[a * m + b] -= 0.5 * alpha_ * cross / (root * root);
        }
      }
    }
  }

  // Linearized update of the dual estimate for the step `du_step`, damped per
  // cell so that |zeta| stays below 1. Uses the state of the last gradient().
  void update_dual(std::span<const double> du_step, std::span<double> dual) const {
    const int m = grid_.dim();
    for (std::size_t n = 0; n < grid_.size(); ++n) {
      if (!grid_.is_cell(n)) continue;
      const double root = root_[n];
      if (root == 0.0) continue;
      double pairing = 0.0;
      for (int a = 0; a < m; ++a) {
        const double wa = grid_.face_weight(n, a);
        pairing += wa * wa * du_[n * m + a] * du_step[n * m + a];
      }
      double delta[2] = {0.0, 0.0};
      for (int a = 0; a < m; ++a) {
        const double wa = grid_.face_weight(n, a);
        const double zeta = dual[n * m + a];
        const double exact = wa * du_[n * m + a] / root;
        delta[a] = exact - zeta + (wa * du_step[n * m + a] - zeta * pairing / root) / root;
      }
      // Largest s in [0, 1] keeping |zeta + s delta| inside the unit ball.
      double s = 1.0;
      double zz = 0.0, zd = 0.0, dd = 0.0;
      for (int a = 0; a < m; ++a) {
        zz += dual[n * m + a] * dual[n * m + a];
        zd += dual[n * m + a] * delta[a];
        dd += delta[a] * delta[a];
      }
      const double limit = 1.0 - 1e-10;
      if (dd > 0.0 && zz + 2 * zd + dd > limit * limit) {
        const double c = zz - limit * limit;
        s = c >= 0.0 ? 0.0 : std::min(1.0, (-zd + std::sqrt(zd * zd - dd * c)) / dd);
      }
      for (int a = 0; a < m; ++a) dual[n * m + a] += s * delta[a];
      if (zz + 2 * s * zd + s * s * dd > 1.0) {
        const double norm = std::sqrt(zz + 2 * s * zd + s * s * dd);
        for (int a = 0; a < m; ++a) dual[n * m + a] /= norm;
      }
    }
  }

  // Sup-norm Euler-Lagrange residual given the smooth gradient; boundary rows
  // of ball problems take the best element of the L1 subdifferential.
  double residual(std::span<const double> u, std::span<const double> gradient) const {
    double r = 0.0;
    for (std::size_t n = 0; n < grid_.size(); ++n) {
      double gn = gradient[n];
      if (level_ && grid_.is_boundary(n)) gn += grid_.boundary_weight(n) * best_subgradient(u[n], gn, n);
      r = std::max(r, std::abs(gn / grid_.node_weight(n)));
    }
    return r;
  }

  double best_subgradient(double un, double gn, std::size_t n) const {
    const double gap = un - *level_;
    if (std::abs(gap) > 1e-13 * std::max(1.0, std::abs(*level_))) return gap > 0 ? 1.0 : -1.0;
    return std::clamp(-gn / grid_.boundary_weight(n), -1.0, 1.0);
  }

 private:
  double weighted_square(std::span<const double> du, std::size_t n) const {
    double s = 0.0;
    for (int a = 0; a < grid_.dim(); ++a) {
      const double q = grid_.face_weight(n, a) * du[n * grid_.dim() + a];
      s += q * q;
    }
    return s;
  }

  const Grid& grid_;
  std::span<const double> data_;
  double alpha_;
  double eps_;
  std::optional<double> level_;
  std::vector<double> du_;
  std::vector<double> scratch_;
  std::vector<double> root_;
};

// Minimizes 1/2 d^T H d + G^T d + sum_b c_b |u_b + d_b - M| by a primal-dual
// active set iteration on the boundary nodes; without a boundary term this is
// the single solve H d = -G. Returns false when a factorization fails.
bool composite_step(CellSystem& system, std::span<const double> blocks, const SmoothedEnergy& energy,
                    std::span<const double> u, std::span<const double> gradient, std::span<double> d,
                    long& solves) {
  const Grid& g = energy.grid();
  const std::size_t n_nodes = g.size();
  std::vector<double> diag(g.node_weights().begin(), g.node_weights().end());
  std::vector<double> rhs(n_nodes);

  if (!energy.has_boundary_term()) {
    system.assemble(blocks, diag);
    for (std::size_t n = 0; n < n_nodes; ++n) rhs[n] = -gradient[n];
    ++solves;
    return system.solve(rhs, d);
  }

  const double level = energy.level();
  const auto boundary = g.boundary();
  // state: +1 / -1 for u_b above / below M, 0 for pinned at M.
  std::vector<int> state(boundary.size());
  for (std::size_t k = 0; k < boundary.size(); ++k) {
    const double gap = u[boundary[k].node] - level;
    state[k] = std::abs(gap) <= 1e-13 * std::max(1.0, std::abs(level)) ? 0 : (gap > 0 ? 1 : -1);
  }
  std::vector<std::size_t> fixed;
  std::vector<double> fixed_values;
  std::vector<double> hd(n_nodes);
  for (int sweep = 0; sweep < 100; ++sweep) {
    system.assemble(blocks, diag);
    for (std::size_t n = 0; n < n_nodes; ++n) rhs[n] = -gradient[n];
    // The active-set multipliers need the unmodified matrix.
    std::vector<double> diag_h(boundary.size());
    for (std::size_t k = 0; k < boundary.size(); ++k) diag_h[k] = system.diagonal(boundary[k].node);
    fixed.clear();
    fixed_values.clear();
    for (std::size_t k = 0; k < boundary.size(); ++k) {
      const std::size_t b = boundary[k].node;
      if (state[k] == 0) {
        fixed.push_back(b);
        fixed_values.push_back(level - u[b]);
      } else {
        rhs[b] -= g.boundary_weight(b) * state[k];
      }
    }
    std::vector<double> full;
    if (!fixed.empty()) {
      // Keep a copy of the assembled matrix product for the multipliers.
      full.assign(rhs.begin(), rhs.end());
    }
    system.fix_nodes(fixed, fixed_values, rhs);
    ++solves;
    if (!system.solve(rhs, d)) return false;

    std::vector<double> multiplier(boundary.size(), 0.0);
    if (!fixed.empty()) {
      system.assemble(blocks, diag);
      system.multiply(d, hd);
      for (std::size_t k = 0; k < boundary.size(); ++k) {
        if (state[k] != 0) continue;
        const std::size_t b = boundary[k].node;
        multiplier[k] = (-gradient[b] - hd[b]) / g.boundary_weight(b);
      }
    }
    bool changed = false;
    for (std::size_t k = 0; k < boundary.size(); ++k) {
      const std::size_t b = boundary[k].node;
      const double s = state[k] == 0 ? multiplier[k] : static_cast<double>(state[k]);
      const double kappa = diag_h[k] / g.boundary_weight(b);
      const double q = s + kappa * (u[b] + d[b] - level);
      const int next = q > 1.0 ? 1 : (q < -1.0 ? -1 : 0);
      if (next != state[k]) {
        state[k] = next;
        changed = true;
      }
    }
    if (!changed) return true;
  }
  return true;
}

}  // namespace

double stationarity_residual(const ScalarField& u, const VectorField& z, const ScalarField& g, double alpha,
                             std::span<const char> mask) {
  const Grid& grid = u.grid();
  std::vector<double> divz(grid.size());
  apply_div_gamma(grid, z.values(), divz);
  double r = 0.0;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    if (!mask.empty() && !mask[n]) continue;
    r = std::max(r, std::abs(-alpha * divz[n] + u[n] - g[n]));
  }
  return r;
}

// ---------------------------------------------------------------------------

Solution solve_ou(const Problem& p) {
  p.validate();
  if (p.ball || p.lambda) throw InputError("solve_ou takes neither a ball spec nor lambda");
  const auto start = Clock::now();
  const Grid& g = p.grid();
  const std::size_t n_nodes = g.size();
  const int m = g.dim();
  const double h = g.spacing();

  std::vector<double> u = starting_point(p);
  std::vector<double> rhs(n_nodes), diag(n_nodes), inv_w(n_nodes);
  std::vector<double> du(n_nodes * m), divu(n_nodes);
  for (std::size_t n = 0; n < n_nodes; ++n) {
    rhs[n] = g.node_weight(n) * p.data[n];
    inv_w[n] = 1.0 / g.node_weight(n);
    diag[n] = g.node_weight(n);
  }
  for (std::size_t n = 0; n < n_nodes; ++n) {
    for (int a = 0; a < m; ++a) {
      const std::size_t next = g.neighbor(n, a, +1);
      if (next == kNoNode) continue;
      const double c = g.face_weight(n, a) / (h * h);
      diag[n] += c;
      diag[next] += c;
    }
  }
  auto apply = [&](std::span<const double> x, std::span<double> y) {
    apply_grad(g, x, du);
    apply_div_gamma(g, du, divu);
    for (std::size_t n = 0; n < n_nodes; ++n) y[n] = g.node_weight(n) * (x[n] - divu[n]);
  };

  std::vector<double> hu(n_nodes), res(n_nodes);
  auto sup_residual = [&](std::span<const double> x) {
    apply(x, hu);
    for (std::size_t n = 0; n < n_nodes; ++n) res[n] = (rhs[n] - hu[n]) * inv_w[n];
    return sup_norm(res);
  };

  Solution out{ScalarField(p.grid_ptr()), VectorField(p.grid_ptr()), {}};
  SolveReport& report = out.report;
  const double g_norm = weighted_norm(g, p.data.values());
  const double target = 1e-12 * std::max(g_norm, std::numeric_limits<double>::min());
  report.energy_history.push_back(ou_energy(ScalarField(p.grid_ptr(), u), p.data));

  bool done = false;
  if (p.solver.linear_solver == LinearSolver::conjugate_gradient) {
    report.method = "pcg";
    const int cap = p.solver.max_iterations > 0 ? p.solver.max_iterations
                                                : static_cast<int>(std::min<std::size_t>(4 * n_nodes + 100, 1000000));
    const CgResult cg = conjugate_gradient(apply, diag, rhs, inv_w, target, cap, u);
    report.iterations = cg.iterations;
    report.linear_iterations = cg.iterations;
    // The gamma-weighted target leaves far-field nodes loosely resolved; the
    // factorization takes over when they miss the sup-norm tolerance.
    done = (cg.converged || cg.residual <= 1e-10 * g_norm) && sup_residual(u) <= p.solver.tolerance;
    if (!done) report.message = "conjugate gradients fell short; switched to sparse factorization";
  }
  if (!done) {
    if (report.method.empty()) report.method = "cholesky";
    else report.method += "+cholesky";
    CellSystem system(g);
    std::vector<double> blocks(n_nodes * m * m, 0.0);
    for (std::size_t n = 0; n < n_nodes; ++n) {
      for (int a = 0; a < m; ++a) blocks[n * m * m + a * m + a] = g.face_weight(n, a);
    }
    system.assemble(blocks, g.node_weights());
    if (!system.solve(rhs, u)) {
      report.message = "sparse factorization failed";
    }
    report.linear_iterations += 1;
    report.iterations = std::max(report.iterations, 1);
  }

  report.el_residual = sup_residual(u);
  const double relative = g_norm > 0.0 ? weighted_norm(g, res) / g_norm : weighted_norm(g, res);

  out.u = ScalarField(p.grid_ptr(), u);
  out.z = grad(out.u);
  report.energy_history.push_back(ou_energy(out.u, p.data));
  report.converged = relative <= 1e-10 && report.el_residual <= p.solver.tolerance;
  if (!report.converged && report.message.empty()) report.message = "residual above tolerance";
  report.seconds = seconds_since(start);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

Solution run_smoothed(const Problem& p) {
  const auto start = Clock::now();
  const Grid& g = p.grid();
  const std::size_t n_nodes = g.size();
  const int m = g.dim();
  const int max_iter = p.solver.max_iterations > 0 ? p.solver.max_iterations : 500;

  SmoothedEnergy energy(p);
  CellSystem system(g);
  std::vector<double> u = starting_point(p);
  std::vector<double> gradient(n_nodes), z(n_nodes * m), blocks(n_nodes * m * m);
  std::vector<double> d(n_nodes), trial(n_nodes);

  Solution out{ScalarField(p.grid_ptr()), VectorField(p.grid_ptr()), {}};
  SolveReport& report = out.report;
  report.method = p.solver.newton ? "newton" : "lagged-diffusivity";
  const double constant = p.tv_weight() * p.smoothing() * g.cell_mass();
  auto record = [&](double e) {
    // History holds the true objective; the j_lambda objective drops
    // lambda^2 cell_mass, which is exactly the constant removed internally.
    report.energy_history.push_back(p.lambda ? e : e + constant);
  };

  std::vector<double> dual, step_grad(n_nodes * m);
  double best_residual = std::numeric_limits<double>::infinity();
  int best_iteration = 0;
  double energy_at_best = std::numeric_limits<double>::infinity();
  double e = energy.value(u);
  record(e);
  for (int it = 0;; ++it) {
    energy.gradient(u, gradient, z);
    if (dual.empty()) dual = z;
    report.el_residual = energy.residual(u, gradient);
    if (report.el_residual <= p.solver.tolerance) {
      report.converged = true;
      break;
    }
    if (it >= max_iter) {
      report.message = "iteration limit reached";
      break;
    }
    // Stalled means the residual stopped improving and the energy stopped
    // moving; slow but steady fixed-point progress does not count.
    if (report.el_residual < 0.9 * best_residual) {
      best_residual = report.el_residual;
      best_iteration = it;
      energy_at_best = e;
    } else if (it - best_iteration >= 50 && energy_at_best - e <= 1e-12 * std::max(1.0, std::abs(e))) {
      report.message = "residual and energy stagnated";
      break;
    }
    const double slack = 1e-14 * std::max(1.0, std::abs(e));
    bool accepted = false;
    if (p.solver.newton) {
      energy.blocks(dual, blocks);
      if (composite_step(system, blocks, energy, u, gradient, d, report.linear_iterations)) {
        double decrease = 0.0;
        for (std::size_t n = 0; n < n_nodes; ++n) decrease += gradient[n] * d[n];
        if (energy.has_boundary_term()) {
          for (std::size_t n = 0; n < n_nodes; ++n) trial[n] = u[n] + d[n];
          decrease += energy.boundary_value(trial) - energy.boundary_value(u);
        }
        double t = 1.0;
        for (int ls = 0; decrease < 0.0 && ls < 50; ++ls) {
          for (std::size_t n = 0; n < n_nodes; ++n) trial[n] = u[n] + t * d[n];
          const double et = energy.value(trial);
          if (et <= e + 1e-4 * t * decrease + slack) {
            accepted = true;
            e = et;
            break;
          }
          t *= 0.5;
        }
        if (accepted) {
          for (std::size_t n = 0; n < n_nodes; ++n) d[n] *= t;
          apply_grad(g, d, step_grad);
          energy.update_dual(step_grad, dual);
        }
      }
    }
    if (!accepted) {
      // Lagged diffusivity: exact minimizer of a quadratic majorizer.
      energy.blocks({}, blocks);
      if (composite_step(system, blocks, energy, u, gradient, d, report.linear_iterations)) {
        for (std::size_t n = 0; n < n_nodes; ++n) trial[n] = u[n] + d[n];
        const double et = energy.value(trial);
        if (et <= e + slack) {
          accepted = true;
          e = et;
          dual.clear();
        }
      }
    }
    if (!accepted) {
      report.message = "no further descent possible at working precision";
      break;
    }
    u.swap(trial);
    record(e);
    report.iterations = it + 1;
  }

  out.u = ScalarField(p.grid_ptr(), u);
  out.z = VectorField(p.grid_ptr(), z);
  report.feasibility = out.z.max_cell_norm() - 1.0;
  report.seconds = seconds_since(start);
  return out;
}

}  // namespace

Solution solve_smoothed(const Problem& p) {
  p.validate();
  if (p.model != Model::total_variation) throw InputError("solve_smoothed needs the total-variation model");
  if (!(p.smoothing() > 0.0)) throw InputError("solve_smoothed needs eps > 0 or lambda");
  return run_smoothed(p);
}

Solution solve_ball(const Problem& p) {
  p.validate();
  if (!p.ball) throw InputError("solve_ball needs a ball spec");
  if (p.model != Model::total_variation) throw InputError("solve_ball needs the total-variation model");
  if (!(p.eps > 0.0)) throw InputError("solve_ball needs eps > 0");
  return run_smoothed(p);
}

// ---------------------------------------------------------------------------

namespace {

// (A u)_{n,a} = (w_{n,a} / w_n^cell) (grad u)_{n,a}: grad seen from the
// cell-weighted dual metric, so that <A u, z>_cells = <grad u, z>_faces.
void apply_scaled_grad(const Grid& g, std::span<const double> u, std::span<double> out) {
  apply_grad(g, u, out);
  const int m = g.dim();
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double wc = g.cell_weight(n);
    for (int a = 0; a < m; ++a) out[n * m + a] = wc > 0.0 ? out[n * m + a] * g.face_weight(n, a) / wc : 0.0;
  }
}

struct DualResiduals {
  double stationarity = 0.0;
  double alignment = 0.0;
};

DualResiduals dual_residuals(const Grid& g, std::span<const double> u, std::span<const double> z,
                             std::span<const double> data, std::vector<double>& du, std::vector<double>& divz) {
  const int m = g.dim();
  apply_div_gamma(g, z, divz);
  DualResiduals r;
  for (std::size_t n = 0; n < g.size(); ++n) r.stationarity = std::max(r.stationarity, std::abs(-divz[n] + u[n] - data[n]));
  apply_grad(g, u, du);
  const double threshold = 10.0 * g.spacing();
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!g.is_cell(n)) continue;
    double plain = 0.0, weighted = 0.0, pairing = 0.0;
    for (int a = 0; a < m; ++a) {
      const double pa = du[n * m + a];
      const double wa = g.face_weight(n, a);
      plain += pa * pa;
      weighted += wa * wa * pa * pa;
      pairing += wa * z[n * m + a] * pa;
    }
    if (std::sqrt(plain) <= threshold) continue;
    r.alignment = std::max(r.alignment, (std::sqrt(weighted) - pairing) / g.cell_weight(n));
  }
  return r;
}

}  // namespace

double gradient_operator_norm(const Grid& g, int iterations) {
  const std::size_t n_nodes = g.size();
  std::vector<double> v(n_nodes), av(n_nodes * g.dim()), w(n_nodes);
  // Deterministic, oscillating start vector with components along all modes.
  for (std::size_t n = 0; n < n_nodes; ++n) v[n] = ((n % 2 == 0) ? 1.0 : -1.0) + 0.1 * std::sin(1.0 + n);
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const double norm_v = weighted_norm(g, v);
    for (double& x : v) x /= norm_v;
    apply_scaled_grad(g, v, av);
    apply_div_gamma(g, av, w);
    for (double& x : w) x = -x;
    estimate = weighted_norm(g, w);
    v.swap(w);
  }
  return std::sqrt(estimate);
}

Solution solve_tv_pd(const Problem& p) {
  p.validate();
  if (p.model != Model::total_variation || p.eps != 0.0 || p.ball || p.lambda) {
    throw InputError("solve_tv_pd needs the total-variation model with eps = 0 on a full domain");
  }
  const auto start = Clock::now();
  const Grid& g = p.grid();
  const std::size_t n_nodes = g.size();
  const int m = g.dim();
  const int max_iter = p.solver.max_iterations > 0 ? p.solver.max_iterations : 100000;
  const auto data = p.data.values();

  // tau sigma ||A||^2 = 0.99 with a 2% safety margin on the norm estimate.
  const double norm = 1.02 * gradient_operator_norm(g);
  const double tau = p.solver.step_ratio / norm;
  const double sigma = 0.99 / (p.solver.step_ratio * norm);

  std::vector<double> u = starting_point(p);
  std::vector<double> u_bar = u, u_next(n_nodes), z(n_nodes * m, 0.0), az(n_nodes * m), divz(n_nodes);
  std::vector<double> du(n_nodes * m);

  Solution out{ScalarField(p.grid_ptr()), VectorField(p.grid_ptr()), {}};
  SolveReport& report = out.report;
  report.method = "primal-dual";
  auto energy = [&](std::span<const double> x) {
    const ScalarField f(p.grid_ptr(), std::vector<double>(x.begin(), x.end()));
    return tv_gamma(f) + fidelity(f, p.data);
  };
  report.energy_history.push_back(energy(u));

  const int check_every = 20;
  for (int it = 1; it <= max_iter; ++it) {
    apply_scaled_grad(g, u_bar, az);
    for (std::size_t n = 0; n < n_nodes; ++n) {
      if (!g.is_cell(n)) continue;
      double s = 0.0;
      for (int a = 0; a < m; ++a) {
        double& y = z[n * m + a];
        y += sigma * az[n * m + a];
        s += y * y;
      }
      if (s > 1.0) {
        const double scale = 1.0 / std::sqrt(s);
        for (int a = 0; a < m; ++a) z[n * m + a] *= scale;
      }
    }
    apply_div_gamma(g, z, divz);
    for (std::size_t n = 0; n < n_nodes; ++n) u_next[n] = (u[n] + tau * (divz[n] + data[n])) / (1.0 + tau);
    for (std::size_t n = 0; n < n_nodes; ++n) u_bar[n] = 2.0 * u_next[n] - u[n];
    u.swap(u_next);
    report.iterations = it;

    if (it % check_every == 0 || it == max_iter) {
      const DualResiduals r = dual_residuals(g, u, z, data, du, divz);
      report.el_residual = r.stationarity;
      report.alignment = r.alignment;
      if (it % (check_every * 50) == 0) report.energy_history.push_back(energy(u));
      if (r.stationarity <= p.solver.tolerance && r.alignment <= p.solver.tolerance) {
        report.converged = true;
        break;
      }
    }
  }
  if (!report.converged) report.message = "iteration limit reached";
  report.energy_history.push_back(energy(u));

  out.u = ScalarField(p.grid_ptr(), u);
  out.z = VectorField(p.grid_ptr(), z);
  report.feasibility = out.z.max_cell_norm() - 1.0;
  report.seconds = seconds_since(start);
  return out;
}

Solution solve(const Problem& p) {
  if (p.model == Model::ornstein_uhlenbeck) return solve_ou(p);
  if (p.ball) return solve_ball(p);
  if (p.smoothing() > 0.0) return solve_smoothed(p);
  return solve_tv_pd(p);
}

// ---------------------------------------------------------------------------

std::vector<ContinuationStep> continuation(const Problem& p, ContinuationParameter parameter,
                                           std::span<const double> schedule) {
  if (schedule.empty()) throw InputError("continuation schedule is empty");
  if (schedule.size() > 1) {
    const bool increasing = schedule[1] > schedule[0];
    for (std::size_t k = 1; k < schedule.size(); ++k) {
      const bool ok = increasing ? schedule[k] > schedule[k - 1] : schedule[k] < schedule[k - 1];
      if (!ok) throw InputError("continuation schedule must be strictly monotone");
    }
  }
  std::vector<ContinuationStep> steps;
  steps.reserve(schedule.size());
  std::optional<ScalarField> previous;
  for (double value : schedule) {
    ContinuationStep step;
    step.value = value;
    try {
      Problem q = p;
      if (parameter == ContinuationParameter::eps) q.eps = value;
      else q.lambda = value;
      if (previous) q.solver.initial = std::vector<double>(previous->values().begin(), previous->values().end());
      Solution s = solve(q);
      if (previous) step.distance_to_previous = l2_distance(s.u, *previous);
      previous = s.u;
      step.solution = std::move(s);
    } catch (const std::exception& ex) {
      step.error = ex.what();
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

}  // namespace gausstv
