#pragma once

#include <optional>
#include <vector>

#include "gausstv/fields.hpp"

namespace gausstv {

enum class Model {
  total_variation,      // smoothed (eps > 0) or exact (eps = 0) weighted TV + fidelity
  ornstein_uhlenbeck,   // Dirichlet energy + fidelity
};

enum class LinearSolver {
  conjugate_gradient,  // Jacobi-preconditioned CG, matrix free
  cholesky,            // sparse LDL^T factorization
};

struct SolverOptions {
  /// Sup-norm tolerance on the Euler-Lagrange residual. The Ornstein-Uhlenbeck
  /// solve additionally drives its gamma-weighted relative residual to 1e-12.
  double tolerance = 1e-8;
  /// 0 selects the solver default (500 outer iterations, 100000 for the
  /// primal-dual solver).
  int max_iterations = 0;
  /// Linear solver for the Ornstein-Uhlenbeck system. The nonlinear solvers
  /// always factorize their Newton systems.
  LinearSolver linear_solver = LinearSolver::conjugate_gradient;
  /// Damped Newton steps for eps > 0; false runs the plain lagged-diffusivity
  /// fixed point.
  bool newton = true;
  /// Starting point; defaults to the data g.
  std::optional<std::vector<double>> initial;
  /// Primal step over dual step for the primal-dual solver (tau = ratio / L,
  /// sigma = 1 / (ratio L)).
  double step_ratio = 1.0;
};

/// Dirichlet data on the boundary of a ball grid.
struct BallSpec {
  double boundary_level = 0.0;  // M
};

/// Full description of one variational problem on a grid.
///
/// With `lambda` set the total-variation model minimizes
///   lambda^2 sum [sqrt(1 + |grad u|^2 / lambda^2) - 1] + 1/2 |u - g|^2,
/// which has the same minimizer as smoothing eps = lambda with the TV term
/// scaled by lambda.
struct Problem {
  ScalarField data;
  Model model = Model::total_variation;
  double eps = 0.0;
  std::optional<BallSpec> ball;
  std::optional<double> lambda;
  SolverOptions solver;

  explicit Problem(ScalarField g) : data(std::move(g)) {}

  const Grid& grid() const { return data.grid(); }
  const GridPtr& grid_ptr() const { return data.grid_ptr(); }
  /// Multiplier of the TV term in the Euler-Lagrange equation.
  double tv_weight() const { return lambda ? *lambda : 1.0; }
  /// Effective smoothing parameter of the TV term.
  double smoothing() const { return lambda ? *lambda : eps; }

  /// Throws InputError when an invariant is violated.
  void validate() const;
};

}  // namespace gausstv
