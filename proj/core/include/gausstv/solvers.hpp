#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gausstv/fields.hpp"
#include "gausstv/problem.hpp"

namespace gausstv {

struct SolveReport {
  std::string method;
  int iterations = 0;
  /// Inner iterations (CG steps or linear solves) summed over the run.
  long linear_iterations = 0;
  /// Sup norm of the Euler-Lagrange residual. For ball problems the boundary
  /// rows include the best subgradient of the L1 boundary term.
  double el_residual = 0.0;
  /// max cell norm of z minus 1 (<= 0 when feasible).
  double feasibility = 0.0;
  /// max over cells with |grad u| > 10 h of |grad u| - z . grad u (exact TV only).
  double alignment = 0.0;
  /// Solver objective after every outer iteration (every check for the
  /// primal-dual solver).
  std::vector<double> energy_history;
  double seconds = 0.0;
  bool converged = false;
  std::string message;
};

struct Solution {
  ScalarField u;
  VectorField z;
  SolveReport report;
};

/// (I + L_gamma) u = g with L_gamma = -div_gamma grad.
Solution solve_ou(const Problem& p);

/// eps > 0 (or lambda set): damped Newton on the Euler-Lagrange equation with
/// lagged-diffusivity fallback steps. Returns z = discrete grad F(grad u).
Solution solve_smoothed(const Problem& p);

/// eps = 0: primal-dual splitting on
///   min_u max_{|z| <= 1} <z, grad u>_gamma + 1/2 |u - g|^2_gamma.
Solution solve_tv_pd(const Problem& p);

/// Ball problem with L1 Dirichlet penalty; eps > 0.
Solution solve_ball(const Problem& p);

/// Dispatches on the problem's model and parameters.
Solution solve(const Problem& p);

enum class ContinuationParameter { eps, lambda };

struct ContinuationStep {
  double value = 0.0;
  std::optional<Solution> solution;
  /// L2(gamma) distance to the previous successful entry (absent for the first).
  std::optional<double> distance_to_previous;
  std::string error;
};

/// Solves p for every schedule value in order, warm-starting each entry from
/// the previous solution. Solver errors are recorded per entry.
std::vector<ContinuationStep> continuation(const Problem& p, ContinuationParameter parameter,
                                           std::span<const double> schedule);

/// Estimate of the operator norm of grad between the gamma-weighted node and
/// cell metrics used by the primal-dual solver (power iteration).
double gradient_operator_norm(const Grid& grid, int iterations = 100);

/// Sup norm of -alpha div_gamma z + u - g over nodes accepted by `mask`
/// (all nodes when empty).
double stationarity_residual(const ScalarField& u, const VectorField& z, const ScalarField& g,
                             double alpha = 1.0, std::span<const char> mask = {});

}  // namespace gausstv
