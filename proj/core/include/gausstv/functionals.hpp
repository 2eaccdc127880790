#pragma once

#include "gausstv/fields.hpp"
#include "gausstv/problem.hpp"

namespace gausstv {

// Every energy below discretizes its gradient term per node-anchored cell c
// through the face-weighted vector p_c = (w_{c,i} (grad u)_i)_i, w = face
// weights, together with the cell weight w_c:
//
//   tv_gamma  = sum_c |p_c|
//             = max { <z, grad u>_gamma : |z(n)| <= 1 for every cell }
//   smoothed  = sum_c sqrt(eps^2 w_c^2 + |p_c|^2)
//
// so that TV is exactly the dual pairing with feasible fields and the smoothed
// term equals eps * cell_mass for constants. In 1D, p_c = w_c (grad u)_c and
// these reduce to sum_c w_c |grad u| and sum_c w_c sqrt(eps^2 + |grad u|^2).

double tv_gamma(const ScalarField& u);

/// Smoothed TV part alone.
double smoothed_tv(const ScalarField& u, double eps);

/// 1/2 integrate((u - g)^2).
double fidelity(const ScalarField& u, const ScalarField& g);

/// Smoothed TV + fidelity; equals tv_gamma + fidelity at eps = 0.
double j_eps(const ScalarField& u, const Problem& p);

/// Smoothed TV + fidelity + sum over boundary nodes |u - M| gamma h^(m-1).
double ball_objective(const ScalarField& u, const Problem& p);

/// 1/2 <grad u, grad u>_gamma + fidelity.
double ou_energy(const ScalarField& u, const ScalarField& g);

/// sum_c [lambda sqrt(lambda^2 w_c^2 + |p_c|^2) - lambda^2 w_c] + fidelity.
double j_lambda(const ScalarField& u, const ScalarField& g, double lambda);

/// The energy a solver for `p` decreases: j_lambda, ball_objective, j_eps or
/// ou_energy depending on the problem.
double objective(const ScalarField& u, const Problem& p);

}  // namespace gausstv
