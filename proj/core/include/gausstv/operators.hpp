#pragma once

#include <span>

#include "gausstv/fields.hpp"

namespace gausstv {

/// Forward differences on existing faces; 0 on faces leaving the domain.
VectorField grad(const ScalarField& u);

/// Gaussian divergence, defined as the negative adjoint of grad under the
/// gamma-weighted inner products, so that
///   inner(grad(u), z) == -inner(u, div_gamma(z))
/// for every pair of fields up to rounding.
ScalarField div_gamma(const VectorField& z);

/// sum_n f(x_n) gamma(x_n) h^m.
double integrate(const ScalarField& f);

/// <u, v>_gamma with node weights.
double inner(const ScalarField& u, const ScalarField& v);
/// <z, y>_gamma with face weights.
double inner(const VectorField& z, const VectorField& y);

/// ||u - v|| in L^2(gamma).
double l2_distance(const ScalarField& u, const ScalarField& v);

// Allocation-free kernels used by the solvers. `out` must be sized
// grid.size() * grid.dim() for gradients and grid.size() for divergences.
void apply_grad(const Grid& grid, std::span<const double> u, std::span<double> out);
void apply_div_gamma(const Grid& grid, std::span<const double> z, std::span<double> out);

}  // namespace gausstv
