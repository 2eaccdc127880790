#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <span>

#include "gausstv/fields.hpp"
#include "gausstv/grid.hpp"

namespace testing_support {

using gausstv::GridPtr;
using gausstv::ScalarField;

inline GridPtr box(int m, double L, double h) { return gausstv::Grid::build(m, gausstv::BoxDomain{L}, h); }
inline GridPtr ball(int m, double R, double L, double h) { return gausstv::Grid::build(m, gausstv::BallDomain{R, L}, h); }

inline ScalarField sample(const GridPtr& g, const std::function<double(std::span<const double>)>& f) {
  return ScalarField::sample(g, f);
}

inline ScalarField random_field(const GridPtr& g, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(g->size());
  for (double& x : v) x = d(rng);
  return ScalarField(g, std::move(v));
}

inline gausstv::VectorField random_vector_field(const GridPtr& g, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(g->size() * g->dim());
  for (double& x : v) x = d(rng);
  return gausstv::VectorField(g, std::move(v));
}

/// Sup of |a - b| over nodes with |x|_inf <= window.
inline double sup_error(const ScalarField& a, const std::function<double(std::span<const double>)>& b, double window) {
  const auto& g = a.grid();
  double e = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    bool inside = true;
    for (int k = 0; k < g.dim(); ++k) inside = inside && std::abs(g.coord(n, k)) <= window + 1e-9;
    if (inside) e = std::max(e, std::abs(a[n] - b(g.point(n))));
  }
  return e;
}

}  // namespace testing_support
