#include "gausstv/fields.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "gausstv/error.hpp"

namespace gausstv {

namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw InputError(std::string(what) + " contains non-finite values");
  }
}

}  // namespace

ScalarField::ScalarField(GridPtr grid, double fill) : grid_(std::move(grid)) {
  if (!grid_) throw InputError("scalar field needs a grid");
  if (!std::isfinite(fill)) throw InputError("scalar field fill value must be finite");
  values_.assign(grid_->size(), fill);
}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw InputError("scalar field needs a grid");
  if (values_.size() != grid_->size()) throw InputError("scalar field length does not match node count");
  require_finite(values_, "scalar field");
}

ScalarField ScalarField::sample(GridPtr grid, const std::function<double(std::span<const double>)>& f) {
  std::vector<double> v(grid->size());
  for (std::size_t n = 0; n < v.size(); ++n) v[n] = f(grid->point(n));
  return ScalarField(std::move(grid), std::move(v));
}

VectorField::VectorField(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw InputError("vector field needs a grid");
  values_.assign(grid_->size() * grid_->dim(), 0.0);
}

VectorField::VectorField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw InputError("vector field needs a grid");
  if (values_.size() != grid_->size() * grid_->dim()) {
    throw InputError("vector field length does not match node count times dimension");
  }
  require_finite(values_, "vector field");
  for (std::size_t n = 0; n < grid_->size(); ++n) {
    for (int a = 0; a < grid_->dim(); ++a) {
      if (!grid_->has_face(n, a)) values_[n * grid_->dim() + a] = 0.0;
    }
  }
}

VectorField VectorField::sample_faces(GridPtr grid,
                                      const std::function<double(std::span<const double>, int)>& f) {
  const int m = grid->dim();
  const double h = grid->spacing();
  std::vector<double> v(grid->size() * m, 0.0);
  for (std::size_t n = 0; n < grid->size(); ++n) {
    const auto x = grid->point(n);
    for (int a = 0; a < m; ++a) {
      if (!grid->has_face(n, a)) continue;
      std::array<double, 2> mid{0.0, 0.0};
      for (int b = 0; b < m; ++b) mid[b] = x[b] + (a == b ? 0.5 * h : 0.0);
      v[n * m + a] = f(std::span<const double>(mid.data(), m), a);
    }
  }
  return VectorField(std::move(grid), std::move(v));
}

double VectorField::cell_norm(std::size_t n) const {
  double s = 0.0;
  for (int a = 0; a < dim(); ++a) s += (*this)(n, a) * (*this)(n, a);
  return std::sqrt(s);
}

double VectorField::max_cell_norm() const {
  double best = 0.0;
  for (std::size_t n = 0; n < grid_->size(); ++n) best = std::max(best, cell_norm(n));
  return best;
}

}  // namespace gausstv
