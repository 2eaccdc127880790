#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "gausstv/grid.hpp"

namespace gausstv {

/// Nodal values on a grid (u, g, barriers, ...). Values are checked finite at
/// construction and not mutated afterwards.
class ScalarField {
 public:
  explicit ScalarField(GridPtr grid, double fill = 0.0);
  ScalarField(GridPtr grid, std::vector<double> values);

  static ScalarField sample(GridPtr grid, const std::function<double(std::span<const double>)>& f);

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t n) const { return values_[n]; }
  std::span<const double> values() const noexcept { return values_; }
  std::vector<double> release() && { return std::move(values_); }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// One m-vector per node-anchored cell; component i lives on the face between
/// node n and its +e_i neighbour. Components on missing faces are zero.
class VectorField {
 public:
  explicit VectorField(GridPtr grid);
  VectorField(GridPtr grid, std::vector<double> values);

  /// Samples f at every existing face midpoint (component of that face's axis).
  static VectorField sample_faces(GridPtr grid,
                                  const std::function<double(std::span<const double>, int)>& f);

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  int dim() const noexcept { return grid_->dim(); }
  double operator()(std::size_t n, int axis) const { return values_[n * grid_->dim() + axis]; }
  std::span<const double> values() const noexcept { return values_; }
  std::vector<double> release() && { return std::move(values_); }

  /// Euclidean norm of the m-vector anchored at n.
  double cell_norm(std::size_t n) const;
  /// max_n cell_norm(n).
  double max_cell_norm() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

}  // namespace gausstv
