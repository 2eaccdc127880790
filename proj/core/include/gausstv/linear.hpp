#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "gausstv/grid.hpp"

namespace gausstv {

struct CgResult {
  int iterations = 0;
  double residual = 0.0;  // final weighted residual norm
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients for an SPD operator.
///
/// Stops when sqrt(sum_i r_i^2 norm_weight_i) <= target, r = rhs - A x.
/// `x` holds the starting point on entry and the iterate on exit.
CgResult conjugate_gradient(const std::function<void(std::span<const double>, std::span<double>)>& apply,
                            std::span<const double> diagonal, std::span<const double> rhs,
                            std::span<const double> norm_weight, double target, int max_iterations,
                            std::span<double> x);

/// Symmetric system  sum_c B_c^T K_c B_c + diag(d)  on a grid, where B_c maps
/// nodal values to the forward differences of the faces of cell c and K_c is a
/// symmetric m x m block per cell. The sparsity pattern is fixed per grid, so
/// the symbolic factorization is computed once and reused.
class CellSystem {
 public:
  explicit CellSystem(const Grid& grid);
  ~CellSystem();
  CellSystem(const CellSystem&) = delete;
  CellSystem& operator=(const CellSystem&) = delete;

  /// blocks: m*m entries per node (row-major, ignored for non-cells);
  /// diagonal: one entry per node.
  void assemble(std::span<const double> blocks, std::span<const double> diagonal);

  /// Replaces rows/columns of `fixed` nodes with identity rows. Must be called
  /// after assemble(); `rhs` is corrected for the known values `fixed_values`.
  void fix_nodes(std::span<const std::size_t> fixed, std::span<const double> fixed_values,
                 std::span<double> rhs);

  /// Factorizes the current matrix and solves A x = rhs. Returns false when
  /// the factorization fails.
  bool solve(std::span<const double> rhs, std::span<double> x);

  /// y = A x for the current matrix.
  void multiply(std::span<const double> x, std::span<double> y) const;

  /// Diagonal entry of the current matrix.
  double diagonal(std::size_t n) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gausstv
