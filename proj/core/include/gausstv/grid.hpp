#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace gausstv {

inline constexpr std::size_t kNoNode = std::numeric_limits<std::size_t>::max();

/// Standard Gaussian density (2 pi)^(-m/2) exp(-|x|^2 / 2), m = x.size().
double gaussian_weight(std::span<const double> x);

struct BoxDomain {
  double half_width = 6.0;
};

/// Nodes of the bounding box [-half_width, half_width]^m with |x| <= radius.
struct BallDomain {
  double radius = 1.0;
  double half_width = 2.0;
};

using DomainSpec = std::variant<BoxDomain, BallDomain>;

/// A boundary node together with its single outward normal sign * e_axis.
struct BoundaryNode {
  std::size_t node = 0;
  int axis = 0;
  int sign = 1;
};

/// Uniform tensor grid over a box or a ball mask in R^m, m in {1, 2}.
///
/// Nodes are stored in lexicographic order of their lattice index (axis 0
/// slowest). A face (n, axis) joins node n to its +axis neighbour and exists
/// only when both nodes are active. A cell is anchored at node n and owns the
/// existing +axis faces of n; it exists when n has at least one such face.
///
/// Quadrature weights carry the h^m volume factor:
///   node_weight(n)       = gamma(x_n) h^m
///   face_weight(n, i)    = gamma(x_n + h/2 e_i) h^m   (0 for missing faces)
///   cell_weight(n)       = gamma(centroid of the cell's face midpoints) h^m
///   boundary_weight(b)   = gamma(x_b) h^(m-1)
class Grid {
 public:
  static std::shared_ptr<const Grid> build(int dim, const DomainSpec& domain, double h);

  int dim() const noexcept { return dim_; }
  double spacing() const noexcept { return h_; }
  std::size_t size() const noexcept { return node_weight_.size(); }
  const DomainSpec& domain() const noexcept { return domain_; }
  bool is_ball() const noexcept { return std::holds_alternative<BallDomain>(domain_); }
  double half_width() const noexcept;
  /// Ball radius; +inf for box domains.
  double radius() const noexcept;
  /// Nodes per axis of the bounding lattice.
  int lattice_extent() const noexcept { return extent_; }

  std::span<const double> point(std::size_t n) const {
    return {coords_.data() + n * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  double coord(std::size_t n, int axis) const { return coords_[n * dim_ + axis]; }
  std::array<int, 2> lattice_index(std::size_t n) const { return lattice_[n]; }
  /// Active node at a lattice index, or kNoNode.
  std::size_t find(std::array<int, 2> index) const;

  /// Active neighbour in direction dir (+1/-1) along axis, or kNoNode.
  std::size_t neighbor(std::size_t n, int axis, int dir) const {
    return neighbors_[(n * dim_ + axis) * 2 + (dir > 0 ? 1 : 0)];
  }
  bool has_face(std::size_t n, int axis) const { return neighbor(n, axis, +1) != kNoNode; }
  bool is_cell(std::size_t n) const { return cell_weight_[n] > 0.0; }

  double node_weight(std::size_t n) const { return node_weight_[n]; }
  double face_weight(std::size_t n, int axis) const { return face_weight_[n * dim_ + axis]; }
  double cell_weight(std::size_t n) const { return cell_weight_[n]; }
  std::span<const double> node_weights() const { return node_weight_; }
  std::span<const double> face_weights() const { return face_weight_; }
  std::span<const double> cell_weights() const { return cell_weight_; }

  std::span<const BoundaryNode> boundary() const { return boundary_; }
  bool is_boundary(std::size_t n) const { return boundary_slot_[n] != kNoNode; }
  /// Index into boundary() for node n, or kNoNode.
  std::size_t boundary_slot(std::size_t n) const { return boundary_slot_[n]; }
  double boundary_weight(std::size_t n) const;

  /// Sum of node weights (discrete Gaussian mass of the domain).
  double mass() const noexcept { return mass_; }
  /// Sum of cell weights (the mass seen by the smoothing term).
  double cell_mass() const noexcept { return cell_mass_; }

 private:
  Grid() = default;

  int dim_ = 1;
  double h_ = 1.0;
  int extent_ = 0;
  DomainSpec domain_;
  std::vector<double> coords_;
  std::vector<std::array<int, 2>> lattice_;
  std::vector<std::size_t> lattice_to_node_;
  std::vector<std::size_t> neighbors_;
  std::vector<double> node_weight_;
  std::vector<double> face_weight_;
  std::vector<double> cell_weight_;
  std::vector<BoundaryNode> boundary_;
  std::vector<std::size_t> boundary_slot_;
  double mass_ = 0.0;
  double cell_mass_ = 0.0;
};

using GridPtr = std::shared_ptr<const Grid>;

}  // namespace gausstv
