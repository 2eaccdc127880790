#include "gausstv/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gausstv/error.hpp"

namespace gausstv {

double gaussian_weight(std::span<const double> x) {
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  const double m = static_cast<double>(x.size());
  return std::exp(-0.5 * r2 - 0.5 * m * std::log(2.0 * std::numbers::pi));
}

namespace {

double domain_half_width(const DomainSpec& d) {
  return std::visit([](const auto& s) { return s.half_width; }, d);
}

}  // namespace

double Grid::half_width() const noexcept { return domain_half_width(domain_); }

double Grid::radius() const noexcept {
  if (const auto* ball = std::get_if<BallDomain>(&domain_)) return ball->radius;
  return std::numeric_limits<double>::infinity();
}

std::size_t Grid::find(std::array<int, 2> index) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) {
    if (index[a] < 0 || index[a] >= extent_) return kNoNode;
    flat = flat * extent_ + static_cast<std::size_t>(index[a]);
  }
  return lattice_to_node_[flat];
}

double Grid::boundary_weight(std::size_t n) const {
  return gaussian_weight(point(n)) * std::pow(h_, dim_ - 1);
}

std::shared_ptr<const Grid> Grid::build(int dim, const DomainSpec& domain, double h) {
  if (dim != 1 && dim != 2) throw InputError("grid dimension must be 1 or 2, got " + std::to_string(dim));
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("grid spacing must be positive");
  const double half = domain_half_width(domain);
  if (!(half > 0.0) || !std::isfinite(half)) throw InputError("box half-width must be positive");
  const double ratio = 2.0 * half / h;
  const double steps = std::round(ratio);
  if (std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    throw InputError("grid spacing must divide the box [-L, L] evenly");
  }
  double radius = std::numeric_limits<double>::infinity();
  if (const auto* ball = std::get_if<BallDomain>(&domain)) {
    radius = ball->radius;
    if (!(radius > 0.0) || !(radius < half)) throw InputError("ball radius must satisfy 0 < R < L");
  }

  auto grid = std::shared_ptr<Grid>(new Grid());
  Grid& g = *grid;
  g.dim_ = dim;
  g.h_ = h;
  g.domain_ = domain;
  g.extent_ = static_cast<int>(steps) + 1;
  if (g.extent_ < 3) throw InputError("grid needs at least 3 nodes per axis");

  const std::size_t extent = static_cast<std::size_t>(g.extent_);
  const std::size_t lattice_size = dim == 1 ? extent : extent * extent;
  g.lattice_to_node_.assign(lattice_size, kNoNode);
  const double radius_tol = radius * (1.0 + 1e-12);

  auto coordinate = [&](int i) { return -half + h * i; };
  for (std::size_t flat = 0; flat < lattice_size; ++flat) {
    std::array<int, 2> idx{0, 0};
    if (dim == 1) {
      idx[0] = static_cast<int>(flat);
    } else {
      idx[0] = static_cast<int>(flat / extent);
      idx[1] = static_cast<int>(flat % extent);
    }
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += coordinate(idx[a]) * coordinate(idx[a]);
    if (std::sqrt(r2) > radius_tol) continue;
    g.lattice_to_node_[flat] = g.lattice_.size();
    g.lattice_.push_back(idx);
    for (int a = 0; a < dim; ++a) g.coords_.push_back(coordinate(idx[a]));
  }
  const std::size_t count = g.lattice_.size();
  if (count == 0) throw InputError("grid has no active nodes");
  if (g.is_ball()) {
    // The mask must span at least three nodes along every axis.
    const int min_extent = 2 * static_cast<int>(std::floor(radius_tol / h)) + 1;
    if (min_extent < 3) throw InputError("ball mask needs at least 3 nodes per axis");
  }

  g.neighbors_.assign(count * dim * 2, kNoNode);
  for (std::size_t n = 0; n < count; ++n) {
    for (int a = 0; a < dim; ++a) {
      for (int dir : {-1, +1}) {
        auto idx = g.lattice_[n];
        idx[a] += dir;
        g.neighbors_[(n * dim + a) * 2 + (dir > 0 ? 1 : 0)] = g.find(idx);
      }
    }
  }

  const double volume = std::pow(h, dim);
  g.node_weight_.resize(count);
  g.face_weight_.assign(count * dim, 0.0);
  g.cell_weight_.assign(count, 0.0);
  for (std::size_t n = 0; n < count; ++n) {
    const auto x = g.point(n);
    g.node_weight_[n] = gaussian_weight(x) * volume;
    std::array<double, 2> centroid{0.0, 0.0};
    int faces = 0;
    for (int a = 0; a < dim; ++a) {
      if (!g.has_face(n, a)) continue;
      std::array<double, 2> mid{0.0, 0.0};
      for (int b = 0; b < dim; ++b) mid[b] = x[b] + (a == b ? 0.5 * h : 0.0);
      g.face_weight_[n * dim + a] = gaussian_weight(std::span<const double>(mid.data(), dim)) * volume;
      for (int b = 0; b < dim; ++b) centroid[b] += mid[b];
      ++faces;
    }
    if (faces > 0) {
      for (int b = 0; b < dim; ++b) centroid[b] /= faces;
      g.cell_weight_[n] = gaussian_weight(std::span<const double>(centroid.data(), dim)) * volume;
    }
    g.mass_ += g.node_weight_[n];
    g.cell_mass_ += g.cell_weight_[n];
  }

  // Boundary classification. Box: any index on the lattice edge, normal along
  // the lowest such axis. Ball: any missing lattice neighbour, normal is the
  // radial direction snapped to the closest open face direction.
  g.boundary_slot_.assign(count, kNoNode);
  for (std::size_t n = 0; n < count; ++n) {
    const auto idx = g.lattice_[n];
    BoundaryNode bn{n, -1, 0};
    if (!g.is_ball()) {
      for (int a = 0; a < dim && bn.axis < 0; ++a) {
        if (idx[a] == 0) bn = {n, a, -1};
        else if (idx[a] == g.extent_ - 1) bn = {n, a, +1};
      }
    } else {
      const auto x = g.point(n);
      double norm = 0.0;
      for (double xi : x) norm += xi * xi;
      norm = std::sqrt(norm);
      double best = -std::numeric_limits<double>::infinity();
      bool best_has_inner = false;
      for (int a = 0; a < dim; ++a) {
        for (int dir : {-1, +1}) {
          if (g.neighbor(n, a, dir) != kNoNode) continue;
          const bool has_inner = g.neighbor(n, a, -dir) != kNoNode;
          const double score = norm > 0.0 ? dir * x[a] / norm : 0.0;
          const bool better = (has_inner && !best_has_inner) ||
                              (has_inner == best_has_inner && score > best);
          if (better) {
            best = score;
            best_has_inner = has_inner;
            bn = {n, a, dir};
          }
        }
      }
    }
    if (bn.axis >= 0) {
      g.boundary_slot_[n] = g.boundary_.size();
      g.boundary_.push_back(bn);
    }
  }
  return grid;
}

}  // namespace gausstv
