#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gausstv/fields.hpp"
#include "gausstv/problem.hpp"
#include "gausstv/solvers.hpp"

namespace gausstv {

enum class Verdict { convex, not_convex, inconclusive };

const char* to_string(Verdict v);

struct ConvexityCertificate {
  /// max over admissible pairs of u(mid) - (u(x) + u(x')) / 2.
  double gap = 0.0;
  std::size_t node = kNoNode;
  std::size_t partner = kNoNode;
  std::size_t midpoint = kNoNode;
  std::vector<double> x, x_partner, x_midpoint;
  double tolerance = 0.0;
  /// convex iff gap <= tolerance; not_convex once gap >= 10 * tolerance.
  Verdict verdict = Verdict::inconclusive;
  long long pairs = 0;
};

/// max(10 * el_tolerance, 5 h^2).
double convexity_tolerance(double el_tolerance, double h);

/// Midpoint convexity defect over all node pairs whose midpoint is a node.
/// With `window`, only nodes with |x|_inf <= window take part (truncated
/// full-space problems have boundary layers near the box edges). Ties go to
/// the lexicographically smallest (x, x') in lattice order.
ConvexityCertificate korevaar_gap(const ScalarField& u, double tolerance,
                                  std::optional<double> window = std::nullopt);

/// Barrier v(x) = C - sqrt(r^2 - |x - x0|^2) on B_r(x0) inside B_R.
struct BarrierSpec {
  std::vector<double> center;
  double radius = 1.0;
  double offset = 0.0;  // C
  double ambient_radius = 2.0;  // R
  double eps = 1.0;

  /// m / (eps r) + R / eps + r + sup|g|.
  static double offset_bound(int m, double eps, double r, double R, double g_sup);
  /// Whether offset reaches offset_bound for data with sup norm g_sup.
  bool meets_bound(double g_sup) const;
};

struct BarrierResidual {
  double min_residual = 0.0;
  std::size_t argmin = kNoNode;
  /// Residual at the node nearest to x0.
  double center_residual = 0.0;
  std::size_t center_node = kNoNode;
  /// -div_gamma(z_v) + v - g on evaluated nodes, 0 elsewhere.
  std::vector<double> residual;
  std::vector<char> evaluated;
};

/// Euler-Lagrange residual of the barrier on the nodes with |x - x0| <= r - h.
/// z_v = (x - x0) / sqrt(eps^2 r^2 + (1 - eps^2) |x - x0|^2) is sampled in
/// closed form at face midpoints and differentiated by div_gamma.
BarrierResidual barrier_residual(const BarrierSpec& b, const ScalarField& g);

struct BoundaryFlux {
  std::size_t node = 0;
  std::vector<double> point;
  std::vector<double> normal;
  double u = 0.0;
  /// z . normal on the face joining the node to its inner neighbour.
  double face_flux = 0.0;
  /// z . normal at the boundary node, extrapolated linearly from the two
  /// innermost faces along the normal axis (face_flux when only one exists).
  double flux = 0.0;
  bool flagged = false;
};

struct ContactAngleProfile {
  std::vector<BoundaryFlux> nodes;
  double min_abs_flux = 0.0;
  std::size_t flagged = 0;
};

/// A node is flagged when the boundary flux misses sign(M - u) by more than 0.01:
/// u < M - tol needs flux >= 0.99, u > M + tol needs flux <= -0.99, and
/// otherwise |flux| <= 1.01.
ContactAngleProfile contact_angle_profile(const ScalarField& u, const VectorField& z, const Problem& p,
                                          double tol = 1e-6);

struct ComparisonResult {
  bool pass = false;
  double min_difference = 0.0;
  std::size_t argmin = kNoNode;
  double threshold = 0.0;
  std::optional<Solution> upper;
  std::optional<Solution> lower;
};

/// Solves both problems and checks min(u1 - u2) >= -10 * tolerance.
/// Throws InputError unless g1 >= g2 (and M1 >= M2) on a shared grid.
ComparisonResult check_comparison(const Problem& p1, const Problem& p2);

struct DualCertificate {
  double stationarity = 0.0;
  std::size_t stationarity_node = kNoNode;
  double feasibility = 0.0;
  double alignment = 0.0;
  std::size_t aligned_cells = 0;
};

/// Stationarity of -alpha div_gamma z + u - g over non-boundary nodes,
/// feasibility max|z| - 1 and alignment |grad u| - z . grad u over cells with
/// |grad u| > 10 h; `window` restricts all three to |x|_inf <= window.
DualCertificate dual_certificate(const ScalarField& u, const VectorField& z, const Problem& p,
                                 std::optional<double> window = std::nullopt);

}  // namespace gausstv
