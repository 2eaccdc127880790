#pragma once

// Reference values computed independently of the library: closed forms,
// long-double evaluations, bisection and brute-force enumeration.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

/// (2 pi)^(-m/2) exp(-|x|^2 / 2) in long double.
inline long double gaussian_density(const std::vector<long double>& x) {
  long double r2 = 0.0L;
  for (long double xi : x) r2 += xi * xi;
  return std::exp(-r2 / 2.0L) / std::pow(2.0L * std::numbers::pi_v<long double>, x.size() / 2.0L);
}

/// Gaussian mass of [a, b] in one dimension.
inline double gaussian_interval_mass(double a, double b) {
  return 0.5 * (std::erf(b / std::numbers::sqrt2) - std::erf(a / std::numbers::sqrt2));
}

/// Root of f on [lo, hi] by bisection; f(lo) and f(hi) must differ in sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Slope c of the linear minimizer u = c x for g = x with smoothing eps:
/// the Euler-Lagrange equation reduces to c (1 + 1 / sqrt(eps^2 + c^2)) = 1.
inline double smoothed_linear_slope(double eps) {
  return bisect([eps](double c) { return c * (1.0 + 1.0 / std::sqrt(eps * eps + c * c)) - 1.0; }, 0.0, 1.0);
}

/// Continuum OU residual -u'' + x u' + u - g of a smooth 1D ansatz.
inline double ou_residual(double x, double u, double du, double d2u, double g) { return -d2u + x * du + u - g; }

/// Lattice points (i h, j h) with |i|, |j| <= n and |x| <= radius.
inline int count_ball_lattice(double radius, double h, int n) {
  int count = 0;
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j)
      if (std::hypot(i * h, j * h) <= radius * (1 + 1e-12)) ++count;
  return count;
}

/// Richardson extrapolation for an error expansion in h^2 from values at h and h/2.
inline double richardson2(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

/// Barrier offset bound m / (eps r) + R / eps + r + sup|g|.
inline double barrier_bound(int m, double eps, double r, double R, double g_sup) {
  return m / (eps * r) + R / eps + r + g_sup;
}

}  // namespace oracle
