#include "gausstv/linear.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <cmath>
#include <vector>

namespace gausstv {

CgResult conjugate_gradient(const std::function<void(std::span<const double>, std::span<double>)>& apply,
                            std::span<const double> diagonal, std::span<const double> rhs,
                            std::span<const double> norm_weight, double target, int max_iterations,
                            std::span<double> x) {
  const std::size_t n = rhs.size();
  std::vector<double> r(n), zp(n), p(n), ap(n);
  auto weighted_norm = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i] * v[i] * norm_weight[i];
    return std::sqrt(s);
  };

  apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - ap[i];
  CgResult result;
  result.residual = weighted_norm(r);
  if (result.residual <= target) {
    result.converged = true;
    return result;
  }
  double rz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    zp[i] = r[i] / diagonal[i];
    p[i] = zp[i];
    rz += r[i] * zp[i];
  }
  for (int it = 1; it <= max_iterations; ++it) {
    apply(p, ap);
    double pap = 0.0;
    for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    result.iterations = it;
    // Recompute the true residual periodically to avoid drift.
    if (it % 50 == 0) {
      apply(x, ap);
      for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - ap[i];
    }
    result.residual = weighted_norm(r);
    if (result.residual <= target) {
      apply(x, ap);
      for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - ap[i];
      result.residual = weighted_norm(r);
      if (result.residual <= target) {
        result.converged = true;
        return result;
      }
    }
    double rz_next = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      zp[i] = r[i] / diagonal[i];
      rz_next += r[i] * zp[i];
    }
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = zp[i] + beta * p[i];
  }
  return result;
}

struct CellSystem::Impl {
  using Matrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  const Grid& grid;
  Matrix matrix;
  Matrix scaled;
  Eigen::VectorXd scale;
  std::vector<Eigen::Triplet<double, int>> triplets;
  Eigen::SimplicialLDLT<Matrix, Eigen::Lower> factor;
  bool analyzed = false;

  explicit Impl(const Grid& g) : grid(g) {}
};

CellSystem::CellSystem(const Grid& grid) : impl_(std::make_unique<Impl>(grid)) {
  const int n = static_cast<int>(grid.size());
  impl_->matrix.resize(n, n);
}

CellSystem::~CellSystem() = default;

void CellSystem::assemble(std::span<const double> blocks, std::span<const double> diagonal) {
  const Grid& g = impl_->grid;
  const int m = g.dim();
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  auto& t = impl_->triplets;
  t.clear();
  t.reserve(g.size() * (m == 1 ? 4 : 12));
  for (std::size_t n = 0; n < g.size(); ++n) t.emplace_back(int(n), int(n), diagonal[n]);
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!g.is_cell(n)) continue;
    const double* k = blocks.data() + n * m * m;
    // Row a of B_c is (e_{next_a} - e_n) / h for every existing face a.
    for (int a = 0; a < m; ++a) {
      const std::size_t na = g.neighbor(n, a, +1);
      if (na == kNoNode) continue;
      for (int b = 0; b < m; ++b) {
        const std::size_t nb = g.neighbor(n, b, +1);
        if (nb == kNoNode) continue;
        const double v = k[a * m + b] * inv_h2;
        t.emplace_back(int(na), int(nb), v);
        t.emplace_back(int(na), int(n), -v);
        t.emplace_back(int(n), int(nb), -v);
        t.emplace_back(int(n), int(n), v);
      }
    }
  }
  impl_->matrix.setFromTriplets(t.begin(), t.end());
}

void CellSystem::fix_nodes(std::span<const std::size_t> fixed, std::span<const double> fixed_values,
                           std::span<double> rhs) {
  auto& a = impl_->matrix;
  std::vector<char> is_fixed(impl_->grid.size(), 0);
  std::vector<double> value(impl_->grid.size(), 0.0);
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    is_fixed[fixed[k]] = 1;
    value[fixed[k]] = fixed_values[k];
  }
  for (int col = 0; col < a.outerSize(); ++col) {
    for (Impl::Matrix::InnerIterator it(a, col); it; ++it) {
      const auto row = static_cast<std::size_t>(it.row());
      const auto c = static_cast<std::size_t>(it.col());
      if (!is_fixed[row] && is_fixed[c]) rhs[row] -= it.value() * value[c];
    }
  }
  for (int col = 0; col < a.outerSize(); ++col) {
    for (Impl::Matrix::InnerIterator it(a, col); it; ++it) {
      const auto row = static_cast<std::size_t>(it.row());
      const auto c = static_cast<std::size_t>(it.col());
      if (is_fixed[row] || is_fixed[c]) it.valueRef() = row == c ? 1.0 : 0.0;
    }
  }
  for (std::size_t k = 0; k < fixed.size(); ++k) rhs[fixed[k]] = fixed_values[k];
}

bool CellSystem::solve(std::span<const double> rhs, std::span<double> x) {
  // Gaussian weights span many orders of magnitude across the box, so the
  // matrix is equilibrated symmetrically before factorization and the solve
  // gets one step of iterative refinement.
  auto& f = impl_->factor;
  const auto& a = impl_->matrix;
  impl_->scale = a.diagonal().cwiseAbs().cwiseSqrt().cwiseInverse();
  impl_->scaled = impl_->scale.asDiagonal() * a * impl_->scale.asDiagonal();
  if (!impl_->analyzed) {
    f.analyzePattern(impl_->scaled);
    impl_->analyzed = true;
  }
  f.factorize(impl_->scaled);
  if (f.info() != Eigen::Success) return false;
  const auto n = static_cast<Eigen::Index>(rhs.size());
  Eigen::Map<const Eigen::VectorXd> b(rhs.data(), n);
  Eigen::Map<Eigen::VectorXd> out(x.data(), n);
  const Eigen::VectorXd& s = impl_->scale;
  out = s.cwiseProduct(f.solve(s.cwiseProduct(b)));
  const Eigen::VectorXd r = b - a * out;
  out += s.cwiseProduct(f.solve(s.cwiseProduct(r)));
  return f.info() == Eigen::Success && out.allFinite();
}

void CellSystem::multiply(std::span<const double> x, std::span<double> y) const {
  Eigen::Map<const Eigen::VectorXd> in(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::Map<Eigen::VectorXd> out(y.data(), static_cast<Eigen::Index>(y.size()));
  out = impl_->matrix * in;
}

double CellSystem::diagonal(std::size_t n) const {
  return impl_->matrix.coeff(static_cast<int>(n), static_cast<int>(n));
}

}  // namespace gausstv
