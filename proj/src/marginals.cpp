#include "effdyn/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "effdyn/error.hpp"

namespace effdyn {

namespace {

using Matrix = Eigen::MatrixXcd;
using RowMajorMap = Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

std::size_t ipow(std::size_t m, int k) {
  std::size_t r = 1;
  for (int i = 0; i < k; ++i) r *= m;
  return r;
}

// Dense -Delta on the periodic grid, D(a, b) = (1/M) sum_q k_q^2 cos(k_q (x_a - x_b)).
Eigen::MatrixXd minus_laplacian(const UniformGrid& g) {
  const std::size_t m = g.size();
  std::vector<double> row(m);
  for (std::size_t d = 0; d < m; ++d) {
    double acc = 0.0;
    for (std::size_t q = 0; q < m; ++q) {
      const double k = g.wavenumber(q);
      acc += k * k * std::cos(k * g.spacing() * static_cast<double>(d));
    }
    row[d] = acc / static_cast<double>(m);
  }
  Eigen::MatrixXd out(m, m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) out(a, b) = row[(a + m - b) % m];
  return out;
}

// Digit j (0 = slowest) of a row-major flat index over k coordinates.
std::size_t digit(std::size_t flat, int j, int k, std::size_t m) {
  for (int s = k - 1; s > j; --s) flat /= m;
  return flat % m;
}

void check_same(const ReducedDensity& a, const ReducedDensity& b, const char* what) {
  require(a.k == b.k && a.grid == b.grid && a.kernel.rows() == b.kernel.rows(), ErrorCategory::structural,
          std::string(what) + ": marginals differ in order or grid");
}

// Applies sum_j (D_j K - K D_j) with D acting on coordinate j of the row or
// column index.
Matrix kinetic_commutator(const Matrix& kernel, const Eigen::MatrixXd& d, int k, std::size_t m) {
  const auto dim = static_cast<Eigen::Index>(kernel.rows());
  Matrix out = Matrix::Zero(dim, dim);
  for (int j = 0; j < k; ++j) {
    const std::size_t stride = ipow(m, k - 1 - j);
    for (Eigen::Index a = 0; a < dim; ++a) {
      const std::size_t da = digit(static_cast<std::size_t>(a), j, k, m);
      const std::size_t base = static_cast<std::size_t>(a) - da * stride;
      for (std::size_t l = 0; l < m; ++l) {
        const double w = d(static_cast<Eigen::Index>(da), static_cast<Eigen::Index>(l));
        const auto src = static_cast<Eigen::Index>(base + l * stride);
        out.row(a) += w * kernel.row(src);
        out.col(a) -= w * kernel.col(src);
      }
    }
  }
  return out;
}

Matrix hierarchy_rhs(const ReducedDensity& g, const ReducedDensity* higher, const std::vector<double>& table,
                     double pair_weight, double collision_weight) {
  const int k = g.k;
  const std::size_t m = g.grid.size();
  const auto dim = static_cast<Eigen::Index>(g.kernel.rows());
  Matrix rhs = kinetic_commutator(g.kernel, minus_laplacian(g.grid), k, m);

  auto v = [&](std::size_t a, std::size_t b) { return table[(a + m - b) % m]; };

  if (pair_weight != 0.0 && k >= 2) {
    for (Eigen::Index a = 0; a < dim; ++a)
      for (Eigen::Index b = 0; b < dim; ++b) {
        double dv = 0.0;
        for (int i = 0; i < k; ++i)
          for (int j = i + 1; j < k; ++j) {
            dv += v(digit(a, i, k, m), digit(a, j, k, m));
            dv -= v(digit(b, i, k, m), digit(b, j, k, m));
          }
        rhs(a, b) += pair_weight * dv * g.kernel(a, b);
      }
  }

  if (higher && collision_weight != 0.0) {
    const double h = g.grid.spacing();
    const auto mm = static_cast<Eigen::Index>(m);
    for (Eigen::Index a = 0; a < dim; ++a)
      for (Eigen::Index b = 0; b < dim; ++b) {
        cplx acc = 0.0;
        for (int j = 0; j < k; ++j) {
          const std::size_t xa = digit(a, j, k, m), xb = digit(b, j, k, m);
          for (Eigen::Index y = 0; y < mm; ++y) {
            const double dv = v(xa, static_cast<std::size_t>(y)) - v(xb, static_cast<std::size_t>(y));
            acc += dv * higher->kernel(a * mm + y, b * mm + y);
          }
        }
        rhs(a, b) += collision_weight * h * acc;
      }
  }
  return rhs;
}

double hierarchy_residual(const std::array<double, 3>& times, const std::array<const ReducedDensity*, 3>& gamma,
                          const ReducedDensity* higher, const PotentialSpec& v, double pair_weight,
                          double collision_weight) {
  const ReducedDensity& mid = *gamma[1];
  for (const auto* g : gamma) check_same(*g, mid, "hierarchy residual");
  if (higher) {
    require(higher->k == mid.k + 1 && higher->grid == mid.grid, ErrorCategory::structural,
            "hierarchy residual: higher marginal must have order k+1 on the same grid");
  }
  const double delta = times[1] - times[0];
  require(delta > 0.0 && std::abs((times[2] - times[1]) - delta) <= 1e-9 * std::max(1.0, std::abs(times[1])),
          ErrorCategory::structural, "hierarchy residual: snapshot times must be t-delta, t, t+delta");

  const Matrix lhs = cplx(0.0, 1.0 / (2.0 * delta)) * (gamma[2]->kernel - gamma[0]->kernel);
  const auto table = sample_pair_potential(ScaledPotential::unscaled(v), mid.grid);
  const Matrix r = lhs - hierarchy_rhs(mid, higher, table, pair_weight, collision_weight);
  return mid.weight() * r.norm();
}

}  // namespace

double ReducedDensity::weight() const { return std::pow(grid.spacing(), k); }

ReducedDensity reduce(const NBodyState& psi, int k, std::size_t budget) {
  const int n = psi.particles();
  require(k >= 1 && k <= n, ErrorCategory::domain, "reduce: order k must satisfy 1 <= k <= N");
  const std::size_t m = psi.grid().size();
  tensor_size(m, 2 * k, budget);  // the kernel itself holds M^(2k) entries
  const auto dim = static_cast<Eigen::Index>(ipow(m, k));
  const auto rest = static_cast<Eigen::Index>(ipow(m, n - k));
  const RowMajorMap a(psi.amplitudes().data(), dim, rest);
  Matrix kernel(dim, dim);
  kernel.noalias() = a * a.adjoint();
  kernel *= std::pow(psi.grid().spacing(), n - k);
  return {k, psi.grid(), std::move(kernel)};
}

ReducedDensity rank_one_projector(const ComplexField& phi, int k) {
  require(k >= 1, ErrorCategory::domain, "rank_one_projector: k must be at least 1");
  const auto power = product_state(phi, k);
  const Eigen::Map<const Eigen::VectorXcd> v(power.amplitudes().data(), static_cast<Eigen::Index>(power.size()));
  return {k, phi.grid(), v * v.adjoint()};
}

ReducedDensity partial_trace_last(const ReducedDensity& rho) {
  require(rho.k >= 2, ErrorCategory::domain, "partial_trace_last: order must be at least 2");
  const auto m = static_cast<Eigen::Index>(rho.grid.size());
  const Eigen::Index dim = rho.kernel.rows() / m;
  Matrix out = Matrix::Zero(dim, dim);
  for (Eigen::Index a = 0; a < dim; ++a)
    for (Eigen::Index b = 0; b < dim; ++b) {
      cplx acc = 0.0;
      for (Eigen::Index y = 0; y < m; ++y) acc += rho.kernel(a * m + y, b * m + y);
      out(a, b) = rho.grid.spacing() * acc;
    }
  return {rho.k - 1, rho.grid, std::move(out)};
}

double trace(const ReducedDensity& rho) { return rho.weight() * rho.kernel.trace().real(); }

double trace_norm_distance(const ReducedDensity& a, const ReducedDensity& b) {
  check_same(a, b, "trace_norm_distance");
  const Matrix d = a.weight() * (a.kernel - b.kernel);
  const double scale = a.weight() * (a.kernel.norm() + b.kernel.norm());
  require((d - d.adjoint()).norm() <= 1e-10 * std::max(scale, 1e-300), ErrorCategory::structural,
          "trace_norm_distance: difference is not Hermitian");
  const Matrix herm = 0.5 * (d + d.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

DensityInvariants check_invariants(const ReducedDensity& rho) {
  DensityInvariants out;
  const double nk = rho.kernel.norm();
  out.hermiticity = nk > 0.0 ? (rho.kernel - rho.kernel.adjoint()).norm() / nk : 0.0;
  const Matrix herm = 0.5 * rho.weight() * (rho.kernel + rho.kernel.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  out.trace = trace(rho);

  const std::size_t m = rho.grid.size();
  const int k = rho.k;
  const auto dim = rho.kernel.rows();
  // Swapping coordinates j and j+1 in the row index leaves a symmetric kernel
  // unchanged; the column group follows by hermiticity.
  for (int j = 0; j + 1 < k; ++j) {
    const std::size_t s1 = ipow(m, k - 1 - j), s2 = ipow(m, k - 2 - j);
    double diff = 0.0;
    for (Eigen::Index a = 0; a < dim; ++a) {
      const std::size_t u = digit(a, j, k, m), w = digit(a, j + 1, k, m);
      const auto swapped = static_cast<Eigen::Index>(static_cast<std::size_t>(a) - u * s1 - w * s2 + w * s1 + u * s2);
      diff += (rho.kernel.row(a) - rho.kernel.row(swapped)).squaredNorm();
    }
    out.exchange_asymmetry = std::max(out.exchange_asymmetry, nk > 0.0 ? std::sqrt(diff) / nk : 0.0);
  }
  return out;
}

double bbgky_residual(const HierarchySnapshots& s, const PotentialSpec& v, int n) {
  const int k = s.gamma[1].k;
  require(n >= 1 && k <= n, ErrorCategory::domain, "bbgky_residual: need 1 <= k <= N");
  require(k == n || s.higher.has_value(), ErrorCategory::structural,
          "bbgky_residual: the (k+1)-th marginal is required for k < N");
  const ReducedDensity* higher = k < n ? &*s.higher : nullptr;
  return hierarchy_residual(s.times, {&s.gamma[0], &s.gamma[1], &s.gamma[2]}, higher, v, 1.0 / n,
                            1.0 - static_cast<double>(k) / n);
}

double infinite_hierarchy_check(const Trajectory& traj, std::size_t mid, const PotentialSpec& v, int k) {
  require(mid >= 1 && mid + 1 < traj.snapshots.size(), ErrorCategory::structural,
          "infinite_hierarchy_check: need records on both sides of the center");
  std::array<ReducedDensity, 3> g{rank_one_projector(traj.snapshots[mid - 1], k),
                                  rank_one_projector(traj.snapshots[mid], k),
                                  rank_one_projector(traj.snapshots[mid + 1], k)};
  const ReducedDensity higher = rank_one_projector(traj.snapshots[mid], k + 1);
  return hierarchy_residual({traj.times[mid - 1], traj.times[mid], traj.times[mid + 1]}, {&g[0], &g[1], &g[2]},
                            &higher, v, 0.0, 1.0);
}

}  // namespace effdyn
