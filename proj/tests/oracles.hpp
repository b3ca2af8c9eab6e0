#pragma once

// Reference computations used only by the tests. Nothing here calls into the
// FFT layer; transforms are explicit sums so they stay independent of the
// code under test.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "effdyn/grid.hpp"

namespace oracle {

using cplx = std::complex<double>;
using effdyn::UniformGrid;

/// Dense matrix of -Delta on the periodic grid built from explicit Fourier
/// sums: D(x,y) = (1/M) sum_k k^2 exp(i k (x - y)).
inline Eigen::MatrixXd minus_laplacian_matrix(const UniformGrid& g) {
  const auto m = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      double acc = 0.0;
      for (Eigen::Index q = 0; q < m; ++q) {
        const double k = g.wavenumber(static_cast<std::size_t>(q));
        acc += k * k * std::cos(k * (g.x(static_cast<std::size_t>(i)) - g.x(static_cast<std::size_t>(j))));
      }
      d(i, j) = acc / static_cast<double>(m);
    }
  return d;
}

/// Second-order centered difference f'' on the periodic grid.
inline std::vector<cplx> fd_second_derivative(const effdyn::ComplexField& f) {
  const std::size_t m = f.size();
  const double h = f.grid().spacing();
  std::vector<cplx> out(m);
  for (std::size_t i = 0; i < m; ++i)
    out[i] = (f[(i + 1) % m] - 2.0 * f[i] + f[(i + m - 1) % m]) / (h * h);
  return out;
}

inline effdyn::ComplexField random_field(const UniformGrid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  effdyn::ComplexField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = {n(rng), n(rng)};
  return f;
}

/// exp(-i t H) v by Lanczos with full reorthogonalization, restarted every
/// `dim` vectors over sub-intervals of length `tau`.
inline Eigen::VectorXcd krylov_propagate(const Eigen::MatrixXcd& h, Eigen::VectorXcd v, double t,
                                         double tau = 0.02, int dim = 30) {
  const int steps = static_cast<int>(std::ceil(t / tau - 1e-12));
  const double dt = t / steps;
  for (int s = 0; s < steps; ++s) {
    const double beta0 = v.norm();
    const Eigen::Index n = v.size();
    Eigen::MatrixXcd q(n, dim + 1);
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(dim, dim);
    q.col(0) = v / beta0;
    int used = dim;
    for (int j = 0; j < dim; ++j) {
      Eigen::VectorXcd w = h * q.col(j);
      for (int r = 0; r <= j; ++r) {
        const cplx c = q.col(r).dot(w);
        w -= c * q.col(r);
        if (r == j) tri(j, j) = c.real();
      }
      for (int r = 0; r <= j; ++r) w -= q.col(r).dot(w) * q.col(r);
      const double b = w.norm();
      if (j + 1 < dim) {
        tri(j, j + 1) = tri(j + 1, j) = b;
      }
      if (b < 1e-14) {
        used = j + 1;
        break;
      }
      q.col(j + 1) = w / b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri.topLeftCorner(used, used));
    Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(used);
    e1(0) = 1.0;
    Eigen::VectorXcd phase(used);
    for (int j = 0; j < used; ++j) phase(j) = std::polar(1.0, -dt * es.eigenvalues()(j));
    const Eigen::MatrixXcd vecs = es.eigenvectors().cast<cplx>();
    const Eigen::VectorXcd coeff = vecs * phase.asDiagonal() * vecs.adjoint() * e1;
    v = beta0 * q.leftCols(used) * coeff;
  }
  return v;
}

/// Density standard deviation of a free Gaussian packet under i d/dt = -d^2,
/// starting from standard deviation s.
inline double free_gaussian_width(double s, double t) {
  return s * std::sqrt(1.0 + (t / (s * s)) * (t / (s * s)));
}

}  // namespace oracle
