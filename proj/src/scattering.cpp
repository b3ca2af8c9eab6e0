#include "effdyn/scattering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "effdyn/error.hpp"

namespace effdyn {
namespace {

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kGlNodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                         0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGlWeights{0.2369268850561891, 0.4786286704993665,
                                           0.5688888888888889, 0.4786286704993665,
                                           0.2369268850561891};

struct State {
  double u;
  double du;
};

// V at an interval end point; jumps sitting on the end point are resolved
// from the interval's side.
double one_sided(const PotentialSpec& v, const std::vector<double>& bps, double x, double a,
                 double b) {
  const double eps = 1e-9 * (b - a);
  for (double bp : bps) {
    if (std::abs(x - bp) <= eps) x = (x == a || std::abs(x - a) <= eps) ? bp + eps : bp - eps;
  }
  return evaluate(v, x);
}

State rk4(const PotentialSpec& v, const std::vector<double>& bps, State y, double a, double b) {
  const double h = b - a;
  const double va = 0.5 * one_sided(v, bps, a, a, b);
  const double vm = 0.5 * evaluate(v, a + 0.5 * h);
  const double vb = 0.5 * one_sided(v, bps, b, a, b);
  const State k1{y.du, va * y.u};
  const State y2{y.u + 0.5 * h * k1.u, y.du + 0.5 * h * k1.du};
  const State k2{y2.du, vm * y2.u};
  const State y3{y.u + 0.5 * h * k2.u, y.du + 0.5 * h * k2.du};
  const State k3{y3.du, vm * y3.u};
  const State y4{y.u + h * k3.u, y.du + h * k3.du};
  const State k4{y4.du, vb * y4.u};
  return {y.u + h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
          y.du + h / 6.0 * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du)};
}

// Cubic Hermite basis on [r0, r0 + h] at local coordinate s in [0, 1].
double hermite(double s, double h, double p0, double m0, double p1, double m1) {
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * p1 +
         (s3 - s2) * h * m1;
}

double hermite_slope(double s, double h, double p0, double m0, double p1, double m1) {
  const double s2 = s * s;
  return ((6 * s2 - 6 * s) * p0 + (-6 * s2 + 6 * s) * p1) / h + (3 * s2 - 4 * s + 1) * m0 +
         (3 * s2 - 2 * s) * m1;
}

// Gauss-Legendre integral of g over [a, b], split at breakpoints strictly inside.
template <class G>
double integrate_piece(G&& g, double a, double b, const std::vector<double>& bps) {
  std::vector<double> edges{a};
  for (double bp : bps)
    if (bp > a && bp < b) edges.push_back(bp);
  edges.push_back(b);
  double total = 0.0;
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double lo = edges[e], hi = edges[e + 1];
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t q = 0; q < kGlNodes.size(); ++q)
      total += half * kGlWeights[q] * g(mid + half * kGlNodes[q]);
  }
  return total;
}

}  // namespace

double ScatteringSolution::u_at(double r) const {
  if (r >= grid.radius()) return r - a0;
  const double h = grid.spacing();
  const auto j = std::min(static_cast<std::size_t>(r / h), grid.size() - 1);
  const double s = (r - grid.r(j)) / (grid.r(j + 1) - grid.r(j));
  return hermite(s, grid.r(j + 1) - grid.r(j), u[j], du[j], u[j + 1], du[j + 1]);
}

double ScatteringSolution::du_at(double r) const {
  if (r >= grid.radius()) return 1.0;
  const double h = grid.spacing();
  const auto j = std::min(static_cast<std::size_t>(r / h), grid.size() - 1);
  const double s = (r - grid.r(j)) / (grid.r(j + 1) - grid.r(j));
  return hermite_slope(s, grid.r(j + 1) - grid.r(j), u[j], du[j], u[j + 1], du[j + 1]);
}

double ScatteringSolution::f_at(double r) const {
  if (r <= 0.0) return f.front();
  if (r >= grid.radius()) return 1.0 - a0 / r;
  return u_at(r) / r;
}

RadialGrid default_radial_grid(const PotentialSpec& v) {
  const double reach = support_radius(v, 1e-10);
  const double radius = std::max(10.0, 4.0 * reach);
  const auto points = static_cast<std::size_t>(std::ceil(radius / 1e-3));
  return RadialGrid(radius, std::max<std::size_t>(points, 10000));
}

ScatteringSolution solve_zero_energy(const PotentialSpec& v, const RadialGrid& g) {
  validate(v);
  require(is_nonnegative(v), ErrorCategory::domain,
          "solve_zero_energy: the potential must be nonnegative");
  const double peak = std::abs(evaluate(v, 0.0));
  const double tail = std::abs(evaluate(v, g.radius()));
  require(!(tail > 1e-10 * peak) && std::isfinite(support_radius(v)), ErrorCategory::domain,
          "solve_zero_energy: box too small (potential not negligible at R)");

  const std::size_t m = g.size();
  const auto bps = breakpoints(v);
  std::vector<double> u(m + 1), du(m + 1);
  State y{0.0, 1.0};
  u[0] = y.u;
  du[0] = y.du;
  for (std::size_t j = 0; j < m; ++j) {
    const double a = g.r(j), b = g.r(j + 1);
    double lo = a;
    for (double bp : bps) {
      if (bp > a && bp < b) {
        y = rk4(v, bps, y, lo, bp);
        lo = bp;
      }
    }
    y = rk4(v, bps, y, lo, b);
    u[j + 1] = y.u;
    du[j + 1] = y.du;
  }

  // Outside the range u = c (r - a0).
  const double slope = du[m];
  const double a0 = g.radius() - u[m] / slope;
  ScatteringSolution s{g, std::move(u), std::move(du), {}, a0, 0.0, 0.0};
  for (auto& x : s.u) x /= slope;
  for (auto& x : s.du) x /= slope;
  s.f.resize(m + 1);
  s.f[0] = s.du[0];
  for (std::size_t j = 1; j <= m; ++j) s.f[j] = s.u[j] / g.r(j);

  const double reach = support_radius(v, 1e-10);
  s.fit_hi = 0.8 * g.radius();
  s.fit_lo = reach > 0.0 ? 2.0 * reach : 0.1 * g.radius();
  if (s.fit_lo >= s.fit_hi) s.fit_lo = 0.5 * s.fit_hi;
  return s;
}

double scattering_length_integral(const ScatteringSolution& s, const PotentialSpec& v) {
  if (is_zero(v)) return 0.0;
  const auto bps = breakpoints(v);
  const auto& g = s.grid;
  double total = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double a = g.r(j), b = g.r(j + 1);
    const double h = b - a;
    // Skip intervals where V has decayed below double precision.
    if (evaluate(v, a) == 0.0 && evaluate(v, b) == 0.0 &&
        std::none_of(bps.begin(), bps.end(), [&](double bp) { return bp > a && bp < b; }))
      continue;
    auto integrand = [&](double r) {
      const double t = (r - a) / h;
      const double uu = hermite(t, h, s.u[j], s.du[j], s.u[j + 1], s.du[j + 1]);
      return evaluate(v, r) * uu * r;
    };
    total += integrate_piece(integrand, a, b, bps);
  }
  // (1/8 pi) 4 pi int V f r^2 dr with f r = u.
  return 0.5 * total;
}

AsymptoticFit scattering_length_asymptotic(const ScatteringSolution& s) {
  return scattering_length_asymptotic(s, s.fit_lo, s.fit_hi);
}

AsymptoticFit scattering_length_asymptotic(const ScatteringSolution& s, double lo, double hi) {
  require(lo > 0.0 && hi > lo, ErrorCategory::domain, "asymptotic fit: empty window");
  double num = 0.0, den = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 1; j <= s.grid.size(); ++j) {
    const double r = s.grid.r(j);
    if (r < lo || r > hi) continue;
    num += (1.0 - s.f[j]) / r;
    den += 1.0 / (r * r);
    ++count;
  }
  require(count >= 2, ErrorCategory::domain, "asymptotic fit: window holds fewer than two nodes");
  AsymptoticFit fit;
  fit.a0 = num / den;
  double sq = 0.0;
  for (std::size_t j = 1; j <= s.grid.size(); ++j) {
    const double r = s.grid.r(j);
    if (r < lo || r > hi) continue;
    const double res = 1.0 - s.f[j] - fit.a0 / r;
    sq += res * res;
  }
  fit.rms_residual = std::sqrt(sq / static_cast<double>(count));
  fit.window_inside_range = fit.rms_residual > 1e-6;
  return fit;
}

std::vector<double> rescaled_profile(const ScatteringSolution& s, int n, const RadialGrid& g) {
  require(n >= 1, ErrorCategory::domain, "rescaled_profile: N must be at least 1");
  std::vector<double> out(g.size() + 1);
  for (std::size_t j = 0; j <= g.size(); ++j) out[j] = s.f_at(static_cast<double>(n) * g.r(j));
  return out;
}

double effective_coupling(const PotentialSpec& v, int n, const ScatteringSolution& s) {
  require(n >= 2, ErrorCategory::domain, "effective_coupling: N must be at least 2");
  if (is_zero(v)) return 0.0;
  const double nn = static_cast<double>(n);
  const PotentialSpec vn = gp_rescaled(v, nn);
  const auto bps = breakpoints(vn);
  // Quadrature cells follow the solution grid mapped to x = r / N.
  const double h = s.grid.spacing() / nn;
  const double reach = std::min(support_radius(v, 1e-30), s.grid.radius()) / nn;
  const auto cells = static_cast<std::size_t>(std::ceil(reach / h));
  double total = 0.0;
  for (std::size_t j = 0; j < cells; ++j) {
    const double a = static_cast<double>(j) * h, b = std::min(a + h, reach);
    auto integrand = [&](double x) { return evaluate(vn, x) * s.f_at(nn * x) * x * x; };
    total += integrate_piece(integrand, a, b, bps);
  }
  return (nn - 1.0) * 4.0 * std::numbers::pi * total;
}

double effective_coupling(const PotentialSpec& v, int n) {
  return effective_coupling(v, n, solve_zero_energy(v, default_radial_grid(v)));
}

}  // namespace effdyn
