#include "effdyn/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "effdyn/error.hpp"
#include "effdyn/fft.hpp"
#include "effdyn/format.hpp"
#include "effdyn/marginals.hpp"

namespace effdyn {

namespace {

constexpr double kPi = std::numbers::pi;

// Potential on the radial nodes; a jump that lands on a node takes the mean
// of the two sides.
double node_value(const PotentialSpec& v, const std::vector<double>& bps, double r, double h) {
  for (double bp : bps)
    if (std::abs(r - bp) <= 1e-9 * h) return 0.5 * (evaluate(v, bp - 1e-6 * h) + evaluate(v, bp + 1e-6 * h));
  return evaluate(v, r);
}

// Imaginary part -W of the complex absorbing potential, quadratic over the
// outer absorb_fraction of the box.
double absorber(double r, const RelativeSetup& s) {
  const double r_abs = s.radius * (1.0 - s.absorb_fraction);
  const double x = std::max(0.0, (r - r_abs) / (s.radius - r_abs));
  return s.absorb_strength * x * x;
}

// Both propagators act on the interior nodes 1..M-1; u vanishes at 0 and R.
class SinePropagator {
 public:
  SinePropagator(const PotentialSpec& v, const RelativeSetup& s, double dt)
      : grid_(s.grid()), n_(grid_.size() - 1), buffer_(n_), plan_(buffer_) {
    const auto bps = breakpoints(v);
    potential_.resize(n_);
    for (std::size_t j = 1; j <= n_; ++j) {
      const double r = grid_.r(j);
      potential_[j - 1] = std::exp(cplx(-absorber(r, s) * dt, -node_value(v, bps, r, grid_.spacing()) * dt));
    }
    const double norm = 1.0 / (2.0 * static_cast<double>(n_ + 1));
    half_.resize(n_);
    full_.resize(n_);
    for (std::size_t m = 1; m <= n_; ++m) {
      const double k = kPi * static_cast<double>(m) / s.radius;
      half_[m - 1] = std::polar(norm, -k * k * dt);
      full_[m - 1] = std::polar(norm, -2.0 * k * k * dt);
    }
  }

  std::span<cplx> interior() { return buffer_; }

  // Strang steps with the inner half kinetic steps merged.
  void advance(std::size_t steps) {
    if (steps == 0) return;
    kinetic(half_);
    for (std::size_t s = 1; s <= steps; ++s) {
      for (std::size_t j = 0; j < n_; ++j) buffer_[j] *= potential_[j];
      if (s < steps) kinetic(full_);
    }
    kinetic(half_);
  }

 private:
  void kinetic(const std::vector<cplx>& phase) {
    plan_.execute();
    for (std::size_t m = 0; m < n_; ++m) buffer_[m] *= phase[m];
    plan_.execute();
  }

  RadialGrid grid_;
  std::size_t n_;
  std::vector<cplx> buffer_;
  SinePlan plan_;
  std::vector<cplx> potential_, half_, full_;
};

// Crank-Nicolson with the Numerov relation B u'' = A u, A = (1, -2, 1) / h^2,
// B = (1, 10, 1) / 12. Multiplying the equation by B gives the tridiagonal
// system i B u_T = K u, K = -2 A + B diag(V - iW), stepped as
// (B + i dt/2 K) u+ = (B - i dt/2 K) u.
class NumerovPropagator {
 public:
  NumerovPropagator(const PotentialSpec& v, const RelativeSetup& s, double dt)
      : n_(s.grid().size() - 1), u_(n_), rhs_(n_), lo_(n_), di_(n_), up_(n_), rlo_(n_), rdi_(n_), rup_(n_),
        sweep_(n_), pivot_(n_), elim_(n_) {
    const RadialGrid g = s.grid();
    const double h = g.spacing(), a = 1.0 / (h * h);
    const auto bps = breakpoints(v);
    std::vector<cplx> w(n_);
    for (std::size_t j = 1; j <= n_; ++j)
      w[j - 1] = cplx(node_value(v, bps, g.r(j), h), -absorber(g.r(j), s));
    const cplx half_step(0.0, 0.5 * dt);
    for (std::size_t j = 0; j < n_; ++j) {
      const cplx kl = -2.0 * a + (j > 0 ? w[j - 1] / 12.0 : 0.0);
      const cplx kd = 4.0 * a + 10.0 * w[j] / 12.0;
      const cplx ku = -2.0 * a + (j + 1 < n_ ? w[j + 1] / 12.0 : 0.0);
      lo_[j] = 1.0 / 12.0 + half_step * kl;
      di_[j] = 10.0 / 12.0 + half_step * kd;
      up_[j] = 1.0 / 12.0 + half_step * ku;
      rlo_[j] = 1.0 / 12.0 - half_step * kl;
      rdi_[j] = 10.0 / 12.0 - half_step * kd;
      rup_[j] = 1.0 / 12.0 - half_step * ku;
    }
    for (std::size_t j = 0; j < n_; ++j) {
      const cplx d = di_[j] - (j > 0 ? lo_[j] * sweep_[j - 1] : 0.0);
      pivot_[j] = 1.0 / d;
      sweep_[j] = up_[j] * pivot_[j];
      elim_[j] = lo_[j] * pivot_[j];
    }
  }

  std::span<cplx> interior() { return u_; }

  // The loops are latency bound on the recurrences, so the right-hand side
  // and forward elimination share one pass with precomputed multipliers.
  void advance(std::size_t steps) {
    const std::size_t n = n_;
    for (std::size_t s = 0; s < steps; ++s) {
      const cplx* u = u_.data();
      cplx* y = rhs_.data();
      cplx prev = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        cplx b = rdi_[j] * u[j];
        if (j > 0) b += rlo_[j] * u[j - 1];
        if (j + 1 < n) b += rup_[j] * u[j + 1];
        prev = b * pivot_[j] - elim_[j] * prev;
        y[j] = prev;
      }
      for (std::size_t j = n - 1; j-- > 0;) y[j] -= sweep_[j] * y[j + 1];
      u_.swap(rhs_);
    }
  }

 private:
  std::size_t n_;
  std::vector<cplx> u_, rhs_;
  std::vector<cplx> lo_, di_, up_, rlo_, rdi_, rup_;
  std::vector<cplx> sweep_, pivot_, elim_;  // Thomas factorization of the left side
};

template <class Propagator>
std::vector<std::vector<cplx>> record_radial(Propagator& prop, const std::vector<cplx>& u0,
                                             const std::vector<std::size_t>& marks) {
  auto inner = prop.interior();
  std::copy(u0.begin() + 1, u0.end() - 1, inner.begin());
  std::vector<std::vector<cplx>> out;
  out.reserve(marks.size());
  std::size_t done = 0;
  for (std::size_t target : marks) {
    prop.advance(target - done);
    done = target;
    std::vector<cplx> u(u0.size(), 0.0);
    std::copy(inner.begin(), inner.end(), u.begin() + 1);
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<std::vector<cplx>> propagate_with(const PotentialSpec& v, std::vector<cplx> u0,
                                              std::span<const double> times, const RelativeSetup& setup,
                                              RadialScheme scheme, double dt) {
  validate(v);
  const RadialGrid g = setup.grid();
  require(u0.size() == g.size() + 1, ErrorCategory::structural, "propagate_radial: data size does not match the grid");
  std::vector<std::size_t> marks;
  for (double t : times) {
    require(t >= 0.0 && std::isfinite(t), ErrorCategory::domain, "propagate_radial: times must be nonnegative");
    const auto s = static_cast<std::size_t>(std::llround(t / dt));
    require(marks.empty() || s >= marks.back(), ErrorCategory::domain, "propagate_radial: times must increase");
    marks.push_back(s);
  }
  u0.front() = 0.0;
  u0.back() = 0.0;
  if (scheme == RadialScheme::sine_split) {
    SinePropagator prop(v, setup, dt);
    return record_radial(prop, u0, marks);
  }
  NumerovPropagator prop(v, setup, dt);
  return record_radial(prop, u0, marks);
}

std::vector<cplx> flat_initial(const RelativeSetup& s) {
  const RadialGrid g = s.grid();
  std::vector<cplx> u(g.size() + 1);
  for (std::size_t j = 0; j <= g.size(); ++j) u[j] = g.r(j) * plateau_cutoff(g.r(j), s);
  u.back() = 0.0;
  return u;
}

double simpson(const std::vector<double>& y, double h) {
  const std::size_t n = y.size() - 1;  // intervals
  if (n == 1) return 0.5 * h * (y[0] + y[1]);
  std::size_t even = n % 2 == 0 ? n : n - 3;
  double acc = 0.0;
  for (std::size_t i = 0; i + 2 <= even; i += 2) acc += h / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
  if (even != n) acc += 3.0 * h / 8.0 * (y[n - 3] + 3.0 * y[n - 2] + 3.0 * y[n - 1] + y[n]);
  return acc;
}

std::size_t window_nodes(const RadialGrid& g, double window) {
  const double h = g.spacing();
  const auto n = static_cast<std::size_t>(std::llround(window / h));
  require(window > 0.0 && std::abs(static_cast<double>(n) * h - window) <= 1e-9 * window, ErrorCategory::domain,
          "window " + format_double(window) + " is not on a grid node");
  require(n >= 3 && n + 2 <= g.size(), ErrorCategory::domain, "window must span at least 3 nodes inside the box");
  return n;
}

}  // namespace

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCategory::domain, "fit_loglog: need two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, ErrorCategory::domain, "fit_loglog: coordinates must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  require(denom > 0.0, ErrorCategory::domain, "fit_loglog: x values must differ");
  LogLogFit out;
  out.slope = (n * sxy - sx * sy) / denom;
  out.intercept = (sy - out.slope * sx) / n;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = std::log(y[i]) - (out.intercept + out.slope * std::log(x[i]));
    rss += r * r;
  }
  out.rms_residual = std::sqrt(rss / n);
  return out;
}

ConvergenceReport convergence_study(const ComplexField& phi, const PotentialSpec& v, std::span<const int> ns,
                                    const EvolutionConfig& cfg, const ConvergenceProgress& progress) {
  cfg.validate();
  for (std::size_t i = 1; i < ns.size(); ++i)
    require(ns[i] > ns[i - 1], ErrorCategory::domain, "convergence_study: N values must be strictly increasing");
  require(!ns.empty() && ns.front() >= 1, ErrorCategory::domain, "convergence_study: N values must be positive");

  ConvergenceReport report;
  report.t_eval = cfg.final_time();
  const auto hartree = evolve_hartree(phi, ScaledPotential::unscaled(v), cfg);
  const ReducedDensity target = rank_one_projector(hartree.snapshots.back(), 1);

  for (int n : ns) {
    const auto start = std::chrono::steady_clock::now();
    try {
      auto run = evolve_nbody(product_state(phi, n), NBodyHamiltonian::mean_field(v, n), cfg);
      ConvergenceRow row;
      row.n = n;
      row.distance = trace_norm_distance(reduce(run.final_state, 1), target);
      const auto& first = run.records.front();
      for (const auto& r : run.records) {
        row.max_norm_drift = std::max(row.max_norm_drift, std::abs(r.norm - first.norm));
        row.max_energy_drift = std::max(row.max_energy_drift,
                                        std::abs(r.energy - first.energy) / std::max(std::abs(first.energy), 1e-300));
      }
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      report.ns.push_back(n);
      report.distances.push_back(row.distance);
      report.rows.push_back(row);
      if (progress) progress(row);
    } catch (const Error& e) {
      report.complete = false;
      report.failure = "N=" + std::to_string(n) + ": " + e.what();
      report.failure_category = e.category();
      break;
    }
  }

  const bool all_small = std::all_of(report.distances.begin(), report.distances.end(),
                                     [](double d) { return d <= 1e-9; });
  report.degenerate = report.rows.size() < 2 || all_small;
  if (!report.degenerate) {
    std::vector<double> x(report.ns.begin(), report.ns.end());
    const auto fit = fit_loglog(x, report.distances);
    report.fitted_slope = fit.slope;
    report.fit_residual = fit.rms_residual;
  } else {
    report.fitted_slope = std::numeric_limits<double>::quiet_NaN();
    report.fit_residual = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

void RelativeSetup::validate() const {
  require(radius > 0.0 && spacing > 0.0 && dt > 0.0 && reference_dt > 0.0, ErrorCategory::domain,
          "relative setup: radius, spacing and time steps must be positive");
  require(absorb_fraction > 0.0 && absorb_fraction < 1.0 && absorb_strength >= 0.0, ErrorCategory::domain,
          "relative setup: absorbing layer fraction must lie in (0, 1)");
  require(plateau > window && ramp > 0.0 && plateau + ramp < radius * (1.0 - absorb_fraction), ErrorCategory::domain,
          "relative setup: plateau and ramp must end before the absorbing layer and cover the window");
  const double m = radius / spacing;
  require(std::abs(m - std::round(m)) <= 1e-9 * m && m >= 8, ErrorCategory::domain,
          "relative setup: radius must be a multiple of spacing");
}

RadialGrid RelativeSetup::grid() const {
  validate();
  return RadialGrid(radius, static_cast<std::size_t>(std::llround(radius / spacing)));
}

double plateau_cutoff(double r, const RelativeSetup& s) {
  // erfc profile centered in the ramp, within 1e-12 of 1 and 0 at its ends.
  // The width sets how long the cutoff stays invisible at the origin: the
  // edge reaches it through wavenumbers near r / 4T, damped as exp(-(k w)^2 / 4).
  const double c = s.plateau + 0.5 * s.ramp, w = s.ramp / 10.0;
  return 0.5 * std::erfc((r - c) / w);
}

std::vector<std::vector<cplx>> propagate_radial(const PotentialSpec& v, std::vector<cplx> u0,
                                                std::span<const double> times, const RelativeSetup& setup) {
  return propagate_with(v, std::move(u0), times, setup, setup.scheme, setup.dt);
}

double window_sup(std::span<const cplx> u, const RadialGrid& g, double window,
                  const std::function<double(double)>& target) {
  const std::size_t n = window_nodes(g, window);
  double m = 0.0;
  for (std::size_t j = 1; j <= n; ++j) m = std::max(m, std::abs(u[j] / g.r(j) - target(g.r(j))));
  return m;
}

namespace {

// Sup over the recorded times of |psi - 1| in the window for the free flat
// data; anything nonzero has travelled in from the cutoff or the box edge.
double free_boundary_deviation(std::span<const double> times, const RelativeSetup& setup) {
  const RadialGrid g = setup.grid();
  const auto snaps =
      propagate_with(ZeroPotential{}, flat_initial(setup), times, setup, RadialScheme::sine_split, setup.reference_dt);
  double dev = 0.0;
  for (const auto& u : snaps) dev = std::max(dev, window_sup(u, g, setup.window, [](double) { return 1.0; }));
  return dev;
}

}  // namespace

RelativeTrajectory evolve_relative(const PotentialSpec& v, std::span<const double> times,
                                   const RelativeSetup& setup) {
  const RadialGrid g = setup.grid();
  const auto u0 = flat_initial(setup);
  RelativeTrajectory out{g, {times.begin(), times.end()}, propagate_radial(v, u0, times, setup), 0.0, false};
  out.boundary_deviation = free_boundary_deviation(times, setup);
  out.box_too_small = out.boundary_deviation > 1e-3;
  return out;
}

double correlation_functional(std::span<const cplx> u, const RadialGrid& g, const ScatteringSolution& f,
                              double window) {
  require(u.size() == g.size() + 1, ErrorCategory::structural, "correlation_functional: data size does not match the grid");
  const std::size_t n = window_nodes(g, window);
  const double h = g.spacing();
  // q = psi / f = u / u_f, even in r; q(0) from the even extrapolation in r^2.
  std::vector<cplx> q(n + 3);
  for (std::size_t j = 1; j <= n + 2; ++j) {
    const double uf = f.u_at(g.r(j));
    require(uf > 1e-12 * g.r(j), ErrorCategory::domain, "correlation_functional: f vanishes in the window");
    q[j] = u[j] / uf;
  }
  q[0] = 1.5 * q[1] - 0.6 * q[2] + 0.1 * q[3];
  auto at = [&](long j) { return q[static_cast<std::size_t>(std::abs(j))]; };
  std::vector<double> integrand(n + 1, 0.0);
  for (std::size_t j = 1; j <= n; ++j) {
    const long i = static_cast<long>(j);
    const cplx dq = (8.0 * (at(i + 1) - at(i - 1)) - (at(i + 2) - at(i - 2))) / (12.0 * h);
    integrand[j] = std::norm(dq) * g.r(j) * g.r(j);
  }
  return 4.0 * kPi * simpson(integrand, h);
}

double correlation_bound(double t, double window) {
  const double l = std::log(t);
  return std::pow(l, 6) / t * window * window * window;
}

CorrelationReport correlation_study(const PotentialSpec& v, std::span<const double> times,
                                    const RelativeSetup& setup) {
  for (std::size_t i = 0; i < times.size(); ++i)
    require(times[i] > 0.0 && (i == 0 || times[i] > times[i - 1]), ErrorCategory::domain,
            "correlation_study: times must be positive and increasing");
  const auto f = solve_zero_energy(v, default_radial_grid(v));
  const auto traj = evolve_relative(v, times, setup);
  CorrelationReport out;
  out.times.assign(times.begin(), times.end());
  out.window = setup.window;
  out.f0 = correlation_functional(flat_initial(setup), traj.grid, f, setup.window);
  for (std::size_t i = 0; i < times.size(); ++i) {
    out.f_values.push_back(correlation_functional(traj.u[i], traj.grid, f, setup.window));
    out.bounds.push_back(correlation_bound(times[i], setup.window));
    out.sup_omega.push_back(window_sup(traj.u[i], traj.grid, setup.window, [&](double r) { return f.f_at(r); }));
  }
  out.boundary_deviation = traj.boundary_deviation;
  out.box_too_small = traj.box_too_small;
  return out;
}

DispersionReport dispersion_decay(const ScatteringSolution& f, std::span<const double> times,
                                  const RelativeSetup& setup, double fit_lo, double fit_hi) {
  const RadialGrid g = setup.grid();
  std::vector<cplx> u0(g.size() + 1);
  for (std::size_t j = 0; j <= g.size(); ++j) {
    const double r = g.r(j);
    u0[j] = r * (1.0 - f.f_at(r)) * plateau_cutoff(r, setup);
  }
  // Free evolution: the sine propagator is exact here, so the coarse step is used.
  const auto snaps = propagate_with(ZeroPotential{}, u0, times, setup, RadialScheme::sine_split, setup.reference_dt);
  DispersionReport out;
  out.times.assign(times.begin(), times.end());
  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < times.size(); ++i) {
    out.sup_norms.push_back(window_sup(snaps[i], g, setup.window, [](double) { return 0.0; }));
    if (times[i] >= fit_lo && times[i] <= fit_hi && out.sup_norms.back() > 0.0) {
      fx.push_back(times[i]);
      fy.push_back(out.sup_norms.back());
    }
  }
  if (fx.size() >= 2) {
    const auto fit = fit_loglog(fx, fy);
    out.exponent = fit.slope;
    out.fit_residual = fit.rms_residual;
  } else {
    out.exponent = std::numeric_limits<double>::quiet_NaN();
    out.fit_residual = std::numeric_limits<double>::quiet_NaN();
  }
  out.boundary_deviation = free_boundary_deviation(times, setup);
  out.box_too_small = out.boundary_deviation > 1e-3;
  return out;
}

}  // namespace effdyn
