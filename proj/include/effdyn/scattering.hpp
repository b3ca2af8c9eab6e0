#pragma once

#include <vector>

#include "effdyn/grid.hpp"
#include "effdyn/potentials.hpp"

namespace effdyn {

/// s-wave zero-energy scattering solution of (-Delta + V/2) f = 0 on a radial
/// grid. Arrays have grid.size()+1 entries; entry 0 is the origin.
struct ScatteringSolution {
  RadialGrid grid;
  std::vector<double> u;   // r f(r), normalized so u(r) = r - a0 outside the range of V
  std::vector<double> du;  // u'(r)
  std::vector<double> f;   // u / r, with f(0) = u'(0)
  double a0 = 0.0;         // from the large-r matching of u
  double fit_lo = 0.0;
  double fit_hi = 0.0;

  /// Cubic Hermite interpolation from (u, u'); for r beyond the grid the
  /// asymptotic form r - a0 is used.
  double u_at(double r) const;
  double du_at(double r) const;
  double f_at(double r) const;
};

/// Outward classical RK4 shooting from u(0) = 0, u'(0) = 1 with step R/M.
/// Steps are split at discontinuities of V so the scheme keeps its order.
/// Domain error if V is negative somewhere or not negligible at R.
ScatteringSolution solve_zero_energy(const PotentialSpec& v, const RadialGrid& g);

/// Grid with R large enough for the default fit window and spacing <= 1e-3.
RadialGrid default_radial_grid(const PotentialSpec& v);

/// (1/8 pi) int V f d^3x by Gauss-Legendre quadrature on each grid interval.
double scattering_length_integral(const ScatteringSolution& s, const PotentialSpec& v);

struct AsymptoticFit {
  double a0 = 0.0;
  double rms_residual = 0.0;
  /// Set when the residual exceeds 1e-6: the window reaches into the
  /// interaction range.
  bool window_inside_range = false;
};

/// Least-squares fit of f(r) to 1 - a/r over the solution's fit window.
AsymptoticFit scattering_length_asymptotic(const ScatteringSolution& s);
AsymptoticFit scattering_length_asymptotic(const ScatteringSolution& s, double lo, double hi);

/// f_N(r) = f(N r) at the nodes of g (M+1 entries, origin first).
std::vector<double> rescaled_profile(const ScatteringSolution& s, int n, const RadialGrid& g);

/// (N - 1) int V_N f_N d^3x with V_N = N^2 V(N .), evaluated in the unscaled
/// coordinate. Equals (1 - 1/N) 8 pi a0.
double effective_coupling(const PotentialSpec& v, int n, const ScatteringSolution& s);
double effective_coupling(const PotentialSpec& v, int n);

}  // namespace effdyn
