#pragma once

#include <string>
#include <variant>
#include <vector>

#include "effdyn/grid.hpp"

namespace effdyn {

// Closed catalog of radial potentials. All members are even functions of
// the coordinate, so they are evaluated on |x|.

struct ZeroPotential {};

/// A exp(-|x|^2 / (2 sigma^2))
struct GaussianPotential {
  double amplitude;
  double sigma;
};

/// V0 for |x| < R0, 0 outside.
struct SquareBarrier {
  double height;
  double radius;
};

/// q / sqrt(|x|^2 + eps^2)
struct SoftCoulomb {
  double charge;
  double softening;
};

/// kappa |x|^2. Trap term only; not integrable.
struct HarmonicTrap {
  double stiffness;
};

using PotentialSpec =
    std::variant<ZeroPotential, GaussianPotential, SquareBarrier, SoftCoulomb, HarmonicTrap>;

/// Throws a domain error when a width, radius or softening is not positive
/// or a parameter is not finite.
void validate(const PotentialSpec& v);

double evaluate(const PotentialSpec& v, double r);

std::string kind_name(const PotentialSpec& v);
/// "name=value" pairs joined by ';', shortest round-trip decimal form.
std::string parameter_string(const PotentialSpec& v);

/// Radii where the potential is discontinuous.
std::vector<double> breakpoints(const PotentialSpec& v);

/// Radius beyond which |V| <= rel_tol * max|V|; infinity for slowly decaying
/// or growing kinds, 0 for the zero potential.
double support_radius(const PotentialSpec& v, double rel_tol = 1e-10);

bool is_nonnegative(const PotentialSpec& v);
bool is_zero(const PotentialSpec& v);

/// c V, exactly representable in the catalog.
PotentialSpec scaled(const PotentialSpec& v, double c);

/// N^2 V(N x), exactly representable in the catalog.
PotentialSpec gp_rescaled(const PotentialSpec& v, double n);

enum class Regime { unscaled, mean_field, gross_pitaevskii };

struct ScaledPotential {
  PotentialSpec base;
  Regime regime = Regime::unscaled;
  int particles = 1;

  static ScaledPotential unscaled(PotentialSpec v) { return {std::move(v), Regime::unscaled, 1}; }
  static ScaledPotential mean_field(PotentialSpec v, int n);
  static ScaledPotential gross_pitaevskii(PotentialSpec v, int n);
};

/// (1/N) V(x), N^2 V(N x) or V(x) depending on the regime.
double evaluate(const ScaledPotential& p, double x);

/// The regime applied to the base, as a catalog member.
PotentialSpec effective(const ScaledPotential& p);

/// Values V(d_m) on the periodic difference grid: d_m = m h for m <= M/2 and
/// (m - M) h above, i.e. the minimal-image separation of two grid points whose
/// indices differ by m (mod M).
std::vector<double> sample_pair_potential(const ScaledPotential& p, const UniformGrid& g);

enum class Dimension { one = 1, three = 3 };

/// b0 = integral of V over R^d by adaptive Gauss-Kronrod quadrature
/// (3D radial form 4 pi int V r^2 dr). Domain error when V is not integrable.
double born_coupling(const PotentialSpec& v, Dimension d = Dimension::three);

}  // namespace effdyn
