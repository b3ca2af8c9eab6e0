#include "effdyn/potentials.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "effdyn/error.hpp"
#include "effdyn/format.hpp"

namespace effdyn {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* what) {
  require(std::isfinite(v) && v > 0.0, ErrorCategory::domain,
          std::string("potential: ") + what + " must be positive and finite");
}

void require_finite(double v, const char* what) {
  require(std::isfinite(v), ErrorCategory::domain,
          std::string("potential: ") + what + " must be finite");
}

}  // namespace

void validate(const PotentialSpec& v) {
  std::visit(overloaded{
                 [](const ZeroPotential&) {},
                 [](const GaussianPotential& p) {
                   require_finite(p.amplitude, "gaussian amplitude");
                   require_positive(p.sigma, "gaussian sigma");
                 },
                 [](const SquareBarrier& p) {
                   require_finite(p.height, "barrier height");
                   require_positive(p.radius, "barrier radius");
                 },
                 [](const SoftCoulomb& p) {
                   require_finite(p.charge, "soft_coulomb charge");
                   require_positive(p.softening, "soft_coulomb softening");
                 },
                 [](const HarmonicTrap& p) { require_finite(p.stiffness, "harmonic stiffness"); },
             },
             v);
}

double evaluate(const PotentialSpec& v, double r) {
  r = std::abs(r);
  return std::visit(
      overloaded{
          [](const ZeroPotential&) { return 0.0; },
          [r](const GaussianPotential& p) {
            return p.amplitude * std::exp(-r * r / (2.0 * p.sigma * p.sigma));
          },
          [r](const SquareBarrier& p) { return r < p.radius ? p.height : 0.0; },
          [r](const SoftCoulomb& p) { return p.charge / std::sqrt(r * r + p.softening * p.softening); },
          [r](const HarmonicTrap& p) { return p.stiffness * r * r; },
      },
      v);
}

std::string kind_name(const PotentialSpec& v) {
  return std::visit(overloaded{
                        [](const ZeroPotential&) { return std::string("zero"); },
                        [](const GaussianPotential&) { return std::string("gaussian"); },
                        [](const SquareBarrier&) { return std::string("square_barrier"); },
                        [](const SoftCoulomb&) { return std::string("soft_coulomb"); },
                        [](const HarmonicTrap&) { return std::string("harmonic"); },
                    },
                    v);
}

std::string parameter_string(const PotentialSpec& v) {
  return std::visit(
      overloaded{
          [](const ZeroPotential&) { return std::string(); },
          [](const GaussianPotential& p) {
            return "A=" + format_double(p.amplitude) + ";sigma=" + format_double(p.sigma);
          },
          [](const SquareBarrier& p) {
            return "V0=" + format_double(p.height) + ";R0=" + format_double(p.radius);
          },
          [](const SoftCoulomb& p) {
            return "q=" + format_double(p.charge) + ";eps=" + format_double(p.softening);
          },
          [](const HarmonicTrap& p) { return "kappa=" + format_double(p.stiffness); },
      },
      v);
}

std::vector<double> breakpoints(const PotentialSpec& v) {
  if (const auto* b = std::get_if<SquareBarrier>(&v)) return {b->radius};
  return {};
}

double support_radius(const PotentialSpec& v, double rel_tol) {
  return std::visit(overloaded{
                        [](const ZeroPotential&) { return 0.0; },
                        [rel_tol](const GaussianPotential& p) {
                          if (p.amplitude == 0.0) return 0.0;
                          return p.sigma * std::sqrt(2.0 * std::log(1.0 / rel_tol));
                        },
                        [](const SquareBarrier& p) { return p.height == 0.0 ? 0.0 : p.radius; },
                        [](const SoftCoulomb& p) { return p.charge == 0.0 ? 0.0 : kInf; },
                        [](const HarmonicTrap& p) { return p.stiffness == 0.0 ? 0.0 : kInf; },
                    },
                    v);
}

bool is_nonnegative(const PotentialSpec& v) {
  return std::visit(overloaded{
                        [](const ZeroPotential&) { return true; },
                        [](const GaussianPotential& p) { return p.amplitude >= 0.0; },
                        [](const SquareBarrier& p) { return p.height >= 0.0; },
                        [](const SoftCoulomb& p) { return p.charge >= 0.0; },
                        [](const HarmonicTrap& p) { return p.stiffness >= 0.0; },
                    },
                    v);
}

bool is_zero(const PotentialSpec& v) { return support_radius(v) == 0.0; }

PotentialSpec scaled(const PotentialSpec& v, double c) {
  return std::visit(overloaded{
                        [](const ZeroPotential& p) -> PotentialSpec { return p; },
                        [c](GaussianPotential p) -> PotentialSpec {
                          p.amplitude *= c;
                          return p;
                        },
                        [c](SquareBarrier p) -> PotentialSpec {
                          p.height *= c;
                          return p;
                        },
                        [c](SoftCoulomb p) -> PotentialSpec {
                          p.charge *= c;
                          return p;
                        },
                        [c](HarmonicTrap p) -> PotentialSpec {
                          p.stiffness *= c;
                          return p;
                        },
                    },
                    v);
}

PotentialSpec gp_rescaled(const PotentialSpec& v, double n) {
  require(n >= 1.0, ErrorCategory::domain, "gp_rescaled: N must be at least 1");
  return std::visit(overloaded{
                        [](const ZeroPotential& p) -> PotentialSpec { return p; },
                        [n](const GaussianPotential& p) -> PotentialSpec {
                          return GaussianPotential{n * n * p.amplitude, p.sigma / n};
                        },
                        [n](const SquareBarrier& p) -> PotentialSpec {
                          return SquareBarrier{n * n * p.height, p.radius / n};
                        },
                        [n](const SoftCoulomb& p) -> PotentialSpec {
                          return SoftCoulomb{n * p.charge, p.softening / n};
                        },
                        [n](const HarmonicTrap& p) -> PotentialSpec {
                          return HarmonicTrap{n * n * n * n * p.stiffness};
                        },
                    },
                    v);
}

ScaledPotential ScaledPotential::mean_field(PotentialSpec v, int n) {
  require(n >= 1, ErrorCategory::domain, "mean_field: N must be at least 1");
  return {std::move(v), Regime::mean_field, n};
}

ScaledPotential ScaledPotential::gross_pitaevskii(PotentialSpec v, int n) {
  require(n >= 1, ErrorCategory::domain, "gross_pitaevskii: N must be at least 1");
  return {std::move(v), Regime::gross_pitaevskii, n};
}

double evaluate(const ScaledPotential& p, double x) {
  const double n = static_cast<double>(p.particles);
  switch (p.regime) {
    case Regime::unscaled: return evaluate(p.base, x);
    case Regime::mean_field: return evaluate(p.base, x) / n;
    case Regime::gross_pitaevskii: return n * n * evaluate(p.base, n * x);
  }
  return 0.0;
}

PotentialSpec effective(const ScaledPotential& p) {
  switch (p.regime) {
    case Regime::unscaled: return p.base;
    case Regime::mean_field: return scaled(p.base, 1.0 / static_cast<double>(p.particles));
    case Regime::gross_pitaevskii: return gp_rescaled(p.base, static_cast<double>(p.particles));
  }
  return p.base;
}

std::vector<double> sample_pair_potential(const ScaledPotential& p, const UniformGrid& g) {
  validate(p.base);
  const std::size_t m = g.size();
  std::vector<double> table(m);
  for (std::size_t i = 0; i < m; ++i) {
    const long long j = i <= m / 2 ? static_cast<long long>(i)
                                   : static_cast<long long>(i) - static_cast<long long>(m);
    const double v = evaluate(p, static_cast<double>(j) * g.spacing());
    require(std::isfinite(v), ErrorCategory::domain,
            "sample_pair_potential: unbounded value on the grid");
    table[i] = v;
  }
  return table;
}

double born_coupling(const PotentialSpec& v, Dimension d) {
  validate(v);
  if (is_zero(v)) return 0.0;
  require(!std::holds_alternative<SoftCoulomb>(v) && !std::holds_alternative<HarmonicTrap>(v),
          ErrorCategory::domain, "born_coupling: " + kind_name(v) + " is not integrable");
  const bool three = d == Dimension::three;
  auto integrand = [&](double r) {
    const double w = three ? 4.0 * std::numbers::pi * r * r : 2.0;
    return w * evaluate(v, r);
  };
  // Breakpoints split the range; beyond support_radius(1e-30) the remaining
  // mass is far below double precision.
  std::vector<double> edges{0.0};
  for (double b : breakpoints(v)) edges.push_back(b);
  const double outer = support_radius(v, 1e-30);
  if (outer > edges.back()) edges.push_back(outer);
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    total += gauss_kronrod<double, 31>::integrate(integrand, edges[i], edges[i + 1], 15, 1e-14);
  return total;
}

}  // namespace effdyn
