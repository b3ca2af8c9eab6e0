#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "effdyn/error.hpp"
#include "effdyn/grid.hpp"
#include "effdyn/meanfield.hpp"
#include "effdyn/nbody.hpp"
#include "effdyn/potentials.hpp"
#include "effdyn/scattering.hpp"

namespace effdyn {

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};

/// Least-squares line through (log x, log y). Needs at least two points with
/// positive coordinates.
LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Mean-field convergence

struct ConvergenceRow {
  int n = 0;
  double distance = 0.0;
  double max_norm_drift = 0.0;
  double max_energy_drift = 0.0;  // relative
  double seconds = 0.0;
};

struct ConvergenceReport {
  std::vector<int> ns;
  double t_eval = 0.0;
  std::vector<ConvergenceRow> rows;
  std::vector<double> distances;
  double fitted_slope = 0.0;
  double fit_residual = 0.0;
  bool degenerate = false;  // every distance below 1e-9, or fewer than two rows
  bool complete = true;
  std::string failure;
  ErrorCategory failure_category = ErrorCategory::numerical;  // meaningful when !complete
};

/// Called after each N finishes, in order.
using ConvergenceProgress = std::function<void(const ConvergenceRow&)>;

/// Evolves phi^N under the mean-field Hamiltonian for each N in `ns` up to
/// cfg.final_time(), and compares gamma^(1) with the Hartree projector of the
/// same unscaled potential. A failing sub-run stops the study and marks the
/// report incomplete.
ConvergenceReport convergence_study(const ComplexField& phi, const PotentialSpec& v, std::span<const int> ns,
                                    const EvolutionConfig& cfg, const ConvergenceProgress& progress = {});

// ---------------------------------------------------------------------------
// Relative-coordinate dynamics in three dimensions, s-wave

/// Time stepping for the radial solver. `crank_nicolson` uses the Numerov
/// (fourth-order compact) Laplacian and treats a jump in V without splitting
/// error; `sine_split` is Strang splitting with an exact sine-transform
/// kinetic step, exact for free evolution but needing dt ~ h^2 at a jump.
enum class RadialScheme { crank_nicolson, sine_split };

/// Box and propagation parameters for the radial solver of
/// i dT psi = (-2 Delta + V) psi, with u = r psi.
struct RelativeSetup {
  double radius = 400.0;
  double spacing = 0.025;
  double plateau = 150.0;  // initial data is flat up to here
  double ramp = 150.0;     // smooth cutoff width beyond the plateau
  double absorb_fraction = 0.15;
  double absorb_strength = 0.5;
  double dt = 0.000625;
  double reference_dt = 0.01;  // step of the free companion run
  double window = 2.0;         // |X| <= window for warnings and sup-norms
  RadialScheme scheme = RadialScheme::crank_nicolson;

  void validate() const;
  RadialGrid grid() const;
};

/// Smooth cutoff: 1 up to `plateau`, 0 beyond plateau + ramp.
double plateau_cutoff(double r, const RelativeSetup& s);

struct RelativeTrajectory {
  RadialGrid grid;
  std::vector<double> times;
  std::vector<std::vector<cplx>> u;  // u = r psi on all nodes, index 0 is the origin
  double boundary_deviation = 0.0;   // free-run sup |psi - 1| over the window
  bool box_too_small = false;        // boundary_deviation > 1e-3
};

/// Propagates `u0` (nodes 0..M of setup.grid()) and records at each of
/// `times`, which must be nonnegative and increasing. Times are rounded to
/// whole steps.
std::vector<std::vector<cplx>> propagate_radial(const PotentialSpec& v, std::vector<cplx> u0,
                                                std::span<const double> times, const RelativeSetup& setup);

/// Flat initial data psi = 1 with the plateau cutoff, evolved under V. The
/// free companion run (sine_split at reference_dt, exact for V = 0 away from
/// the absorbing layer) measures contamination from the box edge.
RelativeTrajectory evolve_relative(const PotentialSpec& v, std::span<const double> times,
                                   const RelativeSetup& setup);

/// 4 pi int_0^window |d/dr (psi / f)|^2 r^2 dr with psi given as u = r psi on
/// the nodes of `g`; `window` must lie on a node.
double correlation_functional(std::span<const cplx> u, const RadialGrid& g, const ScatteringSolution& f,
                              double window);

/// Sup over 0 < r <= window of |u / r - target(r)|.
double window_sup(std::span<const cplx> u, const RadialGrid& g, double window,
                  const std::function<double(double)>& target);

struct CorrelationReport {
  std::vector<double> times;
  double window = 0.0;
  std::vector<double> f_values;
  std::vector<double> bounds;     // (log T)^6 / T * window^3
  std::vector<double> sup_omega;  // sup over the window of |psi_T - f|
  double f0 = 0.0;
  double boundary_deviation = 0.0;
  bool box_too_small = false;
};

/// (log T)^6 / T * window^3, the expected decay envelope of F; 0 at T = 1.
double correlation_bound(double t, double window);

CorrelationReport correlation_study(const PotentialSpec& v, std::span<const double> times,
                                    const RelativeSetup& setup);

struct DispersionReport {
  std::vector<double> times;
  std::vector<double> sup_norms;
  double exponent = 0.0;
  double fit_residual = 0.0;
  double boundary_deviation = 0.0;
  bool box_too_small = false;
};

/// Free evolution of omega = 1 - f (with the a0/r tail, cut off like the flat
/// data) and its sup-norm over the window; the exponent is fitted over the
/// times in [fit_lo, fit_hi]. Free runs always use sine_split at reference_dt.
DispersionReport dispersion_decay(const ScatteringSolution& f, std::span<const double> times,
                                  const RelativeSetup& setup, double fit_lo = 1.0, double fit_hi = 100.0);

}  // namespace effdyn
