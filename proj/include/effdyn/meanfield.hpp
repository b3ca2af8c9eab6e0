#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "effdyn/grid.hpp"
#include "effdyn/potentials.hpp"

namespace effdyn {

/// Strang splitting parameters shared by the one-particle and N-body solvers.
struct EvolutionConfig {
  double dt = 1e-3;
  std::size_t steps = 1;
  /// Snapshot period in steps; 0 records only the first and last state.
  std::size_t record_every = 0;
  /// Abort when |norm - norm0| exceeds this.
  double norm_tolerance = 1e-6;
  /// Abort when |E - E0| / |E0| exceeds this at a recorded step.
  double energy_tolerance = std::numeric_limits<double>::infinity();

  void validate() const;
  double final_time() const { return dt * static_cast<double>(steps); }
  bool records(std::size_t step) const {
    return step == 0 || step == steps || (record_every != 0 && step % record_every == 0);
  }
};

struct Conserved {
  double norm = 0.0;
  double energy = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ComplexField> snapshots;
  std::vector<Conserved> conserved;
};

/// i d/dt phi = -phi'' + (V * |phi|^2) phi; convolution over the periodic
/// images of V.
Trajectory evolve_hartree(const ComplexField& phi0, const ScaledPotential& v,
                          const EvolutionConfig& cfg);

/// i d/dt phi = -phi'' + 8 pi a0 |phi|^2 phi.
Trajectory evolve_gp(const ComplexField& phi0, double a0, const EvolutionConfig& cfg);

double kinetic_energy(const ComplexField& phi);

/// int |phi'|^2 + (1/2) int (V * |phi|^2) |phi|^2
double hartree_energy(const ComplexField& phi, const ScaledPotential& v);

/// int |phi'|^2 + V_ext |phi|^2 + 4 pi a0 |phi|^4
double gp_energy(const ComplexField& phi, const PotentialSpec& vext, double a0);

/// (V * |phi|^2)(x_i) = h sum_j V(x_i - x_j) |phi_j|^2 on the periodic box.
std::vector<double> mean_field_potential(const ComplexField& phi, const ScaledPotential& v);

struct Moments {
  double center = 0.0;
  double width = 0.0;  // standard deviation of |phi|^2
};
Moments moments(const ComplexField& phi);

struct GroundStateOptions {
  double initial_step = 0.05;
  double min_step = 1e-6;
  std::size_t max_iterations = 2'000'000;
};

struct GroundState {
  ComplexField phi;
  double energy = 0.0;
  /// || H phi - mu phi || with H the GP operator at phi.
  double residual = 0.0;
  std::size_t iterations = 0;
  std::vector<double> energy_history;
};

/// Imaginary-time Strang propagation with renormalization after each step.
/// Converged when the energy change per step is below tol (relative, with an
/// absolute floor of tol for energies below 1) and the residual is at most
/// 10 tol; the step is halved whenever the energy stalls before the residual
/// test passes. Numerical error after max_iterations.
GroundState gp_ground_state(const PotentialSpec& vext, double a0, const UniformGrid& g, double tol,
                            const GroundStateOptions& opts = {});

}  // namespace effdyn
