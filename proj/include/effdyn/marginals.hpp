#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>

#include "effdyn/grid.hpp"
#include "effdyn/meanfield.hpp"
#include "effdyn/nbody.hpp"
#include "effdyn/potentials.hpp"

namespace effdyn {

/// k-particle reduced density matrix on a periodic grid.
///
/// `kernel(a, b)` holds the plain kernel value gamma(x_a; x'_b), where a and b
/// are row-major flat indices over k grid coordinates. The operator it
/// represents is h^k * kernel: traces, norms and eigenvalues all carry the
/// h^k factor explicitly.
struct ReducedDensity {
  int k = 1;
  UniformGrid grid;
  Eigen::MatrixXcd kernel;

  double weight() const;  // h^k
};

ReducedDensity reduce(const NBodyState& psi, int k, std::size_t budget = kDefaultAmplitudeBudget);
ReducedDensity rank_one_projector(const ComplexField& phi, int k);
ReducedDensity partial_trace_last(const ReducedDensity& rho);

double trace(const ReducedDensity& rho);
double trace_norm_distance(const ReducedDensity& a, const ReducedDensity& b);

struct DensityInvariants {
  double hermiticity = 0.0;  // ||K - K^*|| / ||K||
  double min_eigenvalue = 0.0;
  double trace = 0.0;
  double exchange_asymmetry = 0.0;  // max over adjacent transpositions, relative
};

DensityInvariants check_invariants(const ReducedDensity& rho);

/// Marginals sampled at t - delta, t, t + delta. `higher` is the (k+1)-th
/// marginal at the middle time; leaving it empty means it vanishes, the
/// convention for k = N.
struct HierarchySnapshots {
  std::array<double, 3> times{};
  std::array<ReducedDensity, 3> gamma;
  std::optional<ReducedDensity> higher;
};

/// Hilbert-Schmidt norm of i d/dt gamma - RHS for the finite-N hierarchy with
/// the mean-field Hamiltonian built from the unscaled pair potential `v`.
double bbgky_residual(const HierarchySnapshots& s, const PotentialSpec& v, int n);

/// Same residual for the N -> infinity hierarchy evaluated on factorized
/// marginals |phi_t><phi_t|^k built from three consecutive trajectory records
/// centered at `mid`.
double infinite_hierarchy_check(const Trajectory& traj, std::size_t mid, const PotentialSpec& v, int k);

}  // namespace effdyn
