#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "effdyn/grid.hpp"
#include "effdyn/meanfield.hpp"
#include "effdyn/potentials.hpp"

namespace effdyn {

inline constexpr std::size_t kDefaultAmplitudeBudget = std::size_t{1} << 30;

/// M^N, or a resource error naming the bytes required when it exceeds budget.
std::size_t tensor_size(std::size_t m, int n, std::size_t budget = kDefaultAmplitudeBudget);

/// Dense amplitudes of an N-boson wave function on grid^N, row-major with
/// particle 1 the slowest index.
class NBodyState {
 public:
  NBodyState(UniformGrid grid, int particles, std::size_t budget = kDefaultAmplitudeBudget);
  NBodyState(UniformGrid grid, int particles, std::vector<cplx> amplitudes);

  const UniformGrid& grid() const noexcept { return grid_; }
  int particles() const noexcept { return particles_; }
  std::size_t size() const noexcept { return amplitudes_.size(); }
  std::span<cplx> amplitudes() noexcept { return amplitudes_; }
  std::span<const cplx> amplitudes() const noexcept { return amplitudes_; }

  std::size_t flat_index(std::span<const std::size_t> idx) const;
  cplx& at(std::span<const std::size_t> idx) { return amplitudes_[flat_index(idx)]; }
  cplx at(std::span<const std::size_t> idx) const { return amplitudes_[flat_index(idx)]; }

 private:
  UniformGrid grid_;
  int particles_;
  std::vector<cplx> amplitudes_;
};

/// H = sum_j -Delta_j + sum_{i<j} v(x_i - x_j) + sum_j V_ext(x_j), with v the
/// pair potential in the mean-field regime (1/N) V.
struct NBodyHamiltonian {
  ScaledPotential pair;
  std::optional<PotentialSpec> external;

  static NBodyHamiltonian mean_field(PotentialSpec v, int n,
                                     std::optional<PotentialSpec> external = std::nullopt) {
    return {ScaledPotential::mean_field(std::move(v), n), std::move(external)};
  }
};

NBodyState product_state(const ComplexField& phi, int n,
                         std::size_t budget = kDefaultAmplitudeBudget);

/// h^N sum conj(a) b
cplx inner_product(const NBodyState& a, const NBodyState& b);
double norm(const NBodyState& psi);

NBodyState apply_hamiltonian(const NBodyState& psi, const NBodyHamiltonian& h);

struct NBodyEnergy {
  double total = 0.0;
  double per_particle = 0.0;
};

/// real <psi, H psi>, evaluated line by line without a full-size temporary.
NBodyEnergy nbody_energy(const NBodyState& psi, const NBodyHamiltonian& h);

/// Largest |psi(..i..j..) - psi(..j..i..)| over `samples` random index tuples
/// and transpositions, relative to max |psi|.
double symmetry_residual(const NBodyState& psi, std::mt19937_64& rng, std::size_t samples = 4096);

struct NBodyRecord {
  double time = 0.0;
  double norm = 0.0;
  double energy = 0.0;
};

struct NBodyRun {
  NBodyState final_state;
  std::vector<NBodyRecord> records;
};

/// Called at every recorded step with the state in position space.
using NBodyObserver = std::function<void(double time, const NBodyState& psi)>;

/// Strang splitting: kinetic factors applied in Fourier space along every
/// axis, the pair/trap phase as a diagonal. Norm and energy are checked
/// against cfg tolerances at every recorded step; drift aborts with a
/// numerical error naming the step.
NBodyRun evolve_nbody(NBodyState psi0, const NBodyHamiltonian& h, const EvolutionConfig& cfg,
                      const NBodyObserver& observer = {});

}  // namespace effdyn
