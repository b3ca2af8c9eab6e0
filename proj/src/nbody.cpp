#include "effdyn/nbody.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "effdyn/error.hpp"
#include "effdyn/fft.hpp"
#include "effdyn/format.hpp"
#include "effdyn/kernels.hpp"

namespace effdyn {

std::size_t tensor_size(std::size_t m, int n, std::size_t budget) {
  require(n >= 1, ErrorCategory::domain, "particle count must be at least 1");
  std::size_t total = 1;
  bool overflow = false;
  for (int i = 0; i < n; ++i) {
    if (total > budget / m + 1) overflow = true;
    total *= m;
  }
  if (overflow || total > budget) {
    const double bytes = std::pow(static_cast<double>(m), n) * sizeof(cplx);
    fail(ErrorCategory::resource, "amplitude budget exceeded: M^N = " + std::to_string(m) + "^" +
                                      std::to_string(n) + " needs " + format_double(bytes) +
                                      " bytes");
  }
  return total;
}

NBodyState::NBodyState(UniformGrid grid, int particles, std::size_t budget)
    : grid_(grid), particles_(particles), amplitudes_(tensor_size(grid.size(), particles, budget)) {}

NBodyState::NBodyState(UniformGrid grid, int particles, std::vector<cplx> amplitudes)
    : grid_(grid), particles_(particles), amplitudes_(std::move(amplitudes)) {
  require(amplitudes_.size() == tensor_size(grid_.size(), particles_, ~std::size_t{0}),
          ErrorCategory::structural, "NBodyState: amplitude count does not match M^N");
}

std::size_t NBodyState::flat_index(std::span<const std::size_t> idx) const {
  require(idx.size() == static_cast<std::size_t>(particles_), ErrorCategory::structural,
          "NBodyState: index rank mismatch");
  std::size_t flat = 0;
  for (std::size_t i : idx) flat = flat * grid_.size() + i;
  return flat;
}

namespace {

struct PhaseOps {
  using value_type = cplx;
  static cplx identity() { return {1.0, 0.0}; }
  static cplx combine(cplx a, cplx b) { return a * b; }
  static void combine_rows(cplx* out, const cplx* a, const cplx* b, std::size_t m) {
    kernels::active().mul(out, a, b, m);
  }
};

struct SumOps {
  using value_type = double;
  static double identity() { return 0.0; }
  static double combine(double a, double b) { return a + b; }
  static void combine_rows(double* out, const double* a, const double* b, std::size_t m) {
    for (std::size_t i = 0; i < m; ++i) out[i] = a[i] + b[i];
  }
};

// Visits grid^N one contiguous last-axis row at a time for diagonals of the
// form  site(i_1) o ... o site(i_N) o prod_{c<d} pair((i_c - i_d) mod M)
// with o the combine of Ops. Outer-axis contributions are folded into a
// scalar, last-axis ones into a row vector, so each row costs O(M).
template <class Ops>
class SeparableWalk {
 public:
  using T = typename Ops::value_type;

  SeparableWalk(std::size_t m, int n, std::vector<T> site, const std::vector<T>* pair)
      : m_(m), n_(n), site_(std::move(site)), has_pair_(pair != nullptr), index_(n) {
    if (has_pair_) {
      pair_.assign(pair->begin(), pair->end());
      pair_rows_.resize(m * m);
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t l = 0; l < m; ++l) pair_rows_[a * m + l] = pair_[(a + m - l) % m];
      rows_.assign(static_cast<std::size_t>(n), std::vector<T>(m));
      rows_[0] = site_;
    }
  }

  // leaf(offset, row, scalar): row i of the diagonal starting at `offset` is
  // scalar o row[i].
  template <class Leaf>
  void run(Leaf&& leaf) {
    descend(0, 0, Ops::identity(), leaf);
  }

 private:
  template <class Leaf>
  void descend(int depth, std::size_t offset, T scalar, Leaf& leaf) {
    const T* row = has_pair_ ? rows_[static_cast<std::size_t>(depth)].data() : site_.data();
    if (depth == n_ - 1) {
      leaf(offset * m_, row, scalar);
      return;
    }
    for (std::size_t a = 0; a < m_; ++a) {
      T s = Ops::combine(scalar, site_[a]);
      if (has_pair_) {
        for (int c = 0; c < depth; ++c) s = Ops::combine(s, pair_[(index_[c] + m_ - a) % m_]);
        Ops::combine_rows(rows_[static_cast<std::size_t>(depth) + 1].data(), row,
                          pair_rows_.data() + a * m_, m_);
      }
      index_[static_cast<std::size_t>(depth)] = a;
      descend(depth + 1, offset * m_ + a, s, leaf);
    }
  }

  std::size_t m_;
  int n_;
  std::vector<T> site_;
  bool has_pair_;
  std::vector<T> pair_;
  std::vector<T> pair_rows_;
  std::vector<std::vector<T>> rows_;
  std::vector<std::size_t> index_;
};

void check_hamiltonian(const NBodyState& psi, const NBodyHamiltonian& h) {
  require(h.pair.regime == Regime::mean_field && h.pair.particles == psi.particles(),
          ErrorCategory::structural,
          "N-body pair potential must be in the mean-field regime with matching N");
}

std::vector<double> external_values(const UniformGrid& g, const NBodyHamiltonian& h) {
  std::vector<double> out(g.size(), 0.0);
  if (h.external)
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = evaluate(*h.external, g.x(i));
  return out;
}

std::vector<double> squared_wavenumbers(const UniformGrid& g) {
  auto ks = g.wavenumbers();
  for (auto& k : ks) k *= k;
  return ks;
}

double potential_expectation(const NBodyState& psi, const NBodyHamiltonian& h) {
  const auto& g = psi.grid();
  const auto pair = sample_pair_potential(h.pair, g);
  SeparableWalk<SumOps> walk(g.size(), psi.particles(), external_values(g, h), &pair);
  const cplx* data = psi.amplitudes().data();
  const auto& k = kernels::active();
  double total = 0.0;
  walk.run([&](std::size_t off, const double* row, double s) {
    total += k.weighted_abs2(data + off, row, g.size()) + s * k.sum_abs2(data + off, g.size());
  });
  return total;
}

double kinetic_expectation(const NBodyState& psi) {
  const std::size_t m = psi.grid().size();
  const int n = psi.particles();
  const auto k2 = squared_wavenumbers(psi.grid());
  const cplx* data = psi.amplitudes().data();
  const auto& k = kernels::active();
  double total = 0.0;
  std::size_t stride = psi.size() / m;  // axis 0
  std::size_t outer = 1;
  for (int axis = 0; axis < n; ++axis) {
    std::size_t batch = 1;
    while (batch * m <= 64 && stride % (batch * m) == 0) batch *= m;
    std::vector<cplx> buf(m * batch);
    LineBatchPlan plan(buf, m, batch);
    std::vector<double> weights(m * batch);
    for (std::size_t i = 0; i < m; ++i)
      std::fill_n(weights.begin() + static_cast<std::ptrdiff_t>(i * batch), batch, k2[i]);
    for (std::size_t o = 0; o < outer; ++o) {
      const cplx* slab = data + o * m * stride;
      for (std::size_t b0 = 0; b0 < stride; b0 += batch) {
        for (std::size_t i = 0; i < m; ++i)
          std::copy_n(slab + i * stride + b0, batch, buf.begin() + static_cast<std::ptrdiff_t>(i * batch));
        plan.forward();
        total += k.weighted_abs2(buf.data(), weights.data(), buf.size());
      }
    }
    stride /= m;
    outer *= m;
  }
  return total / static_cast<double>(m);
}

double weight(const NBodyState& psi) {
  return std::pow(psi.grid().spacing(), psi.particles());
}

}  // namespace

NBodyState product_state(const ComplexField& phi, int n, std::size_t budget) {
  require(std::abs(norm(phi) - 1.0) <= 1e-8, ErrorCategory::domain,
          "product_state: the orbital must be normalized");
  NBodyState psi(phi.grid(), n, budget);
  const std::size_t m = phi.size();
  std::vector<cplx> site(phi.values().begin(), phi.values().end());
  SeparableWalk<PhaseOps> walk(m, n, site, nullptr);
  cplx* data = psi.amplitudes().data();
  walk.run([&](std::size_t off, const cplx* row, cplx s) {
    for (std::size_t i = 0; i < m; ++i) data[off + i] = s * row[i];
  });
  return psi;
}

cplx inner_product(const NBodyState& a, const NBodyState& b) {
  require(a.grid() == b.grid() && a.particles() == b.particles(), ErrorCategory::structural,
          "N-body states live on different spaces");
  return weight(a) * kernels::active().dot(a.amplitudes().data(), b.amplitudes().data(), a.size());
}

double norm(const NBodyState& psi) {
  return std::sqrt(weight(psi) * kernels::active().sum_abs2(psi.amplitudes().data(), psi.size()));
}

NBodyState apply_hamiltonian(const NBodyState& psi, const NBodyHamiltonian& h) {
  check_hamiltonian(psi, h);
  const auto& g = psi.grid();
  const std::size_t m = g.size();
  const int n = psi.particles();
  const auto& k = kernels::active();

  NBodyState out = psi;
  {
    FftPlan plan(out.amplitudes(), m, n);
    plan.forward();
    SeparableWalk<SumOps> kin(m, n, squared_wavenumbers(g), nullptr);
    cplx* data = out.amplitudes().data();
    kin.run([&](std::size_t off, const double* row, double s) {
      k.real_diag_apply(data + off, data + off, row, s, m);
    });
    plan.backward();
    k.scale(data, 1.0 / static_cast<double>(out.size()), out.size());
  }

  const auto pair = sample_pair_potential(h.pair, g);
  SeparableWalk<SumOps> pot(m, n, external_values(g, h), &pair);
  std::vector<cplx> tmp(m);
  const cplx* in = psi.amplitudes().data();
  cplx* data = out.amplitudes().data();
  pot.run([&](std::size_t off, const double* row, double s) {
    k.real_diag_apply(tmp.data(), in + off, row, s, m);
    for (std::size_t i = 0; i < m; ++i) data[off + i] += tmp[i];
  });
  return out;
}

NBodyEnergy nbody_energy(const NBodyState& psi, const NBodyHamiltonian& h) {
  check_hamiltonian(psi, h);
  const double e = weight(psi) * (kinetic_expectation(psi) + potential_expectation(psi, h));
  return {e, e / static_cast<double>(psi.particles())};
}

double symmetry_residual(const NBodyState& psi, std::mt19937_64& rng, std::size_t samples) {
  const int n = psi.particles();
  if (n < 2) return 0.0;
  const std::size_t m = psi.grid().size();
  double peak = 0.0;
  for (const auto& a : psi.amplitudes()) peak = std::max(peak, std::abs(a));
  if (peak == 0.0) return 0.0;
  std::uniform_int_distribution<std::size_t> pick_site(0, m - 1);
  std::uniform_int_distribution<int> pick_axis(0, n - 1);
  std::vector<std::size_t> idx(static_cast<std::size_t>(n));
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& i : idx) i = pick_site(rng);
    const int a = pick_axis(rng);
    int b = pick_axis(rng);
    if (b == a) b = (a + 1) % n;
    const cplx before = psi.at(idx);
    std::swap(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    worst = std::max(worst, std::abs(before - psi.at(idx)));
  }
  return worst / peak;
}

NBodyRun evolve_nbody(NBodyState psi, const NBodyHamiltonian& h, const EvolutionConfig& cfg,
                      const NBodyObserver& observer) {
  cfg.validate();
  check_hamiltonian(psi, h);
  require(std::abs(norm(psi) - 1.0) <= 1e-8, ErrorCategory::domain,
          "evolve_nbody: initial state must be normalized");
  const auto& g = psi.grid();
  const std::size_t m = g.size();
  const int n = psi.particles();
  const double inv_m = 1.0 / static_cast<double>(m);

  std::vector<cplx> half(m), full(m), trap(m);
  const auto k2 = squared_wavenumbers(g);
  for (std::size_t i = 0; i < m; ++i) {
    // One factor 1/M per axis undoes the unnormalized transform pair.
    half[i] = std::polar(inv_m, -0.5 * cfg.dt * k2[i]);
    full[i] = std::polar(inv_m, -cfg.dt * k2[i]);
  }
  const auto ext = external_values(g, h);
  for (std::size_t i = 0; i < m; ++i) trap[i] = std::polar(1.0, -cfg.dt * ext[i]);
  std::vector<cplx> pair_phase(m);
  {
    const auto pair = sample_pair_potential(h.pair, g);
    for (std::size_t i = 0; i < m; ++i) pair_phase[i] = std::polar(1.0, -cfg.dt * pair[i]);
  }

  SeparableWalk<PhaseOps> half_kin(m, n, half, nullptr);
  SeparableWalk<PhaseOps> full_kin(m, n, full, nullptr);
  SeparableWalk<PhaseOps> potential(m, n, trap, &pair_phase);
  const auto& k = kernels::active();
  cplx* data = psi.amplitudes().data();
  auto multiply = [&](SeparableWalk<PhaseOps>& walk) {
    walk.run([&](std::size_t off, const cplx* row, cplx s) {
      k.mul_scaled_inplace(data + off, row, s, m);
    });
  };

  FftPlan plan(psi.amplitudes(), m, n);
  NBodyRun run{std::move(psi), {}};
  // `data` and `plan` keep pointing at the moved-from buffer's storage, which
  // the vector move transfers unchanged.
  const NBodyState& state = run.final_state;

  auto record = [&](std::size_t step) {
    const double t = cfg.dt * static_cast<double>(step);
    const double nrm = norm(state);
    const double e = nbody_energy(state, h).total;
    run.records.push_back({t, nrm, e});
    const auto& first = run.records.front();
    if (!(std::abs(nrm - first.norm) <= cfg.norm_tolerance))
      fail(ErrorCategory::numerical, "N-body norm drift " + format_double(nrm - first.norm) +
                                         " at step " + std::to_string(step) + " (t = " +
                                         format_double(t) + ")");
    const double rel = std::abs(e - first.energy) / std::max(std::abs(first.energy), 1e-300);
    if (std::isfinite(cfg.energy_tolerance) && !(rel <= cfg.energy_tolerance))
      fail(ErrorCategory::numerical, "N-body relative energy drift " + format_double(rel) +
                                         " at step " + std::to_string(step) + " (t = " +
                                         format_double(t) + ")");
    if (observer) observer(t, state);
  };

  record(0);
  plan.forward();
  multiply(half_kin);
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    plan.backward();
    multiply(potential);
    plan.forward();
    if (cfg.records(step)) {
      multiply(half_kin);
      plan.backward();
      record(step);
      if (step < cfg.steps) {
        plan.forward();
        multiply(half_kin);
      }
    } else {
      multiply(full_kin);
    }
  }
  return run;
}

}  // namespace effdyn
