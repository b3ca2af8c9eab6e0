#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "effdyn/error.hpp"
#include "effdyn/meanfield.hpp"
#include "oracles.hpp"

using namespace effdyn;

namespace {

constexpr double kPi = std::numbers::pi;

EvolutionConfig config(double dt, std::size_t steps, std::size_t every = 0) {
  EvolutionConfig c;
  c.dt = dt;
  c.steps = steps;
  c.record_every = every;
  return c;
}

double l2_distance(const ComplexField& a, const ComplexField& b) {
  ComplexField d = a;
  for (std::size_t i = 0; i < d.size(); ++i) d[i] -= b[i];
  return norm(d);
}

ComplexField flat(const UniformGrid& g) {
  return ComplexField(g, std::vector<cplx>(g.size(), 1.0 / std::sqrt(g.extent())));
}

}  // namespace

TEST_CASE("evolution config validation") {
  CHECK_THROWS_AS(config(0.0, 10).validate(), Error);
  CHECK_THROWS_AS(config(1e-3, 0).validate(), Error);
  CHECK_THROWS_AS(config(1e-3, 10, 3).validate(), Error);
  CHECK_NOTHROW(config(1e-3, 10, 5).validate());
  const auto c = config(1e-3, 10, 5);
  CHECK(c.records(0));
  CHECK(c.records(5));
  CHECK_FALSE(c.records(4));
}

TEST_CASE("free Gaussian dispersion") {
  const UniformGrid g(40.0, 512);
  const double s = 1.0;
  const auto traj = evolve_hartree(gaussian_packet(g, 0.0, s),
                                   ScaledPotential::unscaled(ZeroPotential{}), config(1e-3, 1000));
  REQUIRE(traj.times.size() == 2);
  CHECK(traj.times.back() == doctest::Approx(1.0).epsilon(1e-14));
  const double w = moments(traj.snapshots.back()).width;
  CHECK(std::abs(w / oracle::free_gaussian_width(s, 1.0) - 1.0) <= 1e-4);
}

TEST_CASE("constant density solutions") {
  const UniformGrid g(20.0, 128);
  const double t = 0.5;
  SUBCASE("hartree") {
    const PotentialSpec v = GaussianPotential{1.0, 1.0};
    const auto traj = evolve_hartree(flat(g), ScaledPotential::unscaled(v), config(1e-3, 500));
    const double c = born_coupling(v, Dimension::one) / g.extent();
    const cplx expected = std::polar(1.0 / std::sqrt(g.extent()), -c * t);
    for (auto x : traj.snapshots.back().values()) CHECK(std::abs(x - expected) <= 1e-8);
  }
  SUBCASE("gross-pitaevskii") {
    const double a0 = 0.3;
    const auto traj = evolve_gp(flat(g), a0, config(1e-3, 500));
    const cplx expected = std::polar(1.0 / std::sqrt(g.extent()), -8 * kPi * a0 * t / g.extent());
    for (auto x : traj.snapshots.back().values()) CHECK(std::abs(x - expected) <= 1e-8);
  }
}

TEST_CASE("gp with a0 = 0 is free evolution") {
  const UniformGrid g(20.0, 128);
  const auto phi = gaussian_packet(g, 0.5, 1.0, 1.5);
  const auto a = evolve_gp(phi, 0.0, config(1e-3, 300));
  const auto b = evolve_hartree(phi, ScaledPotential::unscaled(ZeroPotential{}), config(1e-3, 300));
  CHECK(l2_distance(a.snapshots.back(), b.snapshots.back()) <= 1e-12);
}

// Strang splitting conserves a modified energy; the measured energy oscillates
// at O(dt^2), about 3e-8 relative at dt = 1e-3 for this packet.
TEST_CASE("unitarity and energy conservation over 1000 steps") {
  const UniformGrid g(16.0, 64);
  const auto phi = gaussian_packet(g, 0.0, 1.0, 1.0);
  const auto hart = evolve_hartree(phi, ScaledPotential::unscaled(GaussianPotential{1.0, 1.0}),
                                   config(2.5e-4, 1000, 100));
  const auto gp = evolve_gp(phi, 0.1, config(2.5e-4, 1000, 100));
  for (const auto* tr : {&hart, &gp}) {
    REQUIRE(tr->conserved.size() == 11);
    const auto first = tr->conserved.front();
    for (const auto& c : tr->conserved) {
      CHECK(std::abs(c.norm - first.norm) <= 1e-10);
      CHECK(std::abs(c.energy - first.energy) <= 1e-8 * std::abs(first.energy));
    }
  }
  CHECK(hart.conserved.front().energy ==
        doctest::Approx(hartree_energy(phi, ScaledPotential::unscaled(GaussianPotential{1.0, 1.0}))));
}

TEST_CASE("delta-kernel limit of the hartree equation") {
  const UniformGrid g(20.0, 512);
  const double a0 = 0.05, coupling = 8 * kPi * a0;
  const double sigma = 4 * g.spacing();
  const PotentialSpec narrow = GaussianPotential{coupling / (std::sqrt(2 * kPi) * sigma), sigma};
  const auto phi = gaussian_packet(g, 0.0, 1.5);
  const auto cfg = config(1e-3, 500);
  const auto a = evolve_hartree(phi, ScaledPotential::unscaled(narrow), cfg);
  const auto b = evolve_gp(phi, a0, cfg);
  CHECK(l2_distance(a.snapshots.back(), b.snapshots.back()) <= 2e-3);
}

TEST_CASE("second order in dt") {
  const UniformGrid g(16.0, 64);
  const auto phi = gaussian_packet(g, -1.0, 0.8, 2.0);
  const auto v = ScaledPotential::unscaled(GaussianPotential{4.0, 1.0});
  auto run = [&](double dt) { return evolve_hartree(phi, v, config(dt, std::llround(0.5 / dt))).snapshots.back(); };
  const auto ref = run(0.0025 / 8);
  const double e1 = l2_distance(run(0.01), ref), e2 = l2_distance(run(0.005), ref),
               e3 = l2_distance(run(0.0025), ref);
  CHECK(e1 / e2 >= 3.0);
  CHECK(e1 / e2 <= 5.0);
  CHECK(e2 / e3 >= 3.0);
  CHECK(e2 / e3 <= 5.0);
}

TEST_CASE("gauge covariance") {
  const UniformGrid g(16.0, 64);
  const auto phi = gaussian_packet(g, 0.3, 1.0, -1.0);
  auto rotated = phi;
  const cplx phase = std::polar(1.0, 0.7);
  rotated *= phase;
  const auto v = ScaledPotential::unscaled(GaussianPotential{1.0, 1.0});
  const auto a = evolve_hartree(phi, v, config(1e-3, 200)).snapshots.back();
  const auto b = evolve_hartree(rotated, v, config(1e-3, 200)).snapshots.back();
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(phase * a[i] - b[i]) <= 1e-12);
}

TEST_CASE("preconditions and drift diagnostics") {
  const UniformGrid g(16.0, 64);
  auto phi = gaussian_packet(g, 0.0, 1.0);
  phi *= 1.01;
  CHECK_THROWS_AS(evolve_gp(phi, 0.1, config(1e-3, 10)), Error);

  auto cfg = config(0.2, 20, 1);
  cfg.energy_tolerance = 1e-8;
  try {
    evolve_gp(gaussian_packet(g, 0.0, 0.3, 3.0), 5.0, cfg);
    FAIL("expected drift failure");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::numerical);
    CHECK(std::string(e.what()).find("dt too large") != std::string::npos);
  }
}

TEST_CASE("gp energy functional examples") {
  const UniformGrid g(20.0, 128);
  CHECK(std::abs(gp_energy(flat(g), ZeroPotential{}, 0.0)) <= 1e-14);
  CHECK(gp_energy(flat(g), ZeroPotential{}, 0.3) == doctest::Approx(4 * kPi * 0.3 / g.extent()).epsilon(1e-12));
  // Lowest nonzero kinetic eigenvalue of the discrete Laplacian: (2 pi / L)^2.
  ComplexField mode(g);
  const double k1 = 2 * kPi / g.extent();
  for (std::size_t i = 0; i < g.size(); ++i) mode[i] = std::polar(1.0 / std::sqrt(g.extent()), k1 * g.x(i));
  CHECK(gp_energy(mode, ZeroPotential{}, 0.0) == doctest::Approx(k1 * k1).epsilon(1e-12));
}

TEST_CASE("imaginary-time ground states") {
  SUBCASE("harmonic trap against a dense eigensolver") {
    const UniformGrid g(16.0, 64);
    const PotentialSpec trap = HarmonicTrap{1.0};
    Eigen::MatrixXd h = oracle::minus_laplacian_matrix(g);
    for (std::size_t i = 0; i < g.size(); ++i) h(i, i) += evaluate(trap, g.x(i));
    const double e0 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues()(0);
    const auto gs = gp_ground_state(trap, 0.0, g, 1e-7);
    CHECK(std::abs(gs.energy - e0) <= 1e-6);
    CHECK(std::abs(norm(gs.phi) - 1.0) <= 1e-12);
    for (std::size_t i = 1; i < gs.energy_history.size(); ++i)
      CHECK(gs.energy_history[i] <= gs.energy_history[i - 1] + 1e-12);
  }
  SUBCASE("free box gives the constant mode") {
    const UniformGrid g(10.0, 32);
    const auto gs = gp_ground_state(ZeroPotential{}, 0.0, g, 1e-10);
    CHECK(std::abs(gs.energy) <= 1e-8);
    for (auto x : gs.phi.values()) CHECK(std::abs(std::abs(x) - 1.0 / std::sqrt(10.0)) <= 1e-4);
  }
  SUBCASE("non-convergence is reported") {
    GroundStateOptions opts;
    opts.max_iterations = 5;
    CHECK_THROWS_AS(gp_ground_state(HarmonicTrap{1.0}, 0.1, UniformGrid(16.0, 64), 1e-12, opts), Error);
  }
}
