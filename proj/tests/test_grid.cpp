#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "effdyn/error.hpp"
#include "effdyn/grid.hpp"
#include "oracles.hpp"

using namespace effdyn;

namespace {
constexpr double kPi = std::numbers::pi;

double max_abs(std::span<const cplx> v) {
  double m = 0.0;
  for (auto x : v) m = std::max(m, std::abs(x));
  return m;
}
}  // namespace

TEST_CASE("uniform grid invariants") {
  CHECK_THROWS_AS(UniformGrid(10.0, 7), Error);
  CHECK_THROWS_AS(UniformGrid(10.0, 2), Error);
  CHECK_THROWS_AS(UniformGrid(-1.0, 8), Error);
  for (double L : {16.0, 20.0, 40.0})
    for (std::size_t m : {32u, 128u, 256u, 512u}) {
      const UniformGrid g(L, m);
      CHECK(g.spacing() * static_cast<double>(m) == L);
    }
  const UniformGrid g(16.0, 32);
  CHECK(g.wavenumber(0) == 0.0);
  CHECK(g.wavenumber(16) == doctest::Approx(-16 * 2 * kPi / 16.0));
  CHECK(g.wavenumber(15) == doctest::Approx(15 * 2 * kPi / 16.0));
  CHECK(g.x(0) == -8.0);
}

TEST_CASE("radial grid nodes") {
  const RadialGrid r(10.0, 1000);
  CHECK(r.r(1) > 0.0);
  CHECK(r.r(1000) == 10.0);
  for (std::size_t j = 1; j < 1000; ++j) CHECK(r.r(j + 1) > r.r(j));
}

TEST_CASE("field size must match grid") {
  CHECK_THROWS_AS(ComplexField(UniformGrid(10.0, 8), std::vector<cplx>(7)), Error);
  const ComplexField a(UniformGrid(10.0, 8)), b(UniformGrid(12.0, 8));
  CHECK_THROWS_AS(inner_product(a, b), Error);
}

TEST_CASE("spectral laplacian examples") {
  const UniformGrid g(20.0, 64);
  SUBCASE("constant is in the kernel") {
    const ComplexField c(g, std::vector<cplx>(g.size(), {2.5, -1.0}));
    CHECK(max_abs(spectral_laplacian(c).values()) <= 1e-12);
  }
  SUBCASE("Fourier modes are eigenfunctions, Nyquist included") {
    for (int q : {1, 5, -7, 31, -32}) {
      const double k0 = 2 * kPi * q / g.extent();
      ComplexField f(g);
      for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::polar(1.0, k0 * g.x(i));
      const auto lap = spectral_laplacian(f);
      double err = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(lap[i] + k0 * k0 * f[i]));
      CHECK(err <= 1e-12 * k0 * k0);
    }
  }
  SUBCASE("Gaussian: beats the centered difference, which is O(h^2)") {
    const UniformGrid fine(20.0, 256);
    const double s = 1.0;
    auto gauss = [&](double x) { return std::exp(-x * x / (2 * s * s)); };
    auto exact = [&](double x) { return (x * x / (s * s * s * s) - 1.0 / (s * s)) * gauss(x); };
    double spectral_err = 0.0, fd_err = 0.0, fd_err_coarse = 0.0;
    for (const UniformGrid* grid : {&fine}) {
      ComplexField f(*grid);
      for (std::size_t i = 0; i < grid->size(); ++i) f[i] = gauss(grid->x(i));
      const auto lap = spectral_laplacian(f);
      const auto fd = oracle::fd_second_derivative(f);
      for (std::size_t i = 0; i < grid->size(); ++i) {
        spectral_err = std::max(spectral_err, std::abs(lap[i] - exact(grid->x(i))));
        fd_err = std::max(fd_err, std::abs(fd[i] - exact(grid->x(i))));
      }
    }
    const UniformGrid coarse(20.0, 128);
    ComplexField fc(coarse);
    for (std::size_t i = 0; i < coarse.size(); ++i) fc[i] = gauss(coarse.x(i));
    const auto fdc = oracle::fd_second_derivative(fc);
    for (std::size_t i = 0; i < coarse.size(); ++i)
      fd_err_coarse = std::max(fd_err_coarse, std::abs(fdc[i] - exact(coarse.x(i))));
    CHECK(fd_err_coarse / fd_err == doctest::Approx(4.0).epsilon(0.05));
    CHECK(spectral_err < 1e-3 * fd_err);
    CHECK(spectral_err <= 1e-10);
  }
}

TEST_CASE("inner product and norm examples") {
  const UniformGrid g(20.0, 256);
  std::mt19937_64 rng(3);
  const auto f = oracle::random_field(g, rng);
  const cplx ff = inner_product(f, f);
  CHECK(ff.real() >= 0.0);
  CHECK(std::abs(ff.imag()) <= 1e-14 * ff.real());

  ComplexField a(g), b(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    a[i] = std::polar(1.0, 2 * kPi * 3 / g.extent() * g.x(i));
    b[i] = std::polar(1.0, 2 * kPi * -5 / g.extent() * g.x(i));
  }
  CHECK(std::abs(inner_product(a, b)) <= 1e-12 * norm(a) * norm(b));

  // (2 pi s^2)^{-1/4} exp(-x^2 / 4 s^2) has unit L2 norm on the line.
  ComplexField gauss(g);
  const double s = 1.3;
  for (std::size_t i = 0; i < g.size(); ++i)
    gauss[i] = std::pow(2 * kPi * s * s, -0.25) * std::exp(-g.x(i) * g.x(i) / (4 * s * s));
  CHECK(std::abs(inner_product(gauss, gauss) - 1.0) <= 1e-10);
  CHECK(std::abs(norm(gaussian_packet(g, 1.0, 0.8, 2.0)) - 1.0) <= 1e-10);

  CHECK(norm(ComplexField(g)) == 0.0);
  ComplexField scaled = f;
  scaled *= cplx(3.0, -4.0);
  CHECK(norm(scaled) == doctest::Approx(5.0 * norm(f)).epsilon(1e-14));
}

TEST_CASE("Parseval, self-adjointness and sign of the laplacian on random fields") {
  std::mt19937_64 rng(2024);
  for (std::size_t m : {16u, 64u, 256u}) {
    const UniformGrid g(13.0, m);
    for (int trial = 0; trial < 5; ++trial) {
      const auto f = oracle::random_field(g, rng), h = oracle::random_field(g, rng);
      const cplx pos = inner_product(f, h), spectral = inner_product_spectral(f, h);
      CHECK(std::abs(pos - spectral) <= 1e-12 * norm(f) * norm(h));

      const auto lf = spectral_laplacian(f), lh = spectral_laplacian(h);
      CHECK(std::abs(inner_product(lf, h) - inner_product(f, lh)) <= 1e-10 * norm(f) * norm(h));
      CHECK(inner_product(f, lf).real() <= 1e-12 * norm(f) * norm(f));
    }
  }
}
