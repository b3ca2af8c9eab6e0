#include "effdyn/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "effdyn/error.hpp"
#include "effdyn/fft.hpp"
#include "effdyn/kernels.hpp"

namespace effdyn {

UniformGrid::UniformGrid(double extent, std::size_t points)
    : extent_(extent), points_(points), spacing_(extent / static_cast<double>(points)) {
  require(std::isfinite(extent) && extent > 0.0, ErrorCategory::domain,
          "UniformGrid: extent must be positive");
  require(points >= 4 && points % 2 == 0, ErrorCategory::domain,
          "UniformGrid: point count must be even and at least 4, got " + std::to_string(points));
}

double UniformGrid::wavenumber(std::size_t i) const noexcept {
  const auto m = static_cast<long long>(points_);
  auto j = static_cast<long long>(i);
  if (j >= m / 2) j -= m;
  return 2.0 * std::numbers::pi / extent_ * static_cast<double>(j);
}

std::vector<double> UniformGrid::positions() const {
  std::vector<double> xs(points_);
  for (std::size_t i = 0; i < points_; ++i) xs[i] = x(i);
  return xs;
}

std::vector<double> UniformGrid::wavenumbers() const {
  std::vector<double> ks(points_);
  for (std::size_t i = 0; i < points_; ++i) ks[i] = wavenumber(i);
  return ks;
}

RadialGrid::RadialGrid(double radius, std::size_t points) : radius_(radius), points_(points) {
  require(std::isfinite(radius) && radius > 0.0, ErrorCategory::domain,
          "RadialGrid: radius must be positive");
  require(points >= 2, ErrorCategory::domain, "RadialGrid: need at least two nodes");
}

ComplexField::ComplexField(UniformGrid grid) : grid_(grid), values_(grid.size()) {}

ComplexField::ComplexField(UniformGrid grid, std::vector<cplx> values)
    : grid_(grid), values_(std::move(values)) {
  require(values_.size() == grid_.size(), ErrorCategory::structural,
          "ComplexField: " + std::to_string(values_.size()) + " values for a grid of " +
              std::to_string(grid_.size()) + " points");
}

ComplexField& ComplexField::operator*=(cplx s) {
  for (auto& v : values_) v *= s;
  return *this;
}

namespace {

void check_field(const ComplexField& f) {
  require(f.size() == f.grid().size(), ErrorCategory::structural,
          "field size does not match its grid");
}

void check_same_grid(const ComplexField& f, const ComplexField& g) {
  check_field(f);
  check_field(g);
  require(f.grid() == g.grid(), ErrorCategory::structural, "fields live on different grids");
}

std::vector<cplx> transformed(const ComplexField& f) {
  std::vector<cplx> buf(f.values().begin(), f.values().end());
  FftPlan plan(buf, buf.size());
  plan.forward();
  return buf;
}

}  // namespace

ComplexField spectral_laplacian(const ComplexField& f) {
  check_field(f);
  const auto& grid = f.grid();
  const std::size_t m = grid.size();
  std::vector<cplx> buf(f.values().begin(), f.values().end());
  FftPlan plan(buf, m);
  plan.forward();
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double k = grid.wavenumber(i);
    buf[i] *= -k * k * inv_m;
  }
  plan.backward();
  return ComplexField(grid, std::move(buf));
}

cplx inner_product(const ComplexField& f, const ComplexField& g) {
  check_same_grid(f, g);
  return f.grid().spacing() * kernels::active().dot(f.values().data(), g.values().data(), f.size());
}

double norm(const ComplexField& f) {
  check_field(f);
  return std::sqrt(f.grid().spacing() * kernels::active().sum_abs2(f.values().data(), f.size()));
}

cplx inner_product_spectral(const ComplexField& f, const ComplexField& g) {
  check_same_grid(f, g);
  const auto a = transformed(f);
  const auto b = transformed(g);
  const double m = static_cast<double>(f.size());
  return f.grid().spacing() / m * kernels::active().dot(a.data(), b.data(), a.size());
}

ComplexField gaussian_packet(const UniformGrid& grid, double center, double width,
                             double momentum) {
  require(width > 0.0, ErrorCategory::domain, "gaussian_packet: width must be positive");
  ComplexField f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    const double d = x - center;
    f[i] = std::exp(-d * d / (4.0 * width * width)) * std::polar(1.0, momentum * x);
  }
  f *= 1.0 / norm(f);
  return f;
}

ComplexField constant_field(const UniformGrid& grid) {
  return ComplexField(grid, std::vector<cplx>(grid.size(), 1.0 / std::sqrt(grid.extent())));
}

}  // namespace effdyn
