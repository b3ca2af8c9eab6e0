#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace effdyn {

using cplx = std::complex<double>;

/// Periodic box [-L/2, L/2) sampled at M equispaced points.
class UniformGrid {
 public:
  UniformGrid(double extent, std::size_t points);

  double extent() const noexcept { return extent_; }
  std::size_t size() const noexcept { return points_; }
  double spacing() const noexcept { return spacing_; }

  double x(std::size_t i) const noexcept {
    return -0.5 * extent_ + static_cast<double>(i) * spacing_;
  }
  /// Wavenumber of FFT bin i; covers (2pi/L) * {-M/2, ..., M/2-1}.
  double wavenumber(std::size_t i) const noexcept;

  std::vector<double> positions() const;
  std::vector<double> wavenumbers() const;

  friend bool operator==(const UniformGrid& a, const UniformGrid& b) noexcept {
    return a.extent_ == b.extent_ && a.points_ == b.points_;
  }

 private:
  double extent_;
  std::size_t points_;
  double spacing_;
};

/// Nodes r_j = j R/M, j = 1..M. Index 0 denotes the origin r = 0 and is
/// carried by solvers as a boundary slot, so arrays over the grid have M+1
/// entries.
class RadialGrid {
 public:
  RadialGrid(double radius, std::size_t points);

  double radius() const noexcept { return radius_; }
  std::size_t size() const noexcept { return points_; }
  double spacing() const noexcept { return radius_ / static_cast<double>(points_); }
  double r(std::size_t j) const noexcept {
    return j == points_ ? radius_ : static_cast<double>(j) * spacing();
  }

  friend bool operator==(const RadialGrid& a, const RadialGrid& b) noexcept {
    return a.radius_ == b.radius_ && a.points_ == b.points_;
  }

 private:
  double radius_;
  std::size_t points_;
};

/// One-particle wave function on a UniformGrid.
class ComplexField {
 public:
  explicit ComplexField(UniformGrid grid);
  ComplexField(UniformGrid grid, std::vector<cplx> values);

  const UniformGrid& grid() const noexcept { return grid_; }
  std::span<cplx> values() noexcept { return values_; }
  std::span<const cplx> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }

  ComplexField& operator*=(cplx s);

 private:
  UniformGrid grid_;
  std::vector<cplx> values_;
};

/// Field whose Fourier coefficients are -k^2 times those of f.
ComplexField spectral_laplacian(const ComplexField& f);

/// h * sum conj(f) g.
cplx inner_product(const ComplexField& f, const ComplexField& g);

double norm(const ComplexField& f);

/// Same pairing evaluated from the discrete Fourier coefficients.
cplx inner_product_spectral(const ComplexField& f, const ComplexField& g);

/// Sampled normalized Gaussian packet exp(-(x-x0)^2/(4 s^2) + i p x),
/// renormalized on the grid.
ComplexField gaussian_packet(const UniformGrid& grid, double center, double width,
                             double momentum = 0.0);

/// Constant L^{-1/2} on the box.
ComplexField constant_field(const UniformGrid& grid);

}  // namespace effdyn
