#pragma once

#include <memory>
#include <span>
#include <vector>

#include "qhydro/grid.hpp"

namespace qhydro {

/// In-place complex FFT over every active axis of a grid.
///
/// Plans are created once per grid shape and shared; executing a plan is
/// thread-safe. inverse() includes the 1/N normalization, so
/// inverse(forward(f)) == f to rounding.
class Fourier {
 public:
  explicit Fourier(const GridSpec& grid);

  void forward(std::span<cplx> data) const;
  void inverse(std::span<cplx> data) const;

  const GridSpec& grid() const { return grid_; }

 private:
  struct Plans;
  GridSpec grid_;
  std::shared_ptr<const Plans> plans_;
};

// Angular wavenumbers along one axis in FFT order.
std::vector<double> wavenumbers(const GridSpec& grid, int axis);

// Squared wavenumber magnitude per FFT-ordered flat index.
std::vector<double> wavenumber_squared(const GridSpec& grid);

RealField partial(const RealField& f, int axis);
ComplexField partial(const ComplexField& f, int axis);

std::vector<RealField> gradient(const RealField& f);
std::vector<ComplexField> gradient(const ComplexField& f);

RealField laplacian(const RealField& f);
ComplexField laplacian(const ComplexField& f);

RealField divergence(std::span<const RealField> components);

/// Pointwise |Δf + k²f|.
RealField helmholtz_residual(const ComplexField& f, double k);

}  // namespace qhydro
