#pragma once

// FFTW-backed transforms shared by the calculus and linear-solve code. Not a
// public header.

#include "pcsc/grid.hpp"

#include <complex>
#include <memory>
#include <vector>

namespace pcsc::detail {

using Spectrum = std::vector<std::complex<double>>;

class SpectralPlan {
 public:
  SpectralPlan(int d, int N);
  ~SpectralPlan();
  SpectralPlan(const SpectralPlan&) = delete;
  SpectralPlan& operator=(const SpectralPlan&) = delete;

  std::size_t real_size() const noexcept { return real_size_; }
  std::size_t spectral_size() const noexcept { return spectral_size_; }

  Spectrum forward(const Eigen::VectorXd& values) const;
  /// Normalized inverse; `spec` is consumed.
  Eigen::VectorXd inverse(Spectrum spec) const;

  /// (2π)^2 |k|^2 per coefficient, Nyquist frequencies included.
  const std::vector<double>& laplacian_symbol() const noexcept { return lap_; }
  /// 2π k_axis per coefficient with the Nyquist frequency zeroed, so odd
  /// derivatives stay real and antisymmetric.
  const std::vector<double>& derivative_symbol(int axis) const { return deriv_.at(std::size_t(axis)); }

 private:
  int d_;
  int N_;
  std::size_t real_size_;
  std::size_t spectral_size_;
  void* forward_plan_;
  void* inverse_plan_;
  std::vector<double> lap_;
  std::vector<std::vector<double>> deriv_;
};

/// Shared, thread-safe plan cache keyed by (d, N).
std::shared_ptr<const SpectralPlan> plan_for(const TorusGrid& grid);

}  // namespace pcsc::detail
