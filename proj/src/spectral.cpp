#include "spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace pcsc::detail {

namespace {

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

SpectralPlan::SpectralPlan(int d, int N) : d_(d), N_(N), real_size_(1), spectral_size_(1) {
  std::vector<int> dims(std::size_t(d), N);
  for (int k = 0; k < d; ++k) real_size_ *= std::size_t(N);
  spectral_size_ = real_size_ / std::size_t(N) * std::size_t(N / 2 + 1);

  std::vector<double> rbuf(real_size_);
  std::vector<std::complex<double>> cbuf(spectral_size_);
  auto* cptr = reinterpret_cast<fftw_complex*>(cbuf.data());
  {
    // Plan creation is the only non-reentrant part of FFTW.
    std::lock_guard lock(fftw_mutex());
    forward_plan_ = fftw_plan_dft_r2c(d, dims.data(), rbuf.data(), cptr,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    inverse_plan_ = fftw_plan_dft_c2r(d, dims.data(), cptr, rbuf.data(),
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
  }

  const double two_pi = 2.0 * std::numbers::pi;
  const int half = N / 2 + 1;
  lap_.resize(spectral_size_);
  deriv_.assign(std::size_t(d), std::vector<double>(spectral_size_));
  for (std::size_t j = 0; j < spectral_size_; ++j) {
    std::size_t rest = j;
    double ksq = 0.0;
    for (int axis = d - 1; axis >= 0; --axis) {
      const int extent = axis == d - 1 ? half : N;
      const int i = int(rest % std::size_t(extent));
      rest /= std::size_t(extent);
      const int k = (axis == d - 1 || i <= N / 2) ? i : i - N;
      const bool nyquist = std::abs(k) == N / 2;
      ksq += double(k) * double(k);
      deriv_[std::size_t(axis)][j] = nyquist ? 0.0 : two_pi * k;
    }
    lap_[j] = two_pi * two_pi * ksq;
  }
}

SpectralPlan::~SpectralPlan() {
  std::lock_guard lock(fftw_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

Spectrum SpectralPlan::forward(const Eigen::VectorXd& values) const {
  Eigen::VectorXd in = values;  // FFTW may not preserve the input
  Spectrum out(spectral_size_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

Eigen::VectorXd SpectralPlan::inverse(Spectrum spec) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(real_size_));
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(spec.data()), out.data());
  out /= double(real_size_);
  return out;
}

std::shared_ptr<const SpectralPlan> plan_for(const TorusGrid& grid) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const SpectralPlan>> cache;
  const auto key = std::make_pair(grid.dim(), grid.points_per_axis());
  std::lock_guard lock(cache_mutex);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_shared<SpectralPlan>(key.first, key.second)).first;
  }
  return it->second;
}

}  // namespace pcsc::detail
