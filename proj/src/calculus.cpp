#include "pcsc/calculus.hpp"

#include "pcsc/errors.hpp"
#include "spectral.hpp"

#include <complex>
#include <string>

namespace pcsc {

ScalarField partial_derivative(const ScalarField& f, int axis) {
  if (axis < 0 || axis >= f.grid().dim()) {
    throw Error(ErrorCode::InvalidArgument,
                "axis " + std::to_string(axis) + " out of range for d = " +
                    std::to_string(f.grid().dim()));
  }
  const auto plan = detail::plan_for(f.grid());
  auto spec = plan->forward(f.values());
  const auto& sym = plan->derivative_symbol(axis);
  for (std::size_t j = 0; j < spec.size(); ++j) spec[j] *= std::complex<double>(0.0, sym[j]);
  return ScalarField(f.grid(), plan->inverse(std::move(spec)));
}

OneFormField gradient(const ScalarField& f) {
  const auto plan = detail::plan_for(f.grid());
  const auto base = plan->forward(f.values());
  std::vector<ScalarField> comps;
  comps.reserve(std::size_t(f.grid().dim()));
  for (int axis = 0; axis < f.grid().dim(); ++axis) {
    auto spec = base;
    const auto& sym = plan->derivative_symbol(axis);
    for (std::size_t j = 0; j < spec.size(); ++j) spec[j] *= std::complex<double>(0.0, sym[j]);
    comps.emplace_back(f.grid(), plan->inverse(std::move(spec)));
  }
  return OneFormField(std::move(comps));
}

ScalarField divergence(const OneFormField& a) {
  const auto plan = detail::plan_for(a.grid());
  detail::Spectrum acc(plan->spectral_size());
  for (int axis = 0; axis < a.dim(); ++axis) {
    const auto spec = plan->forward(a[axis].values());
    const auto& sym = plan->derivative_symbol(axis);
    for (std::size_t j = 0; j < spec.size(); ++j) acc[j] += spec[j] * std::complex<double>(0.0, sym[j]);
  }
  return ScalarField(a.grid(), plan->inverse(std::move(acc)));
}

ScalarField laplacian_flat(const ScalarField& f) {
  const auto plan = detail::plan_for(f.grid());
  auto spec = plan->forward(f.values());
  const auto& lap = plan->laplacian_symbol();
  for (std::size_t j = 0; j < spec.size(); ++j) spec[j] *= lap[j];
  return ScalarField(f.grid(), plan->inverse(std::move(spec)));
}

ScalarField inverse_laplacian_flat(const ScalarField& f) {
  const auto plan = detail::plan_for(f.grid());
  auto spec = plan->forward(f.values());
  const auto& lap = plan->laplacian_symbol();
  spec[0] = 0.0;
  for (std::size_t j = 1; j < spec.size(); ++j) spec[j] /= lap[j];
  return ScalarField(f.grid(), plan->inverse(std::move(spec)));
}

ScalarField shifted_inverse_laplacian(const ScalarField& f, double shift) {
  if (!(shift > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "shift must be positive");
  }
  const auto plan = detail::plan_for(f.grid());
  auto spec = plan->forward(f.values());
  const auto& lap = plan->laplacian_symbol();
  for (std::size_t j = 0; j < spec.size(); ++j) spec[j] /= (lap[j] + shift);
  return ScalarField(f.grid(), plan->inverse(std::move(spec)));
}

double integrate(const ScalarField& f) { return f.mean(); }

double integrate(const ScalarField& f, const ScalarField& density) {
  require_same_grid(f.grid(), density.grid());
  if (!(density.min() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "integration density must be strictly positive");
  }
  return (f.array() * density.array()).mean();
}

ScalarField pairing(const OneFormField& a, const OneFormField& b) {
  require_same_grid(a.grid(), b.grid());
  ScalarField out(a.grid());
  for (int k = 0; k < a.dim(); ++k) out.values().array() += a[k].array() * b[k].array();
  return out;
}

ScalarField pairing(const OneFormField& a, const OneFormField& b, const ScalarField& weight) {
  require_same_grid(a.grid(), weight.grid());
  return pairing(a, b) * weight;
}

}  // namespace pcsc
