#pragma once

// Shared helpers for the test suites: seeded random trigonometric fields and
// a few closed-form profiles.

#include "pcsc/grid.hpp"
#include "pcsc/hermitian.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace pcsc::testing {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Mode {
  double amplitude;
  std::vector<int> k;
  bool sine;
};

/// Random trigonometric polynomial with |k_i| <= max_k on every axis.
inline std::vector<Mode> random_modes(std::mt19937_64& rng, int d, int count, int max_k,
                                      double scale = 1.0) {
  std::uniform_int_distribution<int> kd(-max_k, max_k);
  std::uniform_real_distribution<double> ad(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::vector<Mode> modes;
  while (int(modes.size()) < count) {
    Mode m{scale * ad(rng), std::vector<int>(std::size_t(d)), coin(rng)};
    bool nonzero = false;
    for (auto& k : m.k) {
      k = kd(rng);
      nonzero = nonzero || k != 0;
    }
    if (nonzero) modes.push_back(std::move(m));
  }
  return modes;
}

inline double eval_modes(const std::vector<Mode>& modes, std::span<const double> x) {
  double v = 0.0;
  for (const auto& m : modes) {
    double phase = 0.0;
    for (std::size_t i = 0; i < m.k.size(); ++i) phase += kTwoPi * m.k[i] * x[i];
    v += m.amplitude * (m.sine ? std::sin(phase) : std::cos(phase));
  }
  return v;
}

inline ScalarField field_from_modes(const TorusGrid& grid, const std::vector<Mode>& modes,
                                    double constant = 0.0) {
  return ScalarField::sample(grid, [&](std::span<const double> x) {
    return constant + eval_modes(modes, x);
  });
}

inline ScalarField random_field(const TorusGrid& grid, std::mt19937_64& rng, int count = 4,
                                int max_k = 2, double scale = 1.0) {
  return field_from_modes(grid, random_modes(rng, grid.dim(), count, max_k, scale));
}

inline OneFormField random_one_form(const TorusGrid& grid, std::mt19937_64& rng,
                                    int count = 3, int max_k = 2, double scale = 0.5) {
  std::vector<ScalarField> comps;
  for (int k = 0; k < grid.dim(); ++k) comps.push_back(random_field(grid, rng, count, max_k, scale));
  return OneFormField(std::move(comps));
}

/// cos(2π k x_axis) sampled on the grid.
inline ScalarField cos_mode(const TorusGrid& grid, int axis, int k, double amp = 1.0) {
  return ScalarField::sample(grid, [=](std::span<const double> x) {
    return amp * std::cos(kTwoPi * k * x[std::size_t(axis)]);
  });
}

inline ScalarField sin_mode(const TorusGrid& grid, int axis, int k, double amp = 1.0) {
  return ScalarField::sample(grid, [=](std::span<const double> x) {
    return amp * std::sin(kTwoPi * k * x[std::size_t(axis)]);
  });
}

inline OneFormField axis_form(const ScalarField& f, int axis) {
  OneFormField a(f.grid());
  a[axis] = f;
  return a;
}

/// Flat-mean inner product ⟨a, b⟩ = ∫ a b.
inline double dot(const ScalarField& a, const ScalarField& b) {
  return (a.array() * b.array()).mean();
}

}  // namespace pcsc::testing
