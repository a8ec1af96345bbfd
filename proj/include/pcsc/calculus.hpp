#pragma once

#include "pcsc/grid.hpp"

namespace pcsc {

// Spectral (Fourier-collocation) calculus on the periodic grid. The Laplacian
// follows the geometer sign, Δf = -Σ ∂²f/∂x_k², and is positive semidefinite
// with kernel the constants. On one-forms d* = -div.

ScalarField partial_derivative(const ScalarField& f, int axis);
OneFormField gradient(const ScalarField& f);
ScalarField divergence(const OneFormField& a);
ScalarField laplacian_flat(const ScalarField& f);

/// Mean-zero solution of Δu = f - mean(f).
ScalarField inverse_laplacian_flat(const ScalarField& f);
/// (Δ + shift)^{-1} f for shift > 0.
ScalarField shifted_inverse_laplacian(const ScalarField& f, double shift);

/// ∫ f over the unit torus (grid mean).
double integrate(const ScalarField& f);
/// ∫ f·density; density must be strictly positive.
double integrate(const ScalarField& f, const ScalarField& density);

/// ip(a, b) = Σ_k a_k b_k, pointwise.
ScalarField pairing(const OneFormField& a, const OneFormField& b);
ScalarField pairing(const OneFormField& a, const OneFormField& b, const ScalarField& weight);

}  // namespace pcsc
