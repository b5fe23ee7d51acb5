#pragma once

// Exact formulas for the ε → 0 limit; the reference values the numerics are
// checked against.

#include "tpa/dynamics.hpp"
#include "tpa/fock.hpp"

namespace tpa {

/// QFI of a coherent state at ε = 0: n³ + n²/2.
double qfi_coherent_exact(double n_alpha);

/// Δε² from the mean photon number at ε = 0. Throw ZeroPhotons for n ≤ 0.
double dvar_photon_squeezed(double n_r); // (2/n)(1+n)/(1+3n)²
double dvar_photon_coherent(double n_alpha); // 1/n³

enum class SqueezedAxis { squeezed_q, antisqueezed_p };
enum class CoherentAxis { aligned, orthogonal };

/// Homodyne CFI of squeezed vacuum at ε = 0:
///   q: e^{−2r} sinh²r/8 · (4e^{8r} − 12e^{6r} + 33e^{4r} − 42e^{2r} + 21)
///   p: e^{−6r} sinh²r/8 · (21e^{8r} − 42e^{6r} + 33e^{4r} − 12e^{2r} + 4)
double cfi_quad_squeezed(double r, SqueezedAxis axis);

/// Homodyne CFI of a coherent state at ε = 0: n³ + n²/2 along α, n²/2 across.
double cfi_quad_coherent(double n_alpha, CoherentAxis axis);

/// 4g²⟨a†²a²⟩: 4g²n² (coherent), 4g²n(1+3n) (squeezed vacuum).
/// Throws UnsupportedFamily for Fock input.
double shg_qfi(const StateSpec& spec, double g = 1.0);

struct CrossSectionInputs {
    double epsilon;
    double density; // absorbers per volume
    double length;
};

/// σ = ε/(n·ℓ) in the caller's units. Throws NonPositiveInput unless
/// density, length > 0 and ε ≥ 0.
double cross_section(const CrossSectionInputs& in);

/// ⟨n̂⟩ to first order: n − εn(1+3n) (squeezed), n − εn² (coherent).
/// Throws UnsupportedFamily for Fock input.
double mean_photon_first_order(const StateSpec& spec, Absorbance eps);

} // namespace tpa
