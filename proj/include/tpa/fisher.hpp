#pragma once

// Quantum and classical Fisher information about the absorbance ε,
// moment-based sensitivities and scaling exponents.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tpa/dynamics.hpp"
#include "tpa/fock.hpp"
#include "tpa/phase_space.hpp"

namespace tpa {

inline constexpr double kDefaultSldCutoff = 1e-10;
inline constexpr double kDefaultProbabilityFloor = 1e-14;
/// Auto-dimension tail tolerance for homodyne CFI. Truncation leaves a
/// density floor of order the cut population across the Hermite support;
/// at 1e-6 that floor can trip the 1e-12 edge gate, at 1e-8 it sits below
/// the probability floor.
inline constexpr double kQuadratureTailTol = 1e-8;
/// Upper bound on homodyne grid size when evaluate() widens the grid.
inline constexpr int kMaxQuadraturePoints = 40001;
/// Multiplicative half-step of the log-log central difference.
inline constexpr double kExponentHalfStepDecades = 0.05;

struct SldResult {
    QuantumOperator sld;
    double qfi;
    double rank_cutoff;
    /// Σ|⟨l|dρ|k⟩|² over eigenpairs with λ_k + λ_l ≤ rank_cutoff.
    double dropped_weight;
};

/// SLD of dρ in the eigenbasis of ρ:
///   L_lk = 2⟨l|dρ|k⟩ / max(λ_k + λ_l, cutoff),  QFI = Σ_kl 2|⟨l|dρ|k⟩|² / max(λ_k + λ_l, cutoff).
/// Pairs below the cutoff are regularised rather than discarded, so for a
/// state whose derivative has weight on its null space the QFI grows like
/// dropped_weight/cutoff instead of silently converging; the result is a
/// monotone lower bound on the exact QFI. Where no pair is below the cutoff
/// QFI = Tr[L²ρ].
///
/// Throws NonHermitianInput for a non-Hermitian dρ, InvalidSpec if
/// |Tr dρ| ≥ 1e-10 and NegativeState if ρ has an eigenvalue below −1e-8.
SldResult compute_sld(const DensityMatrix& rho, const CMatrix& drho, double cutoff = kDefaultSldCutoff);

enum class MeasurementKind { qfi, photon_number, quadrature, mean_photon_sensitivity, negativity, exponent };

/// What a sweep cell or CLI call evaluates. `theta` applies to quadrature
/// (and to an exponent over a quadrature); `inner` is the measurement whose
/// local scaling exponent is taken when kind == exponent.
struct Measurement {
    MeasurementKind kind = MeasurementKind::qfi;
    double theta = 0.0;
    MeasurementKind inner = MeasurementKind::qfi;

    static Measurement quadrature_at(double theta) { return {MeasurementKind::quadrature, theta}; }
    static Measurement exponent_of(const Measurement& m) { return {MeasurementKind::exponent, m.theta, m.kind}; }
    Measurement base() const { return {inner, theta}; }

    /// "qfi", "photon_number", "quadrature(<θ>)", "mean_photon_sensitivity",
    /// "negativity", "exponent:<inner>".
    std::string name() const;
    /// Accepts name() output; θ may also be written "pi/2", "pi", "0.5*pi".
    static Measurement parse(const std::string& text);

    bool operator==(const Measurement&) const = default;
};

struct FisherRecord {
    StateSpec spec;
    Absorbance epsilon;
    Measurement measurement;
    double value;
    int dim;
    std::map<std::string, double> diagnostics;
};

/// Knobs shared by every evaluation path.
struct EvalOptions {
    std::optional<int> dim; // empty: auto_basis
    double tail_tol = kDefaultTailTol;
    double cutoff = kDefaultSldCutoff;
    double floor = kDefaultProbabilityFloor;
    int grid_points = 2001;
    double grid_half_width_sd = 10.0;
    int wigner_points = 201;
    LossKind loss = LossKind::tpa;
};

FockBasis basis_for(const StateSpec& spec, const EvalOptions& options);

/// Σ_n (dP_n/dε)²/P_n over P_n > floor·max P, with dP_n/dε from the
/// generator's population recurrence (for TPA
/// dP_n/dε = ½[(n+2)(n+1)P_{n+2} − n(n−1)P_n]).
double cfi_photon_number(const DensityMatrix& rho, const LossGenerator& gen,
                         double floor = kDefaultProbabilityFloor);

struct QuadratureCfi {
    double value;
    /// |F(h) − F(2h)|/F(h) from the convergence gate.
    double step_change;
};

/// ∫ (dP/dε)²/P dx by composite Simpson, integrand zeroed where
/// P < floor·max P. Throws GridTooNarrow if the integrand at either edge
/// exceeds 1e-12 of its peak and ConvergenceError if doubling the step
/// changes the value by more than 0.1%.
QuadratureCfi cfi_quadrature_detail(const DensityMatrix& rho, const LossGenerator& gen, double theta,
                                    const QuadratureGrid& grid, double floor = kDefaultProbabilityFloor);
double cfi_quadrature(const DensityMatrix& rho, const LossGenerator& gen, double theta, const QuadratureGrid& grid,
                      double floor = kDefaultProbabilityFloor);

/// Var(n̂)/|Tr[n̂ ℒρ]|². Throws ZeroSignal when |Tr[n̂ ℒρ]| < 1e-14.
double sensitivity_mean_photon(const DensityMatrix& rho, const LossGenerator& gen);
double sensitivity_mean_photon(const StateSpec& spec, Absorbance eps, const EvalOptions& options = {});

FisherRecord qfi_tpa(const StateSpec& spec, Absorbance eps, const EvalOptions& options = {});

/// One measurement on ρ_ε = exp(εℒ)ρ(spec). For kind == exponent the value
/// is local_exponent() at the spec's mean photon number. Homodyne CFI starts
/// on mean ± grid_half_width_sd·σ with grid_points samples and, if an edge
/// gate fails, widens the window by 1.5× at the same step (up to
/// kMaxQuadraturePoints samples).
FisherRecord evaluate(const StateSpec& spec, Absorbance eps, const Measurement& m, const EvalOptions& options = {});

/// γ = ∂log F/∂log n̄ by central difference at n̄·10^{±0.05}, where F is
/// `m` evaluated on the spec's family at those mean photon numbers (phase
/// of α or ζ kept). Throws UnsupportedFamily for Fock states and
/// InsufficientPoints if either F is not positive.
double local_exponent(const StateSpec& spec, Absorbance eps, const Measurement& m, const EvalOptions& options = {});

/// γ at `at` from a sampled curve (n̄_i, F_i): quadratic interpolation of
/// log F in log n̄ over the three samples nearest `at`, differentiated by
/// central difference at at·10^{±0.05}. Needs ≥ 3 strictly increasing
/// points bracketing `at`, all F > 0 (else InsufficientPoints).
double scaling_exponent(const std::vector<std::pair<double, double>>& curve, double at);

/// Least-squares slope of log F against log n̄ (≥ 2 points, all positive).
double loglog_slope(const std::vector<std::pair<double, double>>& curve);

} // namespace tpa
