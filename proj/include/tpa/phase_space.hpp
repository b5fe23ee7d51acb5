#pragma once

// Wigner functions, quadrature marginals and their ε-derivatives.
//
// Convention throughout: q = (a + a†)/√2, so the vacuum has
// W(q,p) = exp(−q² − p²)/π and P(q) = exp(−q²)/√π.

#include <iosfwd>
#include <string>

#include "tpa/dynamics.hpp"
#include "tpa/fock.hpp"

namespace tpa {

/// Fock-tail tolerance for phase-space work. Wigner values are linear in the
/// truncated amplitudes (√population), so a population tail of 1e-18 keeps
/// truncation ripples near 1e-12 of the peak, well inside negativity gates.
inline constexpr double kPhaseSpaceTailTol = 1e-18;

/// Uniform grid with an odd number of points (Simpson-compatible).
class QuadratureGrid {
public:
    QuadratureGrid(double min, double max, int points);

    double min() const noexcept { return min_; }
    double max() const noexcept { return max_; }
    int points() const noexcept { return points_; }
    double step() const noexcept { return (max_ - min_) / (points_ - 1); }
    double at(int i) const noexcept { return min_ + i * step(); }
    RVector values() const;

private:
    double min_, max_;
    int points_;
};

/// W(q_i, p_j) stored row-major in q.
struct PhaseSpaceField {
    QuadratureGrid q;
    QuadratureGrid p;
    RMatrix values;
};

struct MarginalDistribution {
    QuadratureGrid grid;
    RVector density;    // P(q)
    RVector derivative; // dP(q)/dε
};

/// ±(4 + 7√(2n̄+1)), 2001 points. √(2n̄+1) bounds the widest quadrature
/// spread of squeezed vacuum, so the edge sits beyond 7σ.
QuadratureGrid default_phase_space_grid(double nbar, int points = 2001);

/// Composite Simpson rule on a uniform grid (odd sample count).
double simpson(const RVector& f, double h);

/// ψ_n(x_i) for n < count: rows are points, columns are n. The three-term
/// recurrence is carried with a running log-scale so that high orders at
/// large |x| neither overflow nor lose the e^{−x²/2} envelope.
RMatrix hermite_functions(const RVector& x, int count);

/// Wigner function from the Fock expansion of the displaced parity
/// operator, (1/π)Tr[ρ D(β)ΠD†(β)] with β = (q+ip)/√2.
/// Throws GridTooNarrow if the boundary exceeds 1e-10 of the peak |W|.
PhaseSpaceField wigner(const DensityMatrix& rho, const QuadratureGrid& q, const QuadratureGrid& p);

double wigner_at(const DensityMatrix& rho, double q, double p);

/// Reference route: builds D(−β) explicitly by matrix exponential in a
/// padded basis and takes the parity expectation. Slow; for validation.
double wigner_displaced_parity(const DensityMatrix& rho, double q, double p);

/// ∫∫ (|W| − W)/2 dq dp, trapezoidal.
double negativity_volume(const PhaseSpaceField& field);

/// ∫ W(q, p) dp on the field's p grid (Simpson).
RVector integrate_out_p(const PhaseSpaceField& field);

/// P(x) for the rotated quadrature (a e^{−iθ} + a† e^{iθ})/√2 by Hermite
/// expansion of the phase-rotated ρ, and dP/dε from ℒρ through the same
/// expansion. Throws GridTooNarrow if either edge density exceeds 1e-10 of
/// the peak.
MarginalDistribution quadrature_pdf(const DensityMatrix& rho, double theta, const QuadratureGrid& grid,
                                    const LossGenerator& gen);
MarginalDistribution quadrature_pdf(const DensityMatrix& rho, double theta, const QuadratureGrid& grid);

/// Mean and standard deviation of the rotated quadrature.
struct QuadratureMoments {
    double mean;
    double sd;
};
QuadratureMoments quadrature_moments(const DensityMatrix& rho, double theta);

/// mean ± half_width_sd·σ with `points` samples.
QuadratureGrid quadrature_grid_for(const DensityMatrix& rho, double theta, double half_width_sd = 10.0,
                                   int points = 2001);

void write_csv(const PhaseSpaceField& field, std::ostream& out);
/// "TPAWIGN1", int64 nq, int64 np, double qmin, qmax, pmin, pmax, then
/// nq·np doubles, q-major. Little-endian host layout.
void write_binary(const PhaseSpaceField& field, std::ostream& out);
PhaseSpaceField read_binary(std::istream& in);

} // namespace tpa
