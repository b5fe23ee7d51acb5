#pragma once

// Two-photon (and single-photon) loss: generator action and exact
// propagation ρ_ε = exp(εℒ)ρ_0.

#include <string>

#include "tpa/fock.hpp"

namespace tpa {

enum class LossKind { tpa, single_photon };

std::string loss_name(LossKind kind);
/// "tpa" or "single_photon"; anything else is InvalidSpec.
LossKind parse_loss(const std::string& name);

/// ℒρ = LρL† − ½{L†L, ρ} with L = a²/√2 (tpa) or L = a (single_photon).
///
/// In the Fock basis every element couples only to the element `step()`
/// levels higher on both indices:
///   dρ_nm/dε = −rate(n,m) ρ_nm + coupling(n,m) ρ_{n+s,m+s}
class LossGenerator {
public:
    LossGenerator(LossKind kind, FockBasis basis) : kind_(kind), basis_(basis) {}

    LossKind kind() const noexcept { return kind_; }
    const FockBasis& basis() const noexcept { return basis_; }
    int step() const noexcept { return kind_ == LossKind::tpa ? 2 : 1; }
    double rate(int n, int m) const noexcept;
    double coupling(int n, int m) const noexcept;

private:
    LossKind kind_;
    FockBasis basis_;
};

inline LossGenerator tpa_generator(const FockBasis& basis) { return {LossKind::tpa, basis}; }
inline LossGenerator single_photon_generator(const FockBasis& basis)
{
    return {LossKind::single_photon, basis};
}

/// Dimensionless absorbance ε = γ_TPA·t.
class Absorbance {
public:
    explicit Absorbance(double value);
    double value() const noexcept { return value_; }

private:
    double value_;
};

/// dρ/dε = ℒρ for an arbitrary matrix on the generator's basis.
CMatrix generator_apply(const LossGenerator& gen, const CMatrix& rho);
CMatrix generator_apply(const LossGenerator& gen, const DensityMatrix& rho);

/// Exact propagation along the independent element chains
/// (n, m), (n+s, m+s), ... Each chain is an upper-bidiagonal linear system
/// whose exponential is applied by Taylor substeps with ‖hM‖∞ ≤ 1, so the
/// only error is rounding. Chain tops that have decayed below 1e-30 are
/// retired (they only feed lower elements).
///
/// Throws TruncationError when the initial population of the two highest
/// levels exceeds the basis tail_tol (that population is an upper bound on
/// the flux through them for any ε).
DensityMatrix propagate(const LossGenerator& gen, const DensityMatrix& rho0, Absorbance eps);

/// Reference propagator: dense D²×D² superoperator exponentiated by scaling
/// and squaring. O(D⁶); for cross-validation at small D only.
DensityMatrix propagate_dense(const LossGenerator& gen, const DensityMatrix& rho0, Absorbance eps);

/// Tr[n̂ ℒρ]; equals −⟨a†²a²⟩ for tpa.
double photon_flux(const LossGenerator& gen, const DensityMatrix& rho);

} // namespace tpa
