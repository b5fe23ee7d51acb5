#pragma once

// Truncated Fock-space states and operators for a single bosonic mode.

#include <complex>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tpa/errors.hpp"

namespace tpa {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kDefaultTailTol = 1e-6;
inline constexpr int kMinDim = 4;
inline constexpr int kMaxAutoDim = 4096;

/// Fock states |0>..|dim-1>. `tail_tol` bounds the population allowed in the
/// two highest levels of any state built on this basis.
class FockBasis {
public:
    explicit FockBasis(int dim, double tail_tol = kDefaultTailTol);

    int dim() const noexcept { return dim_; }
    double tail_tol() const noexcept { return tail_tol_; }

    bool operator==(const FockBasis&) const = default;

private:
    int dim_;
    double tail_tol_;
};

struct QuantumOperator {
    FockBasis basis;
    CMatrix elements;

    QuantumOperator adjoint() const { return {basis, elements.adjoint()}; }
};

QuantumOperator annihilation_op(const FockBasis& basis);
QuantumOperator creation_op(const FockBasis& basis);
QuantumOperator number_op(const FockBasis& basis);
/// (a e^{-iθ} + a† e^{iθ})/√2; θ=0 is q, θ=π/2 is p.
QuantumOperator quadrature_op(const FockBasis& basis, double theta);

/// Hermitian, trace-at-most-one matrix on a truncated basis. Construction
/// checks hermiticity and trace; positivity is checked on demand because it
/// needs a full eigendecomposition.
class DensityMatrix {
public:
    static DensityMatrix from_matrix(const FockBasis& basis, CMatrix elements);

    const FockBasis& basis() const noexcept { return basis_; }
    int dim() const noexcept { return basis_.dim(); }
    const CMatrix& matrix() const noexcept { return elements_; }

    double trace() const;
    double population(int n) const { return elements_(n, n).real(); }
    RVector populations() const { return elements_.diagonal().real(); }
    double mean_photon() const;
    double photon_variance() const;
    /// Smallest eigenvalue (full eigendecomposition).
    double min_eigenvalue() const;
    /// Throws NegativeState when min_eigenvalue() < -tol.
    void require_positive(double tol = 1e-10) const;

private:
    DensityMatrix(FockBasis basis, CMatrix elements)
        : basis_(basis), elements_(std::move(elements)) {}

    FockBasis basis_;
    CMatrix elements_;
};

enum class Family { coherent, squeezed_vacuum, fock };

struct CoherentParams {
    Complex alpha;
};
struct SqueezedParams {
    double r = 0.0;
    double phi = 0.0;
};
struct FockParams {
    int n = 0;
};

/// Input state description. Exactly one family's parameters exist by
/// construction.
class StateSpec {
public:
    static StateSpec coherent(Complex alpha);
    static StateSpec squeezed_vacuum(double r, double phi = 0.0);
    static StateSpec fock(int n);
    /// Coherent state with real α = √n̄, or squeezed vacuum with sinh²r = n̄.
    static StateSpec with_mean_photon(Family family, double nbar, double phi = 0.0);

    Family family() const;
    const std::variant<CoherentParams, SqueezedParams, FockParams>& params() const noexcept {
        return params_;
    }
    template <class T> const T& as() const { return std::get<T>(params_); }

    double mean_photon() const;
    double photon_variance() const;
    /// Swept parameter: |α|, r or n.
    double primary_param() const;

private:
    explicit StateSpec(std::variant<CoherentParams, SqueezedParams, FockParams> p)
        : params_(std::move(p)) {}

    std::variant<CoherentParams, SqueezedParams, FockParams> params_;
};

std::string family_name(Family family);
Family parse_family(const std::string& name);

/// Untruncated Fock amplitudes <n|ψ> for n < count.
CVector fock_amplitudes(const StateSpec& spec, int count);

/// Smallest dimension, starting from max(32, ⌈n̄ + 8σ_n⌉), whose top-two
/// population and whose (n+1)^4-weighted relative tail are both within
/// tail_tol. Throws TruncationError above max_dim.
FockBasis auto_basis(const StateSpec& spec, double tail_tol = kDefaultTailTol,
                     int max_dim = kMaxAutoDim);

DensityMatrix make_state(const StateSpec& spec, const FockBasis& basis);

Complex expectation(const DensityMatrix& rho, const QuantumOperator& op);

} // namespace tpa
