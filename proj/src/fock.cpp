#include "tpa/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace tpa {

FockBasis::FockBasis(int dim, double tail_tol) : dim_(dim), tail_tol_(tail_tol)
{
    if (dim < kMinDim) {
        throw InvalidSpec("basis dimension " + std::to_string(dim) + " is below the minimum of " +
                          std::to_string(kMinDim));
    }
    if (!(tail_tol > 0.0 && tail_tol < 1.0)) {
        throw InvalidSpec("tail_tol must lie in (0, 1)");
    }
}

QuantumOperator annihilation_op(const FockBasis& basis)
{
    const int d = basis.dim();
    CMatrix a = CMatrix::Zero(d, d);
    for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return {basis, std::move(a)};
}

QuantumOperator creation_op(const FockBasis& basis) { return annihilation_op(basis).adjoint(); }

QuantumOperator number_op(const FockBasis& basis)
{
    const int d = basis.dim();
    CMatrix n = CMatrix::Zero(d, d);
    for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
    return {basis, std::move(n)};
}

QuantumOperator quadrature_op(const FockBasis& basis, double theta)
{
    const CMatrix a = annihilation_op(basis).elements;
    const Complex phase = std::polar(1.0, -theta);
    CMatrix x = (a * phase + a.adjoint() * std::conj(phase)) / std::numbers::sqrt2;
    return {basis, std::move(x)};
}

// --- DensityMatrix ---------------------------------------------------------

DensityMatrix DensityMatrix::from_matrix(const FockBasis& basis, CMatrix elements)
{
    if (elements.rows() != basis.dim() || elements.cols() != basis.dim()) {
        throw DimensionMismatch("matrix is " + std::to_string(elements.rows()) + "x" +
                                std::to_string(elements.cols()) + ", basis has dimension " +
                                std::to_string(basis.dim()));
    }
    const double asym = (elements - elements.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 1e-12) {
        std::ostringstream msg;
        msg << "density matrix deviates from hermiticity by " << asym;
        throw NonHermitianInput(msg.str());
    }
    const double tr = elements.trace().real();
    if (tr > 1.0 + 1e-10 || tr < 1.0 - 10.0 * basis.tail_tol() - 1e-12) {
        std::ostringstream msg;
        msg << "trace " << tr << " outside [1 - 10*tail_tol, 1]";
        throw TruncationError(msg.str());
    }
    return DensityMatrix(basis, std::move(elements));
}

double DensityMatrix::trace() const { return elements_.trace().real(); }

double DensityMatrix::mean_photon() const
{
    double s = 0.0;
    for (int n = 0; n < dim(); ++n) s += n * population(n);
    return s;
}

double DensityMatrix::photon_variance() const
{
    double m1 = 0.0, m2 = 0.0;
    for (int n = 0; n < dim(); ++n) {
        m1 += n * population(n);
        m2 += static_cast<double>(n) * n * population(n);
    }
    return m2 - m1 * m1;
}

double DensityMatrix::min_eigenvalue() const
{
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(elements_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

void DensityMatrix::require_positive(double tol) const
{
    const double lo = min_eigenvalue();
    if (lo < -tol) {
        std::ostringstream msg;
        msg << "minimum eigenvalue " << lo << " below -" << tol;
        throw NegativeState(msg.str());
    }
}

// --- StateSpec ---------------------------------------------------------------

StateSpec StateSpec::coherent(Complex alpha)
{
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
        throw InvalidSpec("coherent amplitude must be finite");
    }
    return StateSpec(CoherentParams{alpha});
}

StateSpec StateSpec::squeezed_vacuum(double r, double phi)
{
    if (!(r >= 0.0) || !std::isfinite(r) || !std::isfinite(phi)) {
        throw InvalidSpec("squeezing r must be finite and >= 0");
    }
    return StateSpec(SqueezedParams{r, phi});
}

StateSpec StateSpec::fock(int n)
{
    if (n < 0) throw InvalidSpec("Fock photon count must be >= 0");
    return StateSpec(FockParams{n});
}

StateSpec StateSpec::with_mean_photon(Family family, double nbar, double phi)
{
    if (!(nbar >= 0.0) || !std::isfinite(nbar)) throw InvalidSpec("mean photon number must be >= 0");
    switch (family) {
    case Family::coherent:
        return coherent(std::polar(std::sqrt(nbar), phi));
    case Family::squeezed_vacuum:
        return squeezed_vacuum(std::asinh(std::sqrt(nbar)), phi);
    case Family::fock: {
        const double rounded = std::round(nbar);
        if (std::abs(rounded - nbar) > 1e-12) throw InvalidSpec("Fock mean photon number must be an integer");
        return fock(static_cast<int>(rounded));
    }
    }
    throw InvalidSpec("unknown family");
}

Family StateSpec::family() const
{
    if (std::holds_alternative<CoherentParams>(params_)) return Family::coherent;
    if (std::holds_alternative<SqueezedParams>(params_)) return Family::squeezed_vacuum;
    return Family::fock;
}

double StateSpec::mean_photon() const
{
    switch (family()) {
    case Family::coherent:
        return std::norm(as<CoherentParams>().alpha);
    case Family::squeezed_vacuum: {
        const double s = std::sinh(as<SqueezedParams>().r);
        return s * s;
    }
    case Family::fock:
        return as<FockParams>().n;
    }
    return 0.0;
}

double StateSpec::photon_variance() const
{
    const double n = mean_photon();
    switch (family()) {
    case Family::coherent:
        return n;
    case Family::squeezed_vacuum:
        return 2.0 * n * (n + 1.0);
    case Family::fock:
        return 0.0;
    }
    return 0.0;
}

double StateSpec::primary_param() const
{
    switch (family()) {
    case Family::coherent:
        return std::abs(as<CoherentParams>().alpha);
    case Family::squeezed_vacuum:
        return as<SqueezedParams>().r;
    case Family::fock:
        return as<FockParams>().n;
    }
    return 0.0;
}

std::string family_name(Family family)
{
    switch (family) {
    case Family::coherent:
        return "coherent";
    case Family::squeezed_vacuum:
        return "squeezed_vacuum";
    case Family::fock:
        return "fock";
    }
    return "unknown";
}

Family parse_family(const std::string& name)
{
    if (name == "coherent") return Family::coherent;
    if (name == "squeezed_vacuum" || name == "squeezed") return Family::squeezed_vacuum;
    if (name == "fock") return Family::fock;
    throw InvalidSpec("unknown state family '" + name + "' (expected coherent, squeezed_vacuum or fock)");
}

// --- construction ------------------------------------------------------------

CVector fock_amplitudes(const StateSpec& spec, int count)
{
    CVector c = CVector::Zero(count);
    switch (spec.family()) {
    case Family::coherent: {
        const Complex alpha = spec.as<CoherentParams>().alpha;
        const double mod = std::abs(alpha);
        if (mod == 0.0) {
            if (count > 0) c(0) = 1.0;
            break;
        }
        const double arg = std::arg(alpha);
        for (int n = 0; n < count; ++n) {
            const double logmag = -0.5 * mod * mod + n * std::log(mod) - 0.5 * std::lgamma(n + 1.0);
            c(n) = std::polar(std::exp(logmag), n * arg);
        }
        break;
    }
    case Family::squeezed_vacuum: {
        // S(ζ)|0> with S†aS = cosh(r) a − e^{iφ} sinh(r) a†.
        const auto [r, phi] = spec.as<SqueezedParams>();
        const double lognorm = -0.5 * std::log(std::cosh(r));
        if (count > 0) c(0) = std::exp(lognorm);
        if (r == 0.0) break;
        const double logt = std::log(std::tanh(r));
        for (int k = 1; 2 * k < count; ++k) {
            const double logmag = lognorm + k * logt + 0.5 * std::lgamma(2.0 * k + 1.0) -
                                  k * std::numbers::ln2 - std::lgamma(k + 1.0);
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            c(2 * k) = sign * std::polar(std::exp(logmag), k * phi);
        }
        break;
    }
    case Family::fock: {
        const int n = spec.as<FockParams>().n;
        if (n < count) c(n) = 1.0;
        break;
    }
    }
    return c;
}

namespace {

// Populations far enough out that the neglected remainder is below double
// resolution relative to the (n+1)^4-weighted total.
std::vector<double> tail_populations(const StateSpec& spec, int min_count)
{
    const double nbar = spec.mean_photon();
    const double sigma = std::sqrt(spec.photon_variance());
    int count = std::max(min_count, static_cast<int>(std::ceil(2.0 * nbar + 40.0 * sigma + 64.0)));
    for (;;) {
        const CVector amp = fock_amplitudes(spec, count);
        std::vector<double> p(count);
        for (int n = 0; n < count; ++n) p[n] = std::norm(amp(n));
        double total = 0.0;
        for (int n = 0; n < count; ++n) total += std::pow(n + 1.0, 4) * p[n];
        double last = 0.0;
        for (int n = count - 8; n < count; ++n) last = std::max(last, std::pow(n + 1.0, 4) * p[n]);
        if (last <= 1e-22 * total || count > 8 * kMaxAutoDim) return p;
        count *= 2;
    }
}

} // namespace

FockBasis auto_basis(const StateSpec& spec, double tail_tol, int max_dim)
{
    FockBasis probe(kMinDim, tail_tol); // validates tail_tol
    const double nbar = spec.mean_photon();
    const double sigma = std::sqrt(spec.photon_variance());
    int start = std::max(32, static_cast<int>(std::ceil(nbar + 8.0 * sigma)));
    if (spec.family() == Family::fock) start = std::max(start, spec.as<FockParams>().n + 3);

    const std::vector<double> p = tail_populations(spec, start + 2);
    const int count = static_cast<int>(p.size());
    // weighted[n] = sum_{k >= n} (k+1)^4 p_k
    std::vector<double> weighted(count + 1, 0.0);
    for (int n = count - 1; n >= 0; --n) weighted[n] = weighted[n + 1] + std::pow(n + 1.0, 4) * p[n];
    const double total = weighted[0];

    for (int d = start; d <= std::min(max_dim, count - 1); ++d) {
        const double top = p[d - 1] + p[d - 2];
        const double tail = total > 0.0 ? weighted[d - 2] / total : 0.0;
        if (top <= tail_tol && tail <= tail_tol) return FockBasis(d, tail_tol);
    }
    std::ostringstream msg;
    msg << "state with mean photon number " << nbar << " needs more than " << max_dim
        << " Fock levels for tail_tol " << tail_tol;
    throw TruncationError(msg.str());
}

DensityMatrix make_state(const StateSpec& spec, const FockBasis& basis)
{
    const int d = basis.dim();
    if (spec.family() == Family::fock && spec.as<FockParams>().n >= d) {
        throw TruncationError("Fock state |" + std::to_string(spec.as<FockParams>().n) +
                          "> does not fit in dimension " + std::to_string(d));
    }
    const CVector psi = fock_amplitudes(spec, d);
    const double top = std::norm(psi(d - 1)) + std::norm(psi(d - 2));
    if (top > basis.tail_tol()) {
        std::ostringstream msg;
        msg << "population " << top << " in the top two Fock levels of dimension " << d
            << " exceeds tail_tol " << basis.tail_tol();
        throw TruncationError(msg.str());
    }
    CMatrix rho = psi * psi.adjoint();
    // Exact hermiticity for downstream eigensolvers.
    rho = (0.5 * (rho + rho.adjoint())).eval();
    return DensityMatrix::from_matrix(basis, std::move(rho));
}

Complex expectation(const DensityMatrix& rho, const QuantumOperator& op)
{
    if (op.basis.dim() != rho.dim()) {
        throw DimensionMismatch("operator dimension " + std::to_string(op.basis.dim()) +
                                " does not match state dimension " + std::to_string(rho.dim()));
    }
    return op.elements.cwiseProduct(rho.matrix().transpose()).sum();
}

} // namespace tpa
