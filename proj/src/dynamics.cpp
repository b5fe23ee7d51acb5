#include "tpa/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

namespace tpa {

namespace {

void require_same_dim(const LossGenerator& gen, Eigen::Index rows, Eigen::Index cols)
{
    if (rows != gen.basis().dim() || cols != gen.basis().dim()) {
        std::ostringstream msg;
        msg << "generator dimension " << gen.basis().dim() << " does not match " << rows << "x" << cols
            << " input";
        throw DimensionMismatch(msg.str());
    }
}

constexpr double kRetireBelow = 1e-30;
constexpr int kMaxTaylorTerms = 60;

// x_j(ε) for dx_j/dε = −k_j x_j + c_j x_{j+1}, j = 0..J (c_J unused).
void propagate_chain(std::vector<Complex>& x, const std::vector<double>& k,
                     const std::vector<double>& c, double eps)
{
    int top = static_cast<int>(x.size()) - 1;
    auto retire = [&] {
        while (top > 0 && std::abs(x[top]) < kRetireBelow) {
            x[top] = 0.0;
            --top;
        }
    };
    retire();

    std::vector<Complex> term(x.size()), next(x.size());
    double remaining = eps;
    while (remaining > 0.0) {
        if (top == 0) {
            x[0] *= std::exp(-k[0] * remaining);
            break;
        }
        double norm = 0.0;
        for (int j = 0; j <= top; ++j) norm = std::max(norm, k[j] + (j < top ? c[j] : 0.0));
        if (norm == 0.0) break; // dark chain
        const double h = std::min(remaining, 1.0 / norm);

        double ymax = 0.0;
        for (int j = 0; j <= top; ++j) {
            term[j] = x[j];
            ymax = std::max(ymax, std::abs(x[j]));
        }
        for (int p = 1; p <= kMaxTaylorTerms; ++p) {
            const double scale = h / p;
            double tmax = 0.0;
            for (int j = 0; j <= top; ++j) {
                Complex v = -k[j] * term[j];
                if (j < top) v += c[j] * term[j + 1];
                next[j] = scale * v;
                tmax = std::max(tmax, std::abs(next[j]));
            }
            for (int j = 0; j <= top; ++j) {
                term[j] = next[j];
                x[j] += next[j];
            }
            if (tmax <= 1e-18 * ymax || tmax == 0.0) break;
        }
        remaining -= h;
        retire();
    }
}

} // namespace

std::string loss_name(LossKind kind)
{
    return kind == LossKind::tpa ? "tpa" : "single_photon";
}

LossKind parse_loss(const std::string& name)
{
    if (name == "tpa") return LossKind::tpa;
    if (name == "single_photon") return LossKind::single_photon;
    throw InvalidSpec("unknown loss '" + name + "' (expected tpa or single_photon)");
}

double LossGenerator::rate(int n, int m) const noexcept
{
    if (kind_ == LossKind::tpa) return 0.25 * (static_cast<double>(n) * (n - 1) + static_cast<double>(m) * (m - 1));
    return 0.5 * (n + m);
}

double LossGenerator::coupling(int n, int m) const noexcept
{
    if (kind_ == LossKind::tpa) {
        return 0.5 * std::sqrt((n + 2.0) * (n + 1.0) * (m + 2.0) * (m + 1.0));
    }
    return std::sqrt((n + 1.0) * (m + 1.0));
}

Absorbance::Absorbance(double value) : value_(value)
{
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw InvalidSpec("absorbance must be finite and >= 0");
    }
}

CMatrix generator_apply(const LossGenerator& gen, const CMatrix& rho)
{
    require_same_dim(gen, rho.rows(), rho.cols());
    const int d = gen.basis().dim();
    const int s = gen.step();
    CMatrix out(d, d);
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            Complex v = -gen.rate(n, m) * rho(n, m);
            if (n + s < d && m + s < d) v += gen.coupling(n, m) * rho(n + s, m + s);
            out(n, m) = v;
        }
    }
    return out;
}

CMatrix generator_apply(const LossGenerator& gen, const DensityMatrix& rho)
{
    return generator_apply(gen, rho.matrix());
}

DensityMatrix propagate(const LossGenerator& gen, const DensityMatrix& rho0, Absorbance eps)
{
    const CMatrix& in = rho0.matrix();
    require_same_dim(gen, in.rows(), in.cols());
    const int d = gen.basis().dim();
    const double top = rho0.population(d - 1) + rho0.population(d - 2);
    if (top > rho0.basis().tail_tol()) {
        std::ostringstream msg;
        msg << "population " << top << " in the top two Fock levels exceeds tail_tol "
            << rho0.basis().tail_tol() << "; loss flux through the truncation edge is not bounded";
        throw TruncationError(msg.str());
    }

    const int s = gen.step();
    CMatrix out = CMatrix::Zero(d, d);
    std::vector<Complex> x;
    std::vector<double> k, c;
    // Upper-triangle chains start at (n0, m0) with n0 < s, m0 >= n0.
    for (int n0 = 0; n0 < s; ++n0) {
        for (int m0 = n0; m0 < d; ++m0) {
            const int len = (d - 1 - m0) / s + 1;
            x.resize(len);
            k.resize(len);
            c.resize(len);
            for (int j = 0; j < len; ++j) {
                const int n = n0 + j * s, m = m0 + j * s;
                x[j] = in(n, m);
                k[j] = gen.rate(n, m);
                c[j] = gen.coupling(n, m);
            }
            propagate_chain(x, k, c, eps.value());
            for (int j = 0; j < len; ++j) {
                const int n = n0 + j * s, m = m0 + j * s;
                if (n == m) {
                    out(n, n) = x[j].real();
                } else {
                    out(n, m) = x[j];
                    out(m, n) = std::conj(x[j]);
                }
            }
        }
    }
    return DensityMatrix::from_matrix(rho0.basis(), std::move(out));
}

DensityMatrix propagate_dense(const LossGenerator& gen, const DensityMatrix& rho0, Absorbance eps)
{
    const CMatrix& in = rho0.matrix();
    require_same_dim(gen, in.rows(), in.cols());
    const int d = gen.basis().dim();
    const int s = gen.step();
    const Eigen::Index big = static_cast<Eigen::Index>(d) * d;
    // Column-major vectorisation: index(n, m) = n + d*m. The generator has
    // real coefficients, so real and imaginary parts evolve independently.
    RMatrix super = RMatrix::Zero(big, big);
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            const Eigen::Index row = n + static_cast<Eigen::Index>(d) * m;
            super(row, row) = -gen.rate(n, m);
            if (n + s < d && m + s < d) {
                super(row, (n + s) + static_cast<Eigen::Index>(d) * (m + s)) = gen.coupling(n, m);
            }
        }
    }
    const RMatrix prop = (eps.value() * super).exp();
    const RMatrix re_m = in.real();
    const RMatrix im_m = in.imag();
    const RVector out_re = prop * Eigen::Map<const RVector>(re_m.data(), big);
    const RVector out_im = prop * Eigen::Map<const RVector>(im_m.data(), big);
    CMatrix out(d, d);
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            const Eigen::Index idx = n + static_cast<Eigen::Index>(d) * m;
            out(n, m) = Complex(out_re(idx), out_im(idx));
        }
    }
    out = (0.5 * (out + out.adjoint())).eval();
    return DensityMatrix::from_matrix(rho0.basis(), std::move(out));
}

double photon_flux(const LossGenerator& gen, const DensityMatrix& rho)
{
    require_same_dim(gen, rho.dim(), rho.dim());
    const int d = gen.basis().dim();
    const int s = gen.step();
    double flux = 0.0;
    for (int n = 0; n < d; ++n) {
        double dp = -gen.rate(n, n) * rho.population(n);
        if (n + s < d) dp += gen.coupling(n, n) * rho.population(n + s);
        flux += n * dp;
    }
    return flux;
}

} // namespace tpa
