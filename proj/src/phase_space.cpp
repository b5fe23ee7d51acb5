#include "tpa/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

namespace tpa {

namespace {

constexpr double kRescaleAbove = 1e150;
const double kLogRescale = std::log(kRescaleAbove);

void check_edges(const RVector& f, const char* what)
{
    const double peak = f.cwiseAbs().maxCoeff();
    if (peak == 0.0) return;
    const double edge = std::max(std::abs(f(0)), std::abs(f(f.size() - 1)));
    if (edge > 1e-10 * peak) {
        std::ostringstream msg;
        msg << what << " at the grid edge is " << edge / peak << " of its peak (limit 1e-10)";
        throw GridTooNarrow(msg.str());
    }
}

} // namespace

QuadratureGrid::QuadratureGrid(double min, double max, int points) : min_(min), max_(max), points_(points)
{
    if (!(min < max) || !std::isfinite(min) || !std::isfinite(max)) {
        throw InvalidSpec("quadrature grid needs finite min < max");
    }
    if (points < 101 || points % 2 == 0) {
        throw InvalidSpec("quadrature grid needs an odd number of points >= 101, got " + std::to_string(points));
    }
}

RVector QuadratureGrid::values() const
{
    RVector v(points_);
    for (int i = 0; i < points_; ++i) v(i) = at(i);
    return v;
}

QuadratureGrid default_phase_space_grid(double nbar, int points)
{
    const double half = 4.0 + 7.0 * std::sqrt(2.0 * nbar + 1.0);
    return QuadratureGrid(-half, half, points);
}

double simpson(const RVector& f, double h)
{
    const Eigen::Index n = f.size();
    if (n < 3 || n % 2 == 0) throw InvalidSpec("Simpson rule needs an odd number (>= 3) of samples");
    double s = f(0) + f(n - 1);
    for (Eigen::Index i = 1; i < n - 1; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f(i);
    return s * h / 3.0;
}

RMatrix hermite_functions(const RVector& x, int count)
{
    RMatrix psi(x.size(), count);
    const double log_pi_quarter = 0.25 * std::log(std::numbers::pi);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double xi = x(i);
        double logscale = -0.5 * xi * xi - log_pi_quarter;
        double prev = 0.0, cur = 1.0;
        psi(i, 0) = std::exp(logscale);
        for (int n = 0; n + 1 < count; ++n) {
            const double next = std::sqrt(2.0 / (n + 1)) * xi * cur - std::sqrt(static_cast<double>(n) / (n + 1)) * prev;
            prev = cur;
            cur = next;
            if (std::abs(cur) > kRescaleAbove) {
                prev /= kRescaleAbove;
                cur /= kRescaleAbove;
                logscale += kLogRescale;
            }
            psi(i, n + 1) = cur == 0.0 ? 0.0 : std::copysign(std::exp(logscale + std::log(std::abs(cur))), cur);
        }
    }
    return psi;
}

// W = (1/π) Σ_m (−1)^m [ f_m^(0) ρ_mm + 2 Σ_{k≥1} Re(f_m^(k) e^{ikφ} ρ_{m,m+k}) ]
// with f_m^(k)(x) = √(m!/(m+k)!) x^{k/2} e^{−x/2} L_m^(k)(x), x = 2(q²+p²),
// φ = atan2(p, q). f obeys a normalised Laguerre recurrence in m:
//   f_{m+1} = [(2m+1+k−x) f_m − √(m(m+k)) f_{m−1}] / √((m+1)(m+1+k))
class WignerKernel {
public:
    explicit WignerKernel(const DensityMatrix& rho) : d_(rho.dim())
    {
        const CMatrix& r = rho.matrix();
        offsets_.resize(d_ + 1);
        int total = 0;
        for (int k = 0; k < d_; ++k) {
            offsets_[k] = total;
            total += d_ - k;
        }
        offsets_[d_] = total;
        re_.resize(total);
        im_.resize(total);
        inv_norm_.resize(total);
        back_.resize(total);
        for (int k = 0; k < d_; ++k) {
            for (int m = 0; m + k < d_; ++m) {
                const int i = offsets_[k] + m;
                const double sign = (m % 2 == 0) ? 1.0 : -1.0;
                const double weight = k == 0 ? 1.0 : 2.0;
                re_[i] = sign * weight * r(m, m + k).real();
                im_[i] = sign * weight * r(m, m + k).imag();
                inv_norm_[i] = 1.0 / std::sqrt((m + 1.0) * (m + 1.0 + k));
                back_[i] = std::sqrt(static_cast<double>(m) * (m + k));
            }
        }
    }

    double operator()(double q, double p) const
    {
        const double x = 2.0 * (q * q + p * p);
        const double phi = std::atan2(p, q);
        const double log_x = x > 0.0 ? std::log(x) : 0.0;
        double total = 0.0;
        for (int k = 0; k < d_; ++k) {
            if (x == 0.0 && k > 0) break;
            double logscale = 0.5 * k * log_x - 0.5 * x - 0.5 * std::lgamma(k + 1.0);
            const int base = offsets_[k];
            const int len = d_ - k;
            double prev = 0.0, cur = 1.0;
            double acc_re = 0.0, acc_im = 0.0, sum_re = 0.0, sum_im = 0.0;
            for (int m = 0; m < len; ++m) {
                acc_re += cur * re_[base + m];
                acc_im += cur * im_[base + m];
                const double next = ((2.0 * m + 1.0 + k - x) * cur - back_[base + m] * prev) * inv_norm_[base + m];
                prev = cur;
                cur = next;
                if (std::abs(cur) > kRescaleAbove) {
                    const double s = std::exp(logscale);
                    sum_re += acc_re * s;
                    sum_im += acc_im * s;
                    acc_re = acc_im = 0.0;
                    prev /= kRescaleAbove;
                    cur /= kRescaleAbove;
                    logscale += kLogRescale;
                }
            }
            const double s = std::exp(logscale);
            sum_re += acc_re * s;
            sum_im += acc_im * s;
            // Re(e^{ikφ}(a + ib)) = cos(kφ)a − sin(kφ)b
            total += k == 0 ? sum_re : std::cos(k * phi) * sum_re - std::sin(k * phi) * sum_im;
        }
        return total / std::numbers::pi;
    }

private:
    int d_;
    std::vector<int> offsets_;
    std::vector<double> re_, im_, inv_norm_, back_;
};

double wigner_at(const DensityMatrix& rho, double q, double p) { return WignerKernel(rho)(q, p); }

PhaseSpaceField wigner(const DensityMatrix& rho, const QuadratureGrid& q, const QuadratureGrid& p)
{
    const WignerKernel kernel(rho);
    RMatrix w(q.points(), p.points());
    for (int i = 0; i < q.points(); ++i) {
        for (int j = 0; j < p.points(); ++j) w(i, j) = kernel(q.at(i), p.at(j));
    }
    const double peak = w.cwiseAbs().maxCoeff();
    double edge = 0.0;
    for (int i = 0; i < q.points(); ++i) edge = std::max({edge, std::abs(w(i, 0)), std::abs(w(i, p.points() - 1))});
    for (int j = 0; j < p.points(); ++j) edge = std::max({edge, std::abs(w(0, j)), std::abs(w(q.points() - 1, j))});
    if (peak > 0.0 && edge > 1e-10 * peak) {
        std::ostringstream msg;
        msg << "Wigner function at the grid boundary is " << edge / peak << " of its peak (limit 1e-10)";
        throw GridTooNarrow(msg.str());
    }
    return {q, p, std::move(w)};
}

double wigner_displaced_parity(const DensityMatrix& rho, double q, double p)
{
    const int d = rho.dim();
    const Complex beta(q / std::numbers::sqrt2, p / std::numbers::sqrt2);
    const double b = std::abs(beta);
    const int big = d + static_cast<int>(std::ceil(b * b + 12.0 * b)) + 40;
    CMatrix a = CMatrix::Zero(big, big);
    for (int n = 1; n < big; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    // D(−β) = exp(−β a† + β* a)
    const CMatrix gen = -beta * a.adjoint() + std::conj(beta) * a;
    const CMatrix disp = gen.exp().leftCols(d);
    const CMatrix moved = disp * rho.matrix() * disp.adjoint();
    double w = 0.0;
    for (int k = 0; k < big - 20; ++k) w += ((k % 2 == 0) ? 1.0 : -1.0) * moved(k, k).real();
    return w / std::numbers::pi;
}

double negativity_volume(const PhaseSpaceField& field)
{
    const RMatrix& w = field.values;
    double s = 0.0;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        const double wi = (i == 0 || i == w.rows() - 1) ? 0.5 : 1.0;
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            const double wj = (j == 0 || j == w.cols() - 1) ? 0.5 : 1.0;
            const double v = w(i, j);
            if (v < 0.0) s += wi * wj * (-v);
        }
    }
    return s * field.q.step() * field.p.step();
}

RVector integrate_out_p(const PhaseSpaceField& field)
{
    RVector out(field.q.points());
    for (int i = 0; i < field.q.points(); ++i) out(i) = simpson(field.values.row(i).transpose(), field.p.step());
    return out;
}

QuadratureMoments quadrature_moments(const DensityMatrix& rho, double theta)
{
    const CMatrix& r = rho.matrix();
    const int d = rho.dim();
    Complex a1 = 0.0, a2 = 0.0;
    for (int n = 0; n + 1 < d; ++n) a1 += std::sqrt(n + 1.0) * r(n + 1, n);
    for (int n = 0; n + 2 < d; ++n) a2 += std::sqrt((n + 1.0) * (n + 2.0)) * r(n + 2, n);
    const Complex phase = std::polar(1.0, -theta);
    const double tr = rho.trace();
    const double mean = std::numbers::sqrt2 * (phase * a1).real();
    const double second = (phase * phase * a2).real() + rho.mean_photon() + 0.5 * tr;
    const double var = std::max(second - mean * mean, 0.0);
    return {mean, std::sqrt(var)};
}

QuadratureGrid quadrature_grid_for(const DensityMatrix& rho, double theta, double half_width_sd, int points)
{
    const auto [mean, sd] = quadrature_moments(rho, theta);
    const double half = half_width_sd * std::max(sd, 1e-6);
    return QuadratureGrid(mean - half, mean + half, points);
}

MarginalDistribution quadrature_pdf(const DensityMatrix& rho, double theta, const QuadratureGrid& grid,
                                    const LossGenerator& gen)
{
    const int d = rho.dim();
    const CMatrix drho = generator_apply(gen, rho);
    // Re of the phase-rotated matrices: ρ̃_mn = e^{−iθ(m−n)} ρ_mn.
    RMatrix rot(d, d), drot(d, d);
    for (int n = 0; n < d; ++n) {
        for (int m = 0; m < d; ++m) {
            const Complex ph = std::polar(1.0, -theta * (m - n));
            rot(m, n) = (ph * rho.matrix()(m, n)).real();
            drot(m, n) = (ph * drho(m, n)).real();
        }
    }
    const RMatrix psi = hermite_functions(grid.values(), d);
    RVector density = (psi * rot).cwiseProduct(psi).rowwise().sum();
    RVector derivative = (psi * drot).cwiseProduct(psi).rowwise().sum();
    check_edges(density, "quadrature density");
    return {grid, std::move(density), std::move(derivative)};
}

MarginalDistribution quadrature_pdf(const DensityMatrix& rho, double theta, const QuadratureGrid& grid)
{
    return quadrature_pdf(rho, theta, grid, tpa_generator(rho.basis()));
}

void write_csv(const PhaseSpaceField& field, std::ostream& out)
{
    out << "q,p,W\n";
    char buf[96];
    for (int i = 0; i < field.q.points(); ++i) {
        for (int j = 0; j < field.p.points(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", field.q.at(i), field.p.at(j), field.values(i, j));
            out << buf;
        }
    }
}

namespace {
constexpr char kMagic[8] = {'T', 'P', 'A', 'W', 'I', 'G', 'N', '1'};

template <class T> void put(std::ostream& out, T v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }
template <class T> T get(std::istream& in)
{
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw IoError("truncated Wigner binary");
    return v;
}
} // namespace

void write_binary(const PhaseSpaceField& field, std::ostream& out)
{
    out.write(kMagic, sizeof kMagic);
    put<std::int64_t>(out, field.q.points());
    put<std::int64_t>(out, field.p.points());
    put(out, field.q.min());
    put(out, field.q.max());
    put(out, field.p.min());
    put(out, field.p.max());
    for (int i = 0; i < field.q.points(); ++i) {
        for (int j = 0; j < field.p.points(); ++j) put(out, field.values(i, j));
    }
    if (!out) throw IoError("failed writing Wigner binary");
}

PhaseSpaceField read_binary(std::istream& in)
{
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw IoError("not a Wigner binary (bad magic)");
    const auto nq = get<std::int64_t>(in);
    const auto np = get<std::int64_t>(in);
    const double qmin = get<double>(in), qmax = get<double>(in);
    const double pmin = get<double>(in), pmax = get<double>(in);
    QuadratureGrid q(qmin, qmax, static_cast<int>(nq));
    QuadratureGrid p(pmin, pmax, static_cast<int>(np));
    RMatrix w(nq, np);
    for (std::int64_t i = 0; i < nq; ++i) {
        for (std::int64_t j = 0; j < np; ++j) w(i, j) = get<double>(in);
    }
    return {q, p, std::move(w)};
}

} // namespace tpa
