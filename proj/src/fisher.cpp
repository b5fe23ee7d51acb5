#include "tpa/fisher.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace tpa {

namespace {

const char* kind_name(MeasurementKind kind)
{
    switch (kind) {
    case MeasurementKind::qfi: return "qfi";
    case MeasurementKind::photon_number: return "photon_number";
    case MeasurementKind::quadrature: return "quadrature";
    case MeasurementKind::mean_photon_sensitivity: return "mean_photon_sensitivity";
    case MeasurementKind::negativity: return "negativity";
    case MeasurementKind::exponent: return "exponent";
    }
    return "?";
}

std::string strip(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    }
    return out;
}

double parse_number(const std::string& s, const std::string& whole)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty() || !std::isfinite(v)) {
        throw InvalidSpec("cannot read angle in measurement '" + whole + "'");
    }
    return v;
}

// "0.3", "pi", "-pi/2", "0.25*pi", "3pi/4"
double parse_angle(const std::string& raw, const std::string& whole)
{
    const std::string s = strip(raw);
    const auto at = s.find("pi");
    if (at == std::string::npos) return parse_number(s, whole);
    std::string pre = s.substr(0, at);
    std::string post = s.substr(at + 2);
    if (!pre.empty() && pre.back() == '*') pre.pop_back();
    double factor = 1.0;
    if (pre == "-") factor = -1.0;
    else if (pre == "+") factor = 1.0;
    else if (!pre.empty()) factor = parse_number(pre, whole);
    double divisor = 1.0;
    if (!post.empty()) {
        if (post[0] != '/') throw InvalidSpec("cannot read angle in measurement '" + whole + "'");
        divisor = parse_number(post.substr(1), whole);
        if (divisor == 0.0) throw InvalidSpec("zero divisor in measurement '" + whole + "'");
    }
    return factor * std::numbers::pi / divisor;
}

void require_positive_curve(const std::vector<std::pair<double, double>>& curve, std::size_t need)
{
    if (curve.size() < need) {
        throw InsufficientPoints("need at least " + std::to_string(need) + " points, got " +
                                 std::to_string(curve.size()));
    }
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (!(curve[i].first > 0.0) || !(curve[i].second > 0.0)) {
            throw InsufficientPoints("log-log analysis needs positive n and F at every point");
        }
        if (i > 0 && !(curve[i].first > curve[i - 1].first)) {
            throw InsufficientPoints("photon numbers must be strictly increasing");
        }
    }
}

double family_phase(const StateSpec& spec)
{
    switch (spec.family()) {
    case Family::coherent: return std::arg(spec.as<CoherentParams>().alpha);
    case Family::squeezed_vacuum: return spec.as<SqueezedParams>().phi;
    case Family::fock: break;
    }
    throw UnsupportedFamily("scaling exponents need a continuous family (coherent or squeezed_vacuum)");
}

DensityMatrix evolved_state(const StateSpec& spec, Absorbance eps, const FockBasis& basis, LossKind loss)
{
    const DensityMatrix rho0 = make_state(spec, basis);
    if (eps.value() == 0.0) return rho0;
    return propagate(LossGenerator(loss, basis), rho0, eps);
}

} // namespace

SldResult compute_sld(const DensityMatrix& rho, const CMatrix& drho, double cutoff)
{
    const int d = rho.dim();
    if (drho.rows() != d || drho.cols() != d) {
        throw DimensionMismatch("derivative is " + std::to_string(drho.rows()) + "x" + std::to_string(drho.cols()) +
                                ", state has dimension " + std::to_string(d));
    }
    if (!(cutoff > 0.0)) throw InvalidSpec("SLD cutoff must be positive");
    const double scale = std::max(1.0, drho.cwiseAbs().maxCoeff());
    const double asym = (drho - drho.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale) {
        std::ostringstream msg;
        msg << "derivative deviates from hermiticity by " << asym;
        throw NonHermitianInput(msg.str());
    }
    const double tr = std::abs(drho.trace());
    if (tr >= 1e-10 * scale) {
        std::ostringstream msg;
        msg << "derivative trace " << tr << " is not zero";
        throw InvalidSpec(msg.str());
    }

    const Eigen::SelfAdjointEigenSolver<CMatrix> eig(rho.matrix());
    if (eig.info() != Eigen::Success) throw ConvergenceError("eigendecomposition of the state did not converge");
    const RVector& lambda = eig.eigenvalues();
    if (lambda.minCoeff() < -1e-8) {
        std::ostringstream msg;
        msg << "state has eigenvalue " << lambda.minCoeff() << " below -1e-8";
        throw NegativeState(msg.str());
    }
    const CMatrix& v = eig.eigenvectors();
    const CMatrix dm = v.adjoint() * drho * v;

    CMatrix l_eig(d, d);
    double qfi = 0.0, dropped = 0.0;
    for (int k = 0; k < d; ++k) {
        for (int l = 0; l < d; ++l) {
            const double sum = lambda(k) + lambda(l);
            const double w = std::norm(dm(l, k));
            const double denom = sum > cutoff ? sum : cutoff;
            if (sum <= cutoff) dropped += w;
            l_eig(l, k) = 2.0 * dm(l, k) / denom;
            qfi += 2.0 * w / denom;
        }
    }
    CMatrix sld = v * l_eig * v.adjoint();
    sld = (0.5 * (sld + sld.adjoint())).eval();
    return {QuantumOperator{rho.basis(), std::move(sld)}, qfi, cutoff, dropped};
}

std::string Measurement::name() const
{
    if (kind == MeasurementKind::exponent) return std::string("exponent:") + Measurement{inner, theta}.name();
    if (kind == MeasurementKind::quadrature) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "quadrature(%.17g)", theta);
        return buf;
    }
    return kind_name(kind);
}

Measurement Measurement::parse(const std::string& text)
{
    const std::string s = strip(text);
    const std::string prefix = "exponent:";
    if (s.rfind(prefix, 0) == 0) {
        const Measurement inner_m = parse(s.substr(prefix.size()));
        if (inner_m.kind == MeasurementKind::exponent || inner_m.kind == MeasurementKind::negativity) {
            throw InvalidSpec("exponent needs a Fisher-information measurement, got '" + text + "'");
        }
        return exponent_of(inner_m);
    }
    if (s == "qfi") return {MeasurementKind::qfi};
    if (s == "photon_number") return {MeasurementKind::photon_number};
    if (s == "mean_photon_sensitivity") return {MeasurementKind::mean_photon_sensitivity};
    if (s == "negativity") return {MeasurementKind::negativity};
    if (s == "quadrature" || s == "q") return quadrature_at(0.0);
    if (s == "p") return quadrature_at(std::numbers::pi / 2);
    if (s.rfind("quadrature(", 0) == 0 && s.back() == ')') {
        return quadrature_at(parse_angle(s.substr(11, s.size() - 12), text));
    }
    throw InvalidSpec("unknown measurement '" + text +
                      "' (expected qfi, photon_number, quadrature(<theta>), mean_photon_sensitivity, negativity "
                      "or exponent:<measurement>)");
}

FockBasis basis_for(const StateSpec& spec, const EvalOptions& options)
{
    if (options.dim) return FockBasis(*options.dim, options.tail_tol);
    return auto_basis(spec, options.tail_tol);
}

double cfi_photon_number(const DensityMatrix& rho, const LossGenerator& gen, double floor)
{
    if (rho.basis() != gen.basis()) throw DimensionMismatch("generator and state live on different bases");
    const int d = rho.dim();
    const int s = gen.step();
    const RVector p = rho.populations();
    const double threshold = floor * p.maxCoeff();
    double f = 0.0;
    for (int n = 0; n < d; ++n) {
        if (!(p(n) > threshold)) continue;
        double dp = -gen.rate(n, n) * p(n);
        if (n + s < d) dp += gen.coupling(n, n) * p(n + s);
        f += dp * dp / p(n);
    }
    return f;
}

QuadratureCfi cfi_quadrature_detail(const DensityMatrix& rho, const LossGenerator& gen, double theta,
                                    const QuadratureGrid& grid, double floor)
{
    const MarginalDistribution pdf = quadrature_pdf(rho, theta, grid, gen);
    const int n = grid.points();
    const double threshold = floor * pdf.density.maxCoeff();
    RVector f(n);
    for (int i = 0; i < n; ++i) {
        const double p = pdf.density(i);
        f(i) = p > threshold ? pdf.derivative(i) * pdf.derivative(i) / p : 0.0;
    }
    const double peak = f.maxCoeff();
    if (peak == 0.0) return {0.0, 0.0};
    const double edge = std::max(f(0), f(n - 1));
    if (edge > 1e-12 * peak) {
        std::ostringstream msg;
        msg << "Fisher integrand at the grid edge is " << edge / peak << " of its peak (limit 1e-12)";
        throw GridTooNarrow(msg.str());
    }
    const double h = grid.step();
    const double fine = simpson(f, h);
    double coarse;
    if ((n - 1) % 4 == 0) {
        RVector half(n / 2 + 1);
        for (int i = 0; i < half.size(); ++i) half(i) = f(2 * i);
        coarse = simpson(half, 2 * h);
    } else {
        coarse = h * (f.sum() - 0.5 * (f(0) + f(n - 1)));
    }
    const double change = std::abs(fine - coarse) / std::abs(fine);
    if (change > 1e-3) {
        std::ostringstream msg;
        msg << "doubling the quadrature step changes the CFI by " << change * 100 << "% (limit 0.1%)";
        throw ConvergenceError(msg.str());
    }
    return {fine, change};
}

double cfi_quadrature(const DensityMatrix& rho, const LossGenerator& gen, double theta, const QuadratureGrid& grid,
                      double floor)
{
    return cfi_quadrature_detail(rho, gen, theta, grid, floor).value;
}

double sensitivity_mean_photon(const DensityMatrix& rho, const LossGenerator& gen)
{
    const double signal = photon_flux(gen, rho);
    if (std::abs(signal) < 1e-14) {
        std::ostringstream msg;
        msg << "d<n>/d(epsilon) = " << signal << " vanishes; the mean photon number carries no information";
        throw ZeroSignal(msg.str());
    }
    return rho.photon_variance() / (signal * signal);
}

double sensitivity_mean_photon(const StateSpec& spec, Absorbance eps, const EvalOptions& options)
{
    const FockBasis basis = basis_for(spec, options);
    return sensitivity_mean_photon(evolved_state(spec, eps, basis, options.loss), LossGenerator(options.loss, basis));
}

FisherRecord qfi_tpa(const StateSpec& spec, Absorbance eps, const EvalOptions& options)
{
    return evaluate(spec, eps, {MeasurementKind::qfi}, options);
}

FisherRecord evaluate(const StateSpec& spec, Absorbance eps, const Measurement& m, const EvalOptions& options)
{
    FisherRecord rec{spec, eps, m, 0.0, 0, {}};
    if (m.kind == MeasurementKind::exponent) {
        rec.value = local_exponent(spec, eps, m.base(), options);
        rec.dim = basis_for(spec, options).dim();
        return rec;
    }
    if (m.kind == MeasurementKind::negativity) {
        EvalOptions tight = options;
        tight.tail_tol = std::min(options.tail_tol, kPhaseSpaceTailTol);
        const FockBasis basis = basis_for(spec, tight);
        const DensityMatrix rho = evolved_state(spec, eps, basis, options.loss);
        const QuadratureGrid g = default_phase_space_grid(spec.mean_photon(), options.wigner_points);
        const PhaseSpaceField field = wigner(rho, g, g);
        rec.value = negativity_volume(field);
        rec.dim = basis.dim();
        rec.diagnostics["wigner_min"] = field.values.minCoeff();
        rec.diagnostics["grid_half_width"] = g.max();
        return rec;
    }

    EvalOptions local = options;
    if (m.kind == MeasurementKind::quadrature) local.tail_tol = std::min(options.tail_tol, kQuadratureTailTol);
    const FockBasis basis = basis_for(spec, local);
    const LossGenerator gen(options.loss, basis);
    const DensityMatrix rho = evolved_state(spec, eps, basis, options.loss);
    rec.dim = basis.dim();
    rec.diagnostics["trace"] = rho.trace();
    switch (m.kind) {
    case MeasurementKind::qfi: {
        const SldResult sld = compute_sld(rho, generator_apply(gen, rho), options.cutoff);
        rec.value = sld.qfi;
        rec.diagnostics["dropped_weight"] = sld.dropped_weight;
        rec.diagnostics["rank_cutoff"] = sld.rank_cutoff;
        break;
    }
    case MeasurementKind::photon_number:
        rec.value = cfi_photon_number(rho, gen, options.floor);
        break;
    case MeasurementKind::quadrature: {
        // mean ± 10σ suits Gaussian marginals; after strong absorption the
        // marginal is a narrow core plus broad wings, so widen at fixed step
        // until the edge gates pass.
        QuadratureGrid g = quadrature_grid_for(rho, m.theta, options.grid_half_width_sd, options.grid_points);
        const double centre = 0.5 * (g.min() + g.max());
        const double step = g.step();
        for (;;) {
            try {
                const QuadratureCfi q = cfi_quadrature_detail(rho, gen, m.theta, g, options.floor);
                rec.value = q.value;
                rec.diagnostics["step_change"] = q.step_change;
                break;
            } catch (const GridTooNarrow&) {
                const double half = 0.75 * (g.max() - g.min());
                int intervals = 4 * static_cast<int>(std::ceil(half / (2.0 * step)));
                if (intervals + 1 > kMaxQuadraturePoints) throw;
                g = QuadratureGrid(centre - 0.5 * intervals * step, centre + 0.5 * intervals * step, intervals + 1);
            }
        }
        rec.diagnostics["grid_min"] = g.min();
        rec.diagnostics["grid_max"] = g.max();
        rec.diagnostics["grid_points"] = g.points();
        break;
    }
    case MeasurementKind::mean_photon_sensitivity:
        rec.value = sensitivity_mean_photon(rho, gen);
        break;
    default: break;
    }
    return rec;
}

double local_exponent(const StateSpec& spec, Absorbance eps, const Measurement& m, const EvalOptions& options)
{
    const double phase = family_phase(spec);
    const double nbar = spec.mean_photon();
    if (!(nbar > 0.0)) throw InsufficientPoints("scaling exponent needs a positive mean photon number");
    const double step = std::pow(10.0, kExponentHalfStepDecades);
    const double lo = evaluate(StateSpec::with_mean_photon(spec.family(), nbar / step, phase), eps, m, options).value;
    const double hi = evaluate(StateSpec::with_mean_photon(spec.family(), nbar * step, phase), eps, m, options).value;
    if (!(lo > 0.0) || !(hi > 0.0)) {
        throw InsufficientPoints("Fisher information is not positive around n = " + std::to_string(nbar));
    }
    return std::log(hi / lo) / (2.0 * kExponentHalfStepDecades * std::numbers::ln10);
}

double scaling_exponent(const std::vector<std::pair<double, double>>& curve, double at)
{
    require_positive_curve(curve, 3);
    if (!(at >= curve.front().first && at <= curve.back().first)) {
        throw InsufficientPoints("target photon number lies outside the sampled range");
    }
    // Window of three consecutive samples containing `at`, centred on it.
    const std::size_t n = curve.size();
    std::size_t hi = 1;
    while (hi < n - 1 && curve[hi].first < at) ++hi;
    std::size_t first = hi - 1;
    if (first + 2 >= n) first = n - 3;
    else if (first > 0 && std::abs(std::log(curve[first - 1].first / at)) < std::abs(std::log(curve[first + 2].first / at))) {
        --first;
    }
    double u[3], v[3];
    for (int i = 0; i < 3; ++i) {
        u[i] = std::log(curve[first + i].first);
        v[i] = std::log(curve[first + i].second);
    }
    auto interp = [&](double x) {
        double y = 0.0;
        for (int i = 0; i < 3; ++i) {
            double w = 1.0;
            for (int j = 0; j < 3; ++j) {
                if (j != i) w *= (x - u[j]) / (u[i] - u[j]);
            }
            y += w * v[i];
        }
        return y;
    };
    const double delta = kExponentHalfStepDecades * std::numbers::ln10;
    const double u0 = std::log(at);
    return (interp(u0 + delta) - interp(u0 - delta)) / (2.0 * delta);
}

double loglog_slope(const std::vector<std::pair<double, double>>& curve)
{
    require_positive_curve(curve, 2);
    double su = 0, sv = 0, suu = 0, suv = 0;
    const double n = static_cast<double>(curve.size());
    for (const auto& [x, y] : curve) {
        const double u = std::log(x), v = std::log(y);
        su += u;
        sv += v;
        suu += u * u;
        suv += u * v;
    }
    return (n * suv - su * sv) / (n * suu - su * su);
}

} // namespace tpa
