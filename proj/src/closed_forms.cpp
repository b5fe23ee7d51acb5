#include "tpa/closed_forms.hpp"

#include <cmath>

namespace tpa {

namespace {

void require_photons(double n)
{
    if (!(n > 0.0)) throw ZeroPhotons("sensitivity needs a positive mean photon number, got " + std::to_string(n));
}

void require_nonnegative(double x, const char* what)
{
    if (!(x >= 0.0)) throw InvalidSpec(std::string(what) + " must be >= 0");
}

} // namespace

double qfi_coherent_exact(double n)
{
    require_nonnegative(n, "n_alpha");
    return n * n * n + 0.5 * n * n;
}

double dvar_photon_squeezed(double n)
{
    require_photons(n);
    return (2.0 / n) * (1.0 + n) / ((1.0 + 3.0 * n) * (1.0 + 3.0 * n));
}

double dvar_photon_coherent(double n)
{
    require_photons(n);
    return 1.0 / (n * n * n);
}

double cfi_quad_squeezed(double r, SqueezedAxis axis)
{
    require_nonnegative(r, "r");
    const double s2 = std::sinh(r) * std::sinh(r);
    const double e2 = std::exp(2 * r), e4 = e2 * e2, e6 = e4 * e2, e8 = e4 * e4;
    if (axis == SqueezedAxis::squeezed_q) {
        return std::exp(-2 * r) * s2 / 8.0 * (4 * e8 - 12 * e6 + 33 * e4 - 42 * e2 + 21);
    }
    return std::exp(-6 * r) * s2 / 8.0 * (21 * e8 - 42 * e6 + 33 * e4 - 12 * e2 + 4);
}

double cfi_quad_coherent(double n, CoherentAxis axis)
{
    require_nonnegative(n, "n_alpha");
    return axis == CoherentAxis::aligned ? n * n * n + 0.5 * n * n : 0.5 * n * n;
}

double shg_qfi(const StateSpec& spec, double g)
{
    const double n = spec.mean_photon();
    switch (spec.family()) {
    case Family::coherent: return 4 * g * g * n * n;
    case Family::squeezed_vacuum: return 4 * g * g * n * (1 + 3 * n);
    case Family::fock: break;
    }
    throw UnsupportedFamily("SHG benchmark is defined for coherent and squeezed_vacuum inputs");
}

double cross_section(const CrossSectionInputs& in)
{
    if (!(in.density > 0.0) || !(in.length > 0.0) || !(in.epsilon >= 0.0)) {
        throw NonPositiveInput("cross section needs density > 0, length > 0 and epsilon >= 0");
    }
    return in.epsilon / (in.density * in.length);
}

double mean_photon_first_order(const StateSpec& spec, Absorbance eps)
{
    const double n = spec.mean_photon();
    const double e = eps.value();
    switch (spec.family()) {
    case Family::coherent: return n - e * n * n;
    case Family::squeezed_vacuum: return n - e * n * (1 + 3 * n);
    case Family::fock: break;
    }
    throw UnsupportedFamily("first-order mean photon number is given for coherent and squeezed_vacuum inputs");
}

} // namespace tpa
