#include "doctest.h"

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "tpa/dynamics.hpp"

using namespace tpa;

namespace {

CMatrix ket_bra(int dim, int n, int m)
{
    CMatrix x = CMatrix::Zero(dim, dim);
    x(n, m) = 1.0;
    return x;
}

// LρL† − ½{L†L, ρ} from explicit operator products.
CMatrix lindblad_oracle(const CMatrix& L, const CMatrix& rho)
{
    const CMatrix LdL = L.adjoint() * L;
    return L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL);
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("generator on Fock projectors")
{
    const FockBasis b(8);
    const auto gen = tpa_generator(b);
    CHECK(max_abs(generator_apply(gen, ket_bra(8, 0, 0))) == 0.0);
    CHECK(max_abs(generator_apply(gen, ket_bra(8, 1, 1))) == 0.0);
    CHECK(max_abs(generator_apply(gen, ket_bra(8, 0, 1))) == 0.0);
    const CMatrix expected = ket_bra(8, 0, 0) - ket_bra(8, 2, 2);
    CHECK(max_abs(generator_apply(gen, ket_bra(8, 2, 2)) - expected) < 1e-15);

    const auto one = single_photon_generator(b);
    CHECK(max_abs(generator_apply(one, ket_bra(8, 1, 1)) - (ket_bra(8, 0, 0) - ket_bra(8, 1, 1))) < 1e-15);
}

TEST_CASE("generator matches the operator form of the master equation")
{
    const FockBasis b(16);
    const CMatrix a = oracle::ladder(16);
    for (unsigned seed : {1u, 2u, 3u}) {
        const auto rho = oracle::random_state(b, 14, seed, 4);
        const CMatrix ref2 = lindblad_oracle(a * a / std::sqrt(2.0), rho.matrix());
        const CMatrix got2 = generator_apply(tpa_generator(b), rho);
        CHECK(max_abs(ref2 - got2) < 1e-12);
        CHECK(max_abs(got2 - got2.adjoint()) < 1e-13);
        CHECK(std::abs(got2.trace()) < 1e-13);

        const CMatrix ref1 = lindblad_oracle(a, rho.matrix());
        CHECK(max_abs(ref1 - generator_apply(single_photon_generator(b), rho)) < 1e-12);
    }
}

TEST_CASE("generator in the squeezed frame")
{
    // S†ℒ(S|0⟩⟨0|S†)S for r=1 in a padded basis.
    const int big = 200;
    const double r = 1.0, s = std::sinh(r), c = std::cosh(r);
    const CMatrix a = oracle::ladder(big);
    const CMatrix S = (0.5 * r * (a * a - a.adjoint() * a.adjoint())).exp();
    const CMatrix rho0 = S.col(0) * S.col(0).adjoint();
    const CMatrix l = generator_apply(tpa_generator(FockBasis(big)), rho0);
    const CMatrix back = S.adjoint() * l * S;
    CHECK(back(2, 2).real() == doctest::Approx(std::pow(s, 4)).epsilon(1e-9));
    CHECK(std::abs(back(0, 2)) == doctest::Approx(std::sqrt(2.0) / 4 * c * s * (c * c + 3 * s * s)).epsilon(1e-9));
    CHECK(back(0, 4).real() == doctest::Approx(-std::sqrt(6.0) / 2 * s * s * c * c).epsilon(1e-9));
    CHECK(std::abs(back(0, 4)) == doctest::Approx(4.028).epsilon(1e-3));
}

TEST_CASE("chain propagation matches the dense superoperator exponential")
{
    for (auto kind : {LossKind::tpa, LossKind::single_photon}) {
        const FockBasis b(12);
        const LossGenerator gen(kind, b);
        for (unsigned seed : {7u, 8u}) {
            const auto rho = oracle::random_state(b, 10, seed);
            for (double eps : {0.0, 1e-3, 0.3, 2.5}) {
                const auto fast = propagate(gen, rho, Absorbance(eps));
                const auto dense = propagate_dense(gen, rho, Absorbance(eps));
                CHECK(max_abs(fast.matrix() - dense.matrix()) < 1e-12);
            }
        }
    }
}

TEST_CASE("single-photon loss keeps coherent states coherent")
{
    const Complex alpha(1.5, 0.7);
    const FockBasis b(48);
    const auto rho = make_state(StateSpec::coherent(alpha), b);
    const double eps = 0.6;
    const auto out = propagate(single_photon_generator(b), rho, Absorbance(eps));
    const auto ref = make_state(StateSpec::coherent(alpha * std::exp(-eps / 2)), b);
    CHECK(max_abs(out.matrix() - ref.matrix()) < 1e-12);
}

TEST_CASE("trace, positivity and parity along the evolution")
{
    const auto spec = StateSpec::squeezed_vacuum(1.0);
    const auto rho = make_state(spec, auto_basis(spec));
    const auto gen = tpa_generator(rho.basis());
    for (double eps : {0.0, 1e-4, 0.01, 0.1, 1.0, 10.0}) {
        const auto out = propagate(gen, rho, Absorbance(eps));
        CHECK(std::abs(out.trace() - rho.trace()) < 1e-10);
        CHECK(out.min_eigenvalue() > -1e-9);
        for (int k = 1; k < out.dim(); k += 2) CHECK(std::abs(out.population(k)) < 1e-12);
    }
    const auto coh = make_state(StateSpec::coherent(2.0), FockBasis(48));
    for (double eps : {0.5, 10.0}) {
        CHECK(std::abs(propagate(tpa_generator(coh.basis()), coh, Absorbance(eps)).trace() - coh.trace()) < 1e-10);
    }
}

TEST_CASE("semigroup property")
{
    const FockBasis b(24);
    const auto gen = tpa_generator(b);
    const auto rho = oracle::random_state(b, 20, 11);
    for (auto [e1, e2] : {std::pair{0.1, 0.2}, std::pair{1e-3, 2.0}, std::pair{3.0, 4.0}}) {
        const auto whole = propagate(gen, rho, Absorbance(e1 + e2));
        const auto split = propagate(gen, propagate(gen, rho, Absorbance(e1)), Absorbance(e2));
        CHECK(max_abs(whole.matrix() - split.matrix()) < 1e-9);
    }
}

TEST_CASE("dark subspace is a fixed point")
{
    const FockBasis b(10);
    CMatrix m = CMatrix::Zero(10, 10);
    m(0, 0) = 0.3;
    m(1, 1) = 0.7;
    m(0, 1) = Complex(0.2, -0.3);
    m(1, 0) = std::conj(m(0, 1));
    const auto rho = DensityMatrix::from_matrix(b, m);
    for (double eps : {0.1, 1.0, 50.0}) {
        CHECK(max_abs(propagate(tpa_generator(b), rho, Absorbance(eps)).matrix() - m) < 1e-12);
    }
}

TEST_CASE("first-order consistency with the generator")
{
    const FockBasis b(20);
    const auto gen = tpa_generator(b);
    const auto rho = oracle::random_state(b, 16, 5);
    const CMatrix drho = generator_apply(gen, rho);
    double prev = 0.0;
    for (double h : {1e-4, 1e-5, 1e-6}) {
        const CMatrix fd = (propagate(gen, rho, Absorbance(h)).matrix() - rho.matrix()) / h;
        const double err = max_abs(fd - drho);
        if (prev > 0.0) CHECK(std::log10(prev / err) >= 0.9);
        prev = err;
    }
}

TEST_CASE("long-time limit lives on the dark subspace")
{
    const auto spec = StateSpec::coherent(Complex(1.5, 0.5));
    const auto rho = make_state(spec, auto_basis(spec));
    const auto out = propagate(tpa_generator(rho.basis()), rho, Absorbance(1e4));
    CHECK(out.population(0) + out.population(1) == doctest::Approx(rho.trace()).epsilon(1e-9));
    CHECK(std::abs(out.matrix()(0, 1)) > 1e-3);
}

TEST_CASE("small-absorbance mean photon number")
{
    const auto spec = StateSpec::squeezed_vacuum(1.0);
    const auto rho = make_state(spec, auto_basis(spec));
    const double nr = spec.mean_photon();
    const double eps = 1e-4;
    const double n_eps = propagate(tpa_generator(rho.basis()), rho, Absorbance(eps)).mean_photon();
    CHECK(std::abs(n_eps - (nr - eps * nr * (1 + 3 * nr))) < 1e-6);

    const double alpha2 = 3.0;
    const auto coh = make_state(StateSpec::coherent(std::sqrt(alpha2)), FockBasis(48));
    const auto gen = tpa_generator(coh.basis());
    const double h = 1e-6;
    const double slope = (propagate(gen, coh, Absorbance(h)).mean_photon() -
                          propagate(gen, coh, Absorbance(0.0)).mean_photon()) / h;
    CHECK(slope == doctest::Approx(-alpha2 * alpha2).epsilon(1e-4));
}

TEST_CASE("photon flux")
{
    const FockBasis b(48);
    CHECK(photon_flux(tpa_generator(b), make_state(StateSpec::fock(0), b)) == 0.0);
    const auto coh = make_state(StateSpec::coherent(std::sqrt(2.0)), b);
    CHECK(photon_flux(tpa_generator(b), coh) == doctest::Approx(-4.0).epsilon(1e-10));

    const auto spec = StateSpec::squeezed_vacuum(1.0);
    const auto sq = make_state(spec, auto_basis(spec));
    const double nr = spec.mean_photon();
    CHECK(photon_flux(tpa_generator(sq.basis()), sq) == doctest::Approx(-nr * (1 + 3 * nr)).epsilon(1e-6));
    CHECK(nr * (1 + 3 * nr) == doctest::Approx(7.1034).epsilon(1e-4));

    const CMatrix a = oracle::ladder(sq.dim());
    const double moment = expectation(sq, {sq.basis(), a.adjoint() * a.adjoint() * a * a}).real();
    CHECK(std::abs(photon_flux(tpa_generator(sq.basis()), sq) + moment) < 1e-10);
}

TEST_CASE("dynamics errors")
{
    const auto rho = make_state(StateSpec::fock(2), FockBasis(8));
    CHECK_THROWS_AS(generator_apply(tpa_generator(FockBasis(10)), rho), DimensionMismatch);
    CHECK_THROWS_AS(propagate(tpa_generator(FockBasis(10)), rho, Absorbance(0.1)), DimensionMismatch);
    CHECK_THROWS_AS(photon_flux(tpa_generator(FockBasis(10)), rho), DimensionMismatch);
    CHECK_THROWS_AS(Absorbance{-1e-3}, InvalidSpec);
    CHECK_THROWS_AS(Absorbance{std::nan("")}, InvalidSpec);
    CHECK_THROWS_AS(Absorbance{std::numeric_limits<double>::infinity()}, InvalidSpec);

    const auto edge = DensityMatrix::from_matrix(FockBasis(8), ket_bra(8, 6, 6));
    CHECK_THROWS_AS(propagate(tpa_generator(FockBasis(8)), edge, Absorbance(0.1)), TruncationError);
}
