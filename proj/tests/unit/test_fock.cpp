#include "doctest.h"

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "tpa/fock.hpp"
#include "tpa/state_record.hpp"

using namespace tpa;

namespace {

double expect_re(const DensityMatrix& rho, const QuantumOperator& op) { return expectation(rho, op).real(); }

double variance(const DensityMatrix& rho, const QuantumOperator& op)
{
    const double m = expect_re(rho, op);
    return expect_re(rho, QuantumOperator{op.basis, op.elements * op.elements}) - m * m;
}

} // namespace

TEST_CASE("ladder operator elements")
{
    const FockBasis b(4);
    const auto a = annihilation_op(b).elements;
    CHECK(a(0, 1).real() == doctest::Approx(1.0));
    CHECK(a(1, 2).real() == doctest::Approx(std::sqrt(2.0)));
    CHECK(a(2, 3).real() == doctest::Approx(std::sqrt(3.0)));
    CHECK(a.col(0).norm() == 0.0);
    CHECK((a.cwiseAbs().sum() - (1.0 + std::sqrt(2.0) + std::sqrt(3.0))) == doctest::Approx(0.0));

    const auto ad = creation_op(b).elements;
    const CMatrix comm = a * ad - ad * a;
    CHECK((comm.topLeftCorner(3, 3) - CMatrix::Identity(3, 3)).norm() < 1e-14);
}

TEST_CASE("quadratures")
{
    const FockBasis b(12);
    const auto a = annihilation_op(b).elements;
    const CMatrix p_expected = (a - a.adjoint()) / (std::numbers::sqrt2 * Complex(0, 1));
    CHECK((quadrature_op(b, std::numbers::pi / 2).elements - p_expected).norm() < 1e-14);
    CHECK((quadrature_op(b, 0).elements - (a + a.adjoint()) / std::numbers::sqrt2).norm() < 1e-14);

    const auto vac = make_state(StateSpec::fock(0), b);
    for (double theta : {0.0, 0.4, 2.0}) {
        const auto q = quadrature_op(b, theta);
        CHECK(std::abs(expect_re(vac, q)) < 1e-15);
        CHECK(variance(vac, q) == doctest::Approx(0.5).epsilon(1e-14));
    }
}

TEST_CASE("squeezed vacuum quadrature variances")
{
    for (double r : {0.3, 0.7, 1.2}) {
        const auto spec = StateSpec::squeezed_vacuum(r);
        const auto rho = make_state(spec, auto_basis(spec));
        CHECK(variance(rho, quadrature_op(rho.basis(), 0)) == doctest::Approx(std::exp(-2 * r) / 2).epsilon(1e-6));
        CHECK(variance(rho, quadrature_op(rho.basis(), std::numbers::pi / 2)) ==
              doctest::Approx(std::exp(2 * r) / 2).epsilon(1e-6));
    }
    // With a squeezing phase the squeezed axis rotates to θ = φ/2.
    const double r = 0.8, phi = 1.1;
    const auto spec = StateSpec::squeezed_vacuum(r, phi);
    const auto rho = make_state(spec, auto_basis(spec));
    CHECK(variance(rho, quadrature_op(rho.basis(), phi / 2)) == doctest::Approx(std::exp(-2 * r) / 2).epsilon(1e-6));
}

TEST_CASE("analytic amplitudes agree with the exponentiated generators")
{
    const int keep = 48;
    for (auto [r, phi] : {std::pair{0.5, 0.0}, std::pair{1.0, 0.7}, std::pair{1.3, -2.0}}) {
        const CVector ref = oracle::squeezed_by_expm(r, phi, keep);
        const CVector got = fock_amplitudes(StateSpec::squeezed_vacuum(r, phi), keep);
        CHECK((ref - got).cwiseAbs().maxCoeff() < 1e-10);
    }
    for (Complex alpha : {Complex(2.0, 0.0), Complex(1.0, -1.5), Complex(0.0, 0.3)}) {
        const CVector ref = oracle::coherent_by_expm(alpha, keep);
        const CVector got = fock_amplitudes(StateSpec::coherent(alpha), keep);
        CHECK((ref - got).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("heisenberg law for the squeezing operator")
{
    // S†aS = cosh r·a − e^{iφ} sinh r·a†, tested on ⟨a²⟩ = −e^{iφ} sinh r cosh r.
    const double r = 0.9, phi = 0.6;
    const auto spec = StateSpec::squeezed_vacuum(r, phi);
    const auto rho = make_state(spec, auto_basis(spec));
    const auto a = annihilation_op(rho.basis());
    const Complex a2 = expectation(rho, QuantumOperator{a.basis, a.elements * a.elements});
    const Complex expected = -std::polar(1.0, phi) * std::sinh(r) * std::cosh(r);
    CHECK(std::abs(a2 - expected) < 1e-6);
}

TEST_CASE("make_state examples")
{
    const auto coh = make_state(StateSpec::coherent(2.0), FockBasis(40));
    CHECK(coh.mean_photon() == doctest::Approx(4.0).epsilon(1e-9));

    const auto sq_spec = StateSpec::squeezed_vacuum(1.0);
    const auto sq = make_state(sq_spec, auto_basis(sq_spec));
    const double nr = std::sinh(1.0) * std::sinh(1.0);
    CHECK(sq.mean_photon() == doctest::Approx(nr).epsilon(1e-6));
    CHECK(nr == doctest::Approx(1.3811).epsilon(1e-4));
    for (int k = 1; k < sq.dim(); k += 2) CHECK(std::abs(sq.population(k)) < 1e-15);
    CHECK(sq.photon_variance() == doctest::Approx(nr * (1 + std::cosh(2.0))).epsilon(1e-5));

    const auto one = make_state(StateSpec::fock(1), FockBasis(8));
    CHECK(expect_re(one, number_op(one.basis())) == doctest::Approx(1.0));
}

TEST_CASE("fourth-order moments")
{
    for (double r : {0.4, 1.0}) {
        const auto spec = StateSpec::squeezed_vacuum(r);
        const auto rho = make_state(spec, auto_basis(spec));
        const auto a = annihilation_op(rho.basis()).elements;
        const CMatrix op = a.adjoint() * a.adjoint() * a * a;
        const double nr = spec.mean_photon();
        // ⟨a†²a²⟩ = ⟨n²⟩ − ⟨n⟩ with ⟨n²⟩ = Var + n², Var = ½ sinh²(2r)
        const double oracle_value = 0.5 * std::pow(std::sinh(2 * r), 2) + nr * nr - nr;
        CHECK(oracle_value == doctest::Approx(nr * (1 + 3 * nr)).epsilon(1e-12));
        CHECK(expect_re(rho, {rho.basis(), op}) == doctest::Approx(oracle_value).epsilon(1e-6));
    }
    const Complex alpha(1.2, 0.5);
    const auto coh = make_state(StateSpec::coherent(alpha), FockBasis(48));
    const auto a = annihilation_op(coh.basis()).elements;
    CHECK(expect_re(coh, {coh.basis(), a.adjoint() * a.adjoint() * a * a}) ==
          doctest::Approx(std::pow(std::norm(alpha), 2)).epsilon(1e-9));
}

TEST_CASE("constructed states satisfy the density-matrix invariants")
{
    const std::vector<StateSpec> specs = {StateSpec::coherent({1.5, 0.5}), StateSpec::squeezed_vacuum(1.1, 0.3),
                                          StateSpec::fock(3), StateSpec::with_mean_photon(Family::squeezed_vacuum, 5)};
    for (const auto& spec : specs) {
        const auto rho = make_state(spec, auto_basis(spec));
        const double tol = rho.basis().tail_tol();
        CHECK(rho.trace() <= 1.0 + 1e-12);
        CHECK(rho.trace() >= 1.0 - 10 * tol);
        CHECK((rho.matrix() - rho.matrix().adjoint()).norm() < 1e-12);
        CHECK(rho.min_eigenvalue() >= -1e-10);
    }
}

TEST_CASE("doubling the dimension moves expectations by less than 10·tail_tol")
{
    for (const auto& spec : {StateSpec::squeezed_vacuum(1.0), StateSpec::coherent(2.5)}) {
        const FockBasis b = auto_basis(spec);
        const FockBasis b2(2 * b.dim(), b.tail_tol());
        const auto rho = make_state(spec, b);
        const auto rho2 = make_state(spec, b2);
        CHECK(std::abs(rho.mean_photon() - rho2.mean_photon()) < 10 * b.tail_tol());
        CHECK(std::abs(expect_re(rho, quadrature_op(b, 0.3)) - expect_re(rho2, quadrature_op(b2, 0.3))) <
              10 * b.tail_tol());
    }
}

TEST_CASE("auto_basis")
{
    const auto vac = auto_basis(StateSpec::fock(0));
    CHECK(vac.dim() == 32);
    const auto spec = StateSpec::with_mean_photon(Family::squeezed_vacuum, 10.0);
    const auto b = auto_basis(spec);
    CHECK(b.dim() >= static_cast<int>(std::ceil(spec.mean_photon() + 8 * std::sqrt(spec.photon_variance()))));
    const CVector psi = fock_amplitudes(spec, b.dim());
    CHECK(std::norm(psi(b.dim() - 1)) + std::norm(psi(b.dim() - 2)) <= b.tail_tol());
    CHECK_THROWS_AS(auto_basis(StateSpec::with_mean_photon(Family::squeezed_vacuum, 1000.0)), TruncationError);
}

TEST_CASE("construction errors")
{
    CHECK_THROWS_AS(FockBasis(3), InvalidSpec);
    CHECK_THROWS_AS(FockBasis(8, 0.0), InvalidSpec);
    CHECK_THROWS_AS(FockBasis(8, 1.0), InvalidSpec);
    CHECK_THROWS_AS(StateSpec::squeezed_vacuum(-0.1), InvalidSpec);
    CHECK_THROWS_AS(StateSpec::fock(-1), InvalidSpec);
    CHECK_THROWS_AS(make_state(StateSpec::coherent(3.0), FockBasis(10)), TruncationError);
    CHECK_THROWS_AS(make_state(StateSpec::fock(8), FockBasis(8)), TruncationError);

    const FockBasis b(6);
    CMatrix m = CMatrix::Zero(6, 6);
    m(0, 0) = 1.0;
    m(0, 1) = 0.1;
    CHECK_THROWS_AS(DensityMatrix::from_matrix(b, m), NonHermitianInput);
    CHECK_THROWS_AS(DensityMatrix::from_matrix(b, CMatrix::Identity(5, 5) / 5.0), DimensionMismatch);
    CHECK_THROWS_AS(DensityMatrix::from_matrix(b, CMatrix::Identity(6, 6) / 3.0), TruncationError);

    const auto rho = make_state(StateSpec::fock(1), FockBasis(6));
    CHECK_THROWS_AS(expectation(rho, number_op(FockBasis(8))), DimensionMismatch);

    CMatrix neg = CMatrix::Zero(6, 6);
    neg(0, 0) = 1.1;
    neg(1, 1) = -0.1;
    const auto bad = DensityMatrix::from_matrix(b, neg);
    CHECK_THROWS_AS(bad.require_positive(), NegativeState);
}

TEST_CASE("state specs")
{
    const auto s = StateSpec::with_mean_photon(Family::squeezed_vacuum, 4.0, 0.5);
    CHECK(std::sinh(s.as<SqueezedParams>().r) == doctest::Approx(2.0));
    CHECK(s.as<SqueezedParams>().phi == 0.5);
    CHECK(s.photon_variance() == doctest::Approx(2 * 4.0 * 5.0));
    const auto c = StateSpec::with_mean_photon(Family::coherent, 9.0);
    CHECK(c.primary_param() == doctest::Approx(3.0));
    CHECK(parse_family("squeezed") == Family::squeezed_vacuum);
    CHECK(parse_family(family_name(Family::coherent)) == Family::coherent);
    CHECK_THROWS_AS(parse_family("thermal"), InvalidSpec);
}

TEST_CASE("state records round-trip through json")
{
    StateRecord rec{StateSpec::coherent({1.25, -0.5}), 40, 1e-8};
    const auto j = to_json(rec);
    CHECK(j.at("family") == "coherent");
    CHECK_FALSE(j.contains("r"));
    const auto back = state_record_from_json(j);
    CHECK(back.spec.as<CoherentParams>().alpha == Complex(1.25, -0.5));
    CHECK(back.dim == 40);
    CHECK(back.tail_tol == 1e-8);
    CHECK(to_json(back) == j);

    const auto sq = state_record_from_json(nlohmann::json{{"family", "squeezed_vacuum"}, {"r", 1.0}});
    CHECK(sq.spec.family() == Family::squeezed_vacuum);
    CHECK_FALSE(sq.dim.has_value());
    CHECK(sq.basis().dim() == auto_basis(sq.spec).dim());

    CHECK_THROWS_AS(state_record_from_json(nlohmann::json{{"family", "fock"}, {"n", 2}, {"r", 1.0}}), InvalidSpec);
    CHECK_THROWS_AS(state_record_from_json(nlohmann::json{{"family", "fock"}, {"n", 2}, {"colour", 1}}), InvalidSpec);
    CHECK_THROWS_AS(state_record_from_json(nlohmann::json{{"family", "fock"}, {"n", "two"}}), InvalidSpec);
    CHECK_THROWS_AS(state_record_from_json(nlohmann::json{{"family", "fock"}, {"n", 2}, {"dim", 2}}), InvalidSpec);
}
