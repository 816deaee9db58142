#include <numbers>

#include "doctest.h"
#include "opencav/scattering.hpp"

using namespace opencav;

namespace {

const Complex I{0.0, 1.0};

ComplexVector vec(std::initializer_list<Complex> xs) {
    ComplexVector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index k = 0;
    for (const auto& x : xs) v[k++] = x;
    return v;
}

}  // namespace

TEST_CASE("rho_direct examples") {
    auto r = rho_direct(vec({1.0, 2.0, 3.0}));
    CHECK(r.modulus == doctest::Approx(1.0));
    CHECK(std::abs(r.theta) < 1e-15);

    r = rho_direct(vec({1.0, I}));
    CHECK(r.modulus < 1e-15);

    r = rho_direct(vec({1.0 + I, 1.0}));
    CHECK(r.modulus == doctest::Approx(std::sqrt(5.0) / 3.0).epsilon(1e-14));
    CHECK(r.theta > -std::numbers::pi / 2);
    CHECK(r.theta <= std::numbers::pi / 2);
}

TEST_CASE("rho_direct rotation angle makes the sum of squares real") {
    const ComplexVector psi = vec({0.3 - 1.1 * I, 2.0 + 0.4 * I, -0.7 * I});
    const auto r = rho_direct(psi);
    const Complex rotated = (std::exp(I * r.theta) * psi).array().square().sum();
    CHECK(std::abs(rotated.imag()) < 1e-12);
    CHECK(rotated.real() > 0.0);
}

TEST_CASE("rho_direct invariances") {
    const ComplexVector psi = vec({0.3 - 1.1 * I, 2.0 + 0.4 * I, -0.7 * I, 0.25});
    const double base = rho_direct(psi).modulus;
    for (double phase : {0.1, 1.3, -2.9}) CHECK(rho_direct(std::exp(I * phase) * psi).modulus == doctest::Approx(base));
    CHECK(rho_direct(ComplexVector(4.5 * psi)).modulus == doctest::Approx(base));
    ComplexVector perm = psi;
    std::swap(perm[0], perm[3]);
    std::swap(perm[1], perm[2]);
    CHECK(rho_direct(perm).modulus == doctest::Approx(base));
    CHECK(base <= 1.0);
}

TEST_CASE("rho_direct of a zero vector is undefined") {
    CHECK_THROWS_AS(rho_direct(ComplexVector::Zero(3)), Undefined);
}

TEST_CASE("rho_spectral examples") {
    RealVector one(1);
    one << 1.0;
    CHECK(std::abs(rho_spectral(vec({1.0}), one) - 1.0) < 1e-15);

    RealVector two(2);
    two << 1.0, 1.0;
    const double h = std::sqrt(0.5);
    CHECK(std::abs(rho_spectral(vec({h, h * I}), two)) < 1e-15);

    RealVector five(1);
    five << 5.0;
    CHECK(std::abs(rho_spectral(vec({1.0}), five) - 5.0) < 1e-15);

    CHECK_THROWS_AS(rho_spectral(vec({1.0, 1.0}), two), NotNormalized);
}

TEST_CASE("b_antisymmetry_residual examples") {
    CHECK(b_antisymmetry_residual(ComplexMatrix::Zero(3, 3)) == 0.0);
    ComplexMatrix sym(2, 2);
    sym << 0.0, 1.0, 1.0, 0.0;
    CHECK(b_antisymmetry_residual(sym) == doctest::Approx(1.0));
    ComplexMatrix anti(2, 2);
    anti << 0.0, 1.0, -1.0, 0.0;
    CHECK(b_antisymmetry_residual(anti) == 0.0);
}

TEST_CASE("rigidity is near one in the decoupled limit") {
    CavityModel m;
    m.lattice.nx = 4;
    m.lattice.ny = 4;
    m.left = {LeadSide::Left, 0, 1.0};
    m.right = {LeadSide::Right, 15, 1.0};
    m.alpha = 1e-4;
    for (double e : {-1.3, 0.1, 0.77}) {
        const auto sol = solve_scattering(m, e);
        CHECK(sol.rigidity.rho_direct_mod > 0.99);
        for (const auto& [id, r] : sol.rigidity.per_state_r) CHECK(r > 1.0 - 1e-6);
    }
}

TEST_CASE("rigidity_report agrees with its parts") {
    const auto model = make_chain(6, 0.8);
    const auto spec = spectrum_at(model, 0.4);
    const auto c = coefficients_c(spec, model, 0.4);
    const auto psi = interior_wavefunction(spec, c);
    const auto report = rigidity_report(spec, c, psi);
    CHECK(report.energy == 0.4);
    CHECK(report.rho_direct_mod == doctest::Approx(rho_direct(psi).modulus));
    RealVector a(static_cast<Eigen::Index>(spec.size()));
    for (std::size_t k = 0; k < spec.size(); ++k) a[static_cast<Eigen::Index>(k)] = spec.states[k].a_norm;
    CHECK(std::abs(report.rho_spectral - rho_spectral(c, a)) < 1e-15);
    CHECK(report.per_state_r.size() == spec.size());
    CHECK(report.b_antisymmetry_residual == doctest::Approx(b_antisymmetry_residual(spec.overlap_b)));
}
