#include <numbers>

#include "doctest.h"
#include "opencav/model.hpp"

using namespace opencav;

TEST_CASE("build_hb on small chains") {
    LatticeSpec one;
    auto h = build_hb(one);
    REQUIRE(h.rows() == 1);
    CHECK(h(0, 0) == Complex(0.0));

    LatticeSpec dimer{2, 1, 0.0, {}, {}};
    h = build_hb(dimer);
    CHECK(h(0, 1) == Complex(-1.0));
    CHECK(h(1, 0) == Complex(-1.0));
    const auto ed = eig_general(h);
    CHECK(std::abs(ed.values[0] + 1.0) < 1e-14);
    CHECK(std::abs(ed.values[1] - 1.0) < 1e-14);

    // Open chain of N sites: -2 cos(k pi / (N + 1)), k = 1..N.
    LatticeSpec chain{3, 1, 0.0, {}, {}};
    const auto e3 = eig_general(build_hb(chain));
    for (int k = 1; k <= 3; ++k) {
        const double expect = -2.0 * std::cos(k * std::numbers::pi / 4.0);
        CHECK(std::abs(e3.values[k - 1] - expect) < 1e-13);
    }
}

TEST_CASE("build_hb is real symmetric with masks and potentials") {
    LatticeSpec lat{4, 3, 0.3, std::vector<bool>{true, true, true, true,   //
                                                 true, false, false, true,  //
                                                 true, true, true, true},
                    std::vector<double>(12, 0.0)};
    (*lat.potential)[5] = 99.0;  // masked out, ignored
    (*lat.potential)[0] = -0.5;
    const auto h = build_hb(lat);
    CHECK(h.rows() == 10);
    CHECK(symmetry_defect(h) == 0.0);
    CHECK(h.imag().cwiseAbs().maxCoeff() == 0.0);
    CHECK(h(0, 0) == Complex(-0.2));
    CHECK(lat.site_index(0, 2) == 6);
    CHECK(lat.site_index(1, 1) == -1);
    CHECK(eig_general(h).values.imag().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("build_hb rejects bad geometry") {
    LatticeSpec split{3, 1, 0.0, std::vector<bool>{true, false, true}, {}};
    CHECK_THROWS_AS(build_hb(split), InvalidGeometry);
    LatticeSpec empty{2, 1, 0.0, std::vector<bool>{false, false}, {}};
    CHECK_THROWS_AS(build_hb(empty), InvalidGeometry);
    LatticeSpec wrong{2, 2, 0.0, std::vector<bool>{true}, {}};
    CHECK_THROWS_AS(build_hb(wrong), InvalidGeometry);
    LatticeSpec zero{0, 1, 0.0, {}, {}};
    CHECK_THROWS_AS(build_hb(zero), InvalidGeometry);
}

TEST_CASE("lead self-energy closed form") {
    LeadSpec unit{LeadSide::Left, 0, 1.0};
    CHECK(std::abs(lead_self_energy(unit, 1.0, 0.0) - Complex(0.0, -1.0)) < 1e-15);
    CHECK(std::abs(lead_self_energy(unit, 1.0, 2.0) - Complex(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(lead_self_energy(unit, 1.0, -2.0) - Complex(-1.0, 0.0)) < 1e-15);

    LeadSpec off{LeadSide::Left, 0, 0.0};
    for (double e : {-3.0, -1.0, 0.0, 0.7, 2.5}) CHECK(lead_self_energy(off, 1.0, e) == Complex(0.0));

    // Decaying root outside the band: |g| < 1.
    CHECK(std::abs(surface_green(3.0)) < 1.0);
    CHECK(std::abs(surface_green(-3.0)) < 1.0);
    CHECK(std::abs(surface_green(3.0) - (3.0 - std::sqrt(5.0)) / 2.0) < 1e-15);
}

TEST_CASE("self-energy is retarded and continuous at the band edges") {
    LeadSpec lead{LeadSide::Right, 0, 0.8};
    for (int i = 0; i <= 400; ++i) {
        const double e = -4.0 + 8.0 * i / 400.0;
        CHECK(lead_self_energy(lead, 1.3, e).imag() <= 0.0);
    }
    for (double edge : {-2.0, 2.0}) {
        const Complex in = lead_self_energy(lead, 1.3, edge * (1 - 1e-17));
        const Complex out = lead_self_energy(lead, 1.3, edge * (1 + 1e-16));
        CHECK(std::abs(in - out) < 1e-8);
    }
}

TEST_CASE("contact amplitude closed form and band edge") {
    LeadSpec unit{LeadSide::Left, 0, 1.0};
    CHECK(std::abs(lead_contact_amplitude(unit, 1.0, 0.0) - std::sqrt(1.0 / std::numbers::pi)) < 1e-15);
    LeadSpec off{LeadSide::Left, 0, 0.0};
    CHECK(lead_contact_amplitude(off, 1.0, 0.0) == 0.0);
    CHECK_THROWS_AS(lead_contact_amplitude(unit, 1.0, 2.0), OutsideBand);
    CHECK_THROWS_AS(lead_contact_amplitude(unit, 1.0, -2.0), OutsideBand);
    CHECK_THROWS_AS(lead_contact_amplitude(unit, 1.0, 5.0), OutsideBand);
}

TEST_CASE("width identity 2 pi a^2 = -2 Im Sigma on a 201-point in-band grid") {
    for (double w : {0.0, 0.3, 1.0, 1.7}) {
        for (double alpha : {0.1, 1.0, 2.5}) {
            LeadSpec lead{LeadSide::Left, 0, w};
            for (int i = 1; i <= 201; ++i) {
                const double e = -2.0 + 4.0 * i / 202.0;
                const double a = lead_contact_amplitude(lead, alpha, e);
                const double im = lead_self_energy(lead, alpha, e).imag();
                CHECK(std::abs(2.0 * std::numbers::pi * a * a + 2.0 * im) < 1e-10);
            }
        }
    }
}

TEST_CASE("CavityModel validation") {
    auto m = make_chain(3, 0.5);
    CHECK_NOTHROW(m.validate());
    m.right.contact_site = 3;
    CHECK_THROWS_AS(m.validate(), InvalidGeometry);
    m = make_chain(3, -1.0);
    CHECK_THROWS_AS(m.validate(), InvalidGeometry);
}
