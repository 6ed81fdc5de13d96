// test_device.cpp — flux-qubit well geometry, macroscopicity, instanton estimate
#include <catch2/catch_amalgamated.hpp>

#include "duobath/device.hpp"

using namespace duobath;

TEST_CASE("well geometry closed forms", "[device]") {
    JunctionParams j;
    j.gamma = 0.9;
    auto [theta0, u0] = well_geometry(j);
    CHECK(theta0 == Catch::Approx(std::sqrt(0.6)).epsilon(1e-12));
    CHECK(theta0 == Catch::Approx(0.77460).epsilon(1e-4));
    CHECK(u0 == Catch::Approx(0.015).epsilon(1e-12));

    j.gamma = 1.0 / 3.0;
    std::tie(theta0, u0) = well_geometry(j);
    CHECK(theta0 == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(u0 == Catch::Approx(2.0 / 3.0).epsilon(1e-12));

    // wells merge as gamma -> 1^-
    j.gamma = 1.0 - 1e-9;
    std::tie(theta0, u0) = well_geometry(j);
    CHECK(theta0 < 1e-4);
    CHECK(u0 < 1e-17);

    j.gamma = 1.2;
    CHECK_THROWS_AS(well_geometry(j), std::domain_error);
    j.gamma = 0.0;
    CHECK_THROWS_AS(well_geometry(j), std::domain_error);
}

TEST_CASE("macroscopicity closed form and consistency identity", "[device]") {
    JunctionParams j;
    j.gamma = 0.9;
    j.h0 = 0.00949;
    CHECK(macroscopicity(j) == Catch::Approx(0.1).epsilon(1e-3));

    // linearity in h0
    const double h1 = macroscopicity(j);
    j.h0 *= 2.0;
    CHECK(macroscopicity(j) == Catch::Approx(2.0 * h1).epsilon(1e-14));

    // identity h0/(theta0 sqrt(U0)) == h0/(3 (1-gamma)^{3/2})
    for (double g : {0.3, 0.6, 0.9}) {
        JunctionParams p;
        p.gamma = g;
        p.h0 = 0.01;
        auto [theta0, u0] = well_geometry(p);
        const double via_geometry = p.h0 / (theta0 * std::sqrt(u0));
        CHECK(macroscopicity(p) == Catch::Approx(via_geometry).epsilon(1e-12));
    }
}

TEST_CASE("instanton tunneling estimate", "[device]") {
    const double omega = 2.0 * std::sqrt(2.0);
    // direct evaluations of the closed form
    CHECK(instanton_tunneling(0.2, omega) == Catch::Approx(1.9e-3).epsilon(0.03));
    // documented discrepancy: h = 0.1 gives ~2e-7, not the 1e-3 default
    CHECK(instanton_tunneling(0.1, omega) == Catch::Approx(2e-7).epsilon(0.15));
    CHECK(instanton_tunneling(0.1, omega) < 1e-5);

    // strictly increasing in h on (0, 1]
    double prev = 0.0;
    for (double h = 0.02; h <= 1.0; h += 0.02) {
        const double d = instanton_tunneling(h, omega);
        CHECK(d > prev);
        prev = d;
    }

    CHECK_THROWS_AS(instanton_tunneling(0.0, omega), std::domain_error);
    CHECK_THROWS_AS(instanton_tunneling(0.1, -1.0), std::domain_error);
}

TEST_CASE("SI parameter path", "[device]") {
    // pick C, Ic and verify the closed form for h0
    const double C = 1e-13, Ic = 2e-6;
    const auto j = JunctionParams::from_si(0.9, C, Ic);
    const double phi_q = pi * hbar_si / elementary_charge;
    const double expect =
        2.0 * std::sqrt((elementary_charge * elementary_charge / C) / (Ic * phi_q / (2.0 * pi)));
    CHECK(j.h0 == Catch::Approx(expect).epsilon(1e-14));
    CHECK(j.h0 > 0.0);
    CHECK_THROWS(JunctionParams::from_si(0.9, -1.0, Ic));
}
