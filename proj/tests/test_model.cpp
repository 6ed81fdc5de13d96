// test_model.cpp — physical model types, spectral densities, closed-form moments
#include <catch2/catch_amalgamated.hpp>

#include "duobath/model.hpp"

using namespace duobath;

TEST_CASE("system parameter validation", "[model]") {
    SystemParams sys; // defaults: h = 0.1, delta = 1e-3, omega0 = sqrt(8)
    REQUIRE_NOTHROW(sys.validate());
    CHECK(sys.omega0 == Catch::Approx(std::sqrt(8.0)).epsilon(1e-15));

    SystemParams bad = sys;
    bad.delta = bad.omega0; // weak-tunneling ordering violated
    CHECK_THROWS_AS(bad.validate(), std::logic_error);
    bad = sys;
    bad.h = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::logic_error);
    bad = sys;
    bad.delta = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::logic_error);
}

TEST_CASE("eigenenergies split by h*delta", "[model]") {
    SystemParams sys;
    CHECK(sys.e2() - sys.e1() == Catch::Approx(sys.h * sys.delta).epsilon(1e-15));
    CHECK(sys.e1() == Catch::Approx(-0.5 * sys.h * sys.delta).epsilon(1e-15));
}

TEST_CASE("localized basis change is orthonormal and involutive", "[model]") {
    // |L> = (|1> - |2>)/sqrt(2), |R> = (|1> + |2>)/sqrt(2)
    const double l1 = TwoLevelSystem::braket_left(1), l2 = TwoLevelSystem::braket_left(2);
    const double r1 = TwoLevelSystem::braket_right(1), r2 = TwoLevelSystem::braket_right(2);
    CHECK(l1 == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(l2 == Catch::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(l1 * l1 + l2 * l2 == Catch::Approx(1.0).epsilon(1e-15));
    CHECK(r1 * r1 + r2 * r2 == Catch::Approx(1.0).epsilon(1e-15));
    CHECK(l1 * r1 + l2 * r2 == Catch::Approx(0.0).margin(1e-15));
    // round trip L/R -> 1/2 -> L/R on an arbitrary normalized state
    const double a = 0.6, b = 0.8; // components on |L>, |R>
    const double c1 = a * l1 + b * r1, c2 = a * l2 + b * r2;
    CHECK(c1 * l1 + c2 * l2 == Catch::Approx(a).epsilon(1e-14));
    CHECK(c1 * r1 + c2 * r2 == Catch::Approx(b).epsilon(1e-14));
}

TEST_CASE("spectral density closed-form values", "[model]") {
    ReservoirSpec r = ReservoirSpec::ohmic(); // s = 1, j = 1e-4, lambda = 10
    CHECK(spectral_density(0.0, r) == 0.0);
    CHECK(spectral_density(1.0, r) == Catch::Approx(1e-4 * std::exp(-0.1)).epsilon(1e-12));
    CHECK(spectral_density(1.0, r) == Catch::Approx(9.0484e-5).epsilon(1e-4));
    CHECK_THROWS_AS(spectral_density(-1.0, r), std::domain_error);

    // geometric-mean identity between sub- and super-ohmic at omega = 1
    ReservoirSpec sub = r, sup = r;
    sub.s = 0.5;
    sup.s = 1.5;
    const double gm = std::sqrt(spectral_density(1.0, sub) * spectral_density(1.0, sup));
    CHECK(gm == Catch::Approx(spectral_density(1.0, r)).epsilon(1e-12));

    // nonnegative and decaying
    for (double w : {1e-3, 0.1, 1.0, 5.0, 50.0, 500.0})
        CHECK(spectral_density(w, sub) >= 0.0);
    CHECK(spectral_density(500.0, r) < 1e-20);
}

TEST_CASE("reservoir validation", "[model]") {
    ReservoirSpec r = ReservoirSpec::ohmic();
    REQUIRE_NOTHROW(r.validate());
    r.s = 0.0;
    CHECK_THROWS_AS(r.validate(), std::logic_error);
    r = ReservoirSpec::ohmic();
    r.lambda = -1.0;
    CHECK_THROWS_AS(r.validate(), std::logic_error);
    r = ReservoirSpec::ohmic();
    r.j = -1e-4;
    CHECK_THROWS_AS(r.validate(), std::logic_error);
}

TEST_CASE("cutoff moments match the Euler-integral closed form", "[model]") {
    ReservoirSpec r = ReservoirSpec::ohmic();
    CHECK(cutoff_moment(-1, r) == Catch::Approx(1e-3).epsilon(1e-12));
    CHECK(cutoff_moment(0, r) == Catch::Approx(1e-2).epsilon(1e-12));
    ReservoirSpec sub = r;
    sub.s = 0.5;
    CHECK(cutoff_moment(-1, sub) == Catch::Approx(1e-3 * std::sqrt(pi)).epsilon(1e-12));
    // divergent moment rejected
    CHECK_THROWS(cutoff_moment(-2, r));
}

TEST_CASE("bath autocorrelation closed form at zero lag", "[model]") {
    // corr_plus(0) = integral of J = cutoff_moment(0, r)
    for (double s : {0.5, 1.0, 1.5, 2.0}) {
        ReservoirSpec r = ReservoirSpec::ohmic();
        r.s = s;
        const cplx c0 = corr_plus(0.0, r);
        CHECK(c0.real() == Catch::Approx(cutoff_moment(0, r)).epsilon(1e-12));
        CHECK(c0.imag() == Catch::Approx(0.0).margin(1e-18));
    }
}

TEST_CASE("complex spectral density agrees with the real one on the axis", "[model]") {
    ReservoirSpec r = ReservoirSpec::ohmic();
    r.s = 1.5;
    for (double w : {0.1, 1.0, 7.0}) {
        const cplx z = spectral_density(cplx(w, 0.0), r);
        CHECK(z.real() == Catch::Approx(spectral_density(w, r)).epsilon(1e-13));
        CHECK(z.imag() == Catch::Approx(0.0).margin(1e-18));
    }
}

TEST_CASE("isolated tunneling probability", "[model]") {
    SystemParams sys;
    CHECK(isolated_probability(0.0, sys) == 0.0);
    CHECK(isolated_probability(pi / sys.delta, sys) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(isolated_probability(0.5 * pi / sys.delta, sys) == Catch::Approx(0.5).epsilon(1e-12));
    // periodicity and bounds
    const double period = 2.0 * pi / sys.delta;
    for (double t : {123.0, 4567.0, 98765.0}) {
        const double p = isolated_probability(t, sys);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(isolated_probability(t + period, sys) == Catch::Approx(p).margin(1e-9));
    }
}

TEST_CASE("contraction factor is 2/pi", "[model]") {
    CHECK(contraction_factor == Catch::Approx(2.0 / pi).epsilon(1e-15));
}
