#include <cmath>

#include "doctest.h"
#include "kitamp/errors.hpp"
#include "kitamp/nonlinearity.hpp"

using namespace kitamp;

TEST_CASE("kinetic inductance at zero current is the dc sheet value") {
    const FilmSpec film = reference_film();
    CHECK(kinetic_inductance(film, 0.0) == doctest::Approx(35e-12).epsilon(1e-15));
}

TEST_CASE("kinetic inductance at I*/sqrt(2) is 1.75 L_dc") {
    const FilmSpec film = reference_film();
    const double l = kinetic_inductance(film, film.i_star / std::sqrt(2.0));
    CHECK(l / film.sheet_inductance == doctest::Approx(1.75).epsilon(1e-14));
}

TEST_CASE("kinetic inductance at 0.8 mA") {
    const FilmSpec film = reference_film();
    // (0.8/2.8)^2 = 4/49, (0.8/2.8)^4 = 16/2401.
    const double expected = 1.0 + 4.0 / 49.0 + 16.0 / 2401.0;
    const double ratio = kinetic_inductance(film, 0.8e-3) / film.sheet_inductance;
    CHECK(ratio == doctest::Approx(expected).epsilon(1e-13));
    // Quoted four-decimal figure.
    CHECK(ratio == doctest::Approx(1.08833).epsilon(5e-5));
}

TEST_CASE("kinetic inductance rejects currents at or above I*") {
    const FilmSpec film = reference_film();
    CHECK_THROWS_AS(kinetic_inductance(film, film.i_star), DomainError);
    CHECK_THROWS_AS(kinetic_inductance(film, -1.01 * film.i_star), DomainError);
}

TEST_CASE("kinetic inductance is even and its slope matches finite differences") {
    const FilmSpec film = reference_film();
    for (double i : {-0.7e-3, -0.2e-3, 0.1e-3, 0.5e-3, 1.5e-3}) {
        CHECK(kinetic_inductance(film, i) == doctest::Approx(kinetic_inductance(film, -i)).epsilon(1e-15));
        const double h = 1e-9;
        const double fd = (kinetic_inductance(film, i + h) - kinetic_inductance(film, i - h)) / (2 * h);
        CHECK(kinetic_inductance_slope(film, i) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("kinetic inductance increases monotonically with |I|") {
    const FilmSpec film = reference_film();
    double prev = 0.0;
    for (int k = 0; k < 100; ++k) {
        const double l = kinetic_inductance(film, 0.99 * film.i_star * k / 100.0);
        CHECK(l > prev);
        prev = l;
    }
}

TEST_CASE("mixing coefficients at zero bias") {
    const auto m = mixing_coefficients(reference_film(), 0.0);
    CHECK(m.epsilon == 0.0);
    CHECK(m.xi == doctest::Approx(1.0 / (2.8e-3 * 2.8e-3)).epsilon(1e-14));
}

TEST_CASE("epsilon peaks at i_dc = I* with value 1/I*") {
    const double istar = 2.8e-3;
    CHECK(mixing_coefficients(istar, istar).epsilon == doctest::Approx(1.0 / istar).epsilon(1e-14));
    for (double f : {0.5, 0.9, 0.99, 1.01, 1.1, 2.0})
        CHECK(mixing_coefficients(istar, f * istar).epsilon < 1.0 / istar);
}

TEST_CASE("mixing coefficients at 1 mA with I* = 2.8 mA") {
    const auto m = mixing_coefficients(2.8e-3, 1.0e-3);
    // 2e-3 / 8.84e-6 and 1 / 8.84e-6 by hand.
    CHECK(m.epsilon == doctest::Approx(226.2443438914027).epsilon(1e-12));
    CHECK(m.xi == doctest::Approx(113122.17194570136).epsilon(1e-12));
    CHECK(m.epsilon == doctest::Approx(226.24).epsilon(2e-5));
}

TEST_CASE("checked mixing coefficients enforce the critical current") {
    const FilmSpec film = reference_film();
    CHECK_NOTHROW(mixing_coefficients(film, 0.6e-3));
    CHECK_THROWS_AS(mixing_coefficients(film, 0.8e-3), OperatingPointError);
}

TEST_CASE("operating point validation") {
    const FilmSpec film = reference_film();
    CHECK_NOTHROW((BiasState{0.6e-3, 0.1e-3}.validate(film)));
    CHECK_THROWS_AS((BiasState{0.6e-3, 0.3e-3}.validate(film)), OperatingPointError);
    CHECK_THROWS_AS((BiasState{-0.7e-3, 0.1e-3}.validate(film)), OperatingPointError);
}

TEST_CASE("film validation lists each violation") {
    FilmSpec bad = reference_film();
    bad.sheet_inductance = -1.0;
    bad.i_critical = 5e-3;  // above I*
    try {
        bad.validate();
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("sheet") != std::string::npos);
        CHECK(msg.find("critical") != std::string::npos);
    }
}
