#include <cmath>
#include <complex>

#include "doctest.h"
#include "kitamp/bias_tee.hpp"
#include "kitamp/coupler.hpp"
#include "kitamp/errors.hpp"
#include "kitamp/units.hpp"

using namespace kitamp;
using cd = std::complex<double>;

TEST_CASE("decoupled lines give no coupling and a perfect through") {
    CouplerSpec spec = reference_coupler();
    spec.even_impedance = spec.odd_impedance = 50.0;
    const auto s = coupler_sparams(spec, FrequencyGrid::linear(1e9, 30e9, 59));
    const auto m = coupler_metrics(s);
    for (std::size_t k = 0; k < s.grid.size(); ++k) {
        CHECK(std::abs(s.at(k, 2, 0)) == 0.0);
        CHECK(std::abs(s.at(k, 3, 0)) == 0.0);
        CHECK(std::isinf(m.forward_db[k]));
        CHECK(m.forward_db[k] < 0);
        CHECK(std::abs(s.at(k, 1, 0)) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("even/odd impedances for -20 dB") {
    const auto z = coupler_impedances_for(-20.0, 50.0);
    CHECK(z.even == doctest::Approx(50.0 * std::sqrt(1.1 / 0.9)).epsilon(1e-14));
    CHECK(z.odd == doctest::Approx(50.0 * std::sqrt(0.9 / 1.1)).epsilon(1e-14));
    CHECK(z.even == doctest::Approx(55.28).epsilon(1e-4));
    CHECK(z.odd == doctest::Approx(45.23).epsilon(1e-4));
    CouplerSpec spec = reference_coupler();
    spec.even_impedance = z.even;
    spec.odd_impedance = z.odd;
    CHECK(spec.coupling_coefficient() == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("coupler forward coupling matches the closed-form coupled-line response") {
    const CouplerSpec spec = reference_coupler();
    const double k = spec.coupling_coefficient();
    const auto grid = FrequencyGrid::linear(1e9, 30e9, 117);
    const auto s = coupler_sparams(spec, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double theta = 2 * constants::pi * grid[i] * spec.coupled_length / spec.effective_phase_velocity_even;
        // C = j k sin / (sqrt(1 - k^2) cos + j sin)
        const cd c = cd(0, k * std::sin(theta)) / (std::sqrt(1 - k * k) * std::cos(theta) + cd(0, std::sin(theta)));
        CHECK(std::abs(s.at(i, 2, 0)) == doctest::Approx(std::abs(c)).epsilon(1e-10));
    }
}

TEST_CASE("calibrated coupler hits -20 dB at midband and stays in the 10-20 GHz window") {
    const auto s = coupler_sparams(reference_coupler(), FrequencyGrid::linear(10e9, 20e9, 101));
    const auto m = coupler_metrics(s);
    CHECK(m.forward_db[50] == doctest::Approx(-20.0).epsilon(0.1 / 20.0));
    for (double c : m.forward_db) {
        CHECK(c <= -15.0);
        CHECK(c >= -25.0);
    }
}

TEST_CASE("lossless coupler is unitary and reciprocal") {
    const auto s = coupler_sparams(reference_coupler(), FrequencyGrid::linear(0.1e9, 40e9, 1001));
    CHECK(s.unitarity_error() < 1e-6);
    CHECK(s.reciprocity_error() < 1e-12);
}

TEST_CASE("equal mode velocities give an ideal far-end isolation") {
    const auto m = coupler_metrics(coupler_sparams(reference_coupler(), FrequencyGrid::linear(10e9, 20e9, 11)));
    for (double d : m.directivity_db) CHECK(d > 100.0);
}

TEST_CASE("unequal mode velocities degrade directivity") {
    CouplerSpec spec = reference_coupler();
    spec.effective_phase_velocity_odd *= 1.05;
    const auto m = coupler_metrics(coupler_sparams(spec, FrequencyGrid::linear(10e9, 20e9, 11)));
    for (double d : m.directivity_db) CHECK(d < 60.0);
}

TEST_CASE("coupler validation") {
    CouplerSpec spec = reference_coupler();
    CHECK_NOTHROW(spec.validate());
    spec.even_impedance = 40.0;  // below odd
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec = reference_coupler();
    spec.even_impedance = 80.0;
    spec.odd_impedance = 60.0;  // sqrt(ZeZo) ~ 69 ohm
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    CHECK_NOTHROW(spec.validate(false));
}

TEST_CASE("series capacitor corner") {
    CHECK(series_capacitor_corner(31.8e-12) == doctest::Approx(1.0 / (2 * constants::pi * 100.0 * 31.8e-12)));
    CHECK(series_capacitor_corner(31.8e-12) == doctest::Approx(50e6).epsilon(0.01));
    CHECK(series_capacitor_corner_numeric(31.8e-12) ==
          doctest::Approx(series_capacitor_corner(31.8e-12)).epsilon(1e-9));
}

TEST_CASE("bias tee is reciprocal and unitary when lossless") {
    const auto s = bias_tee_sparams(reference_bias_tee(), FrequencyGrid::linear(1e6, 30e9, 3001));
    CHECK(s.reciprocity_error() < 1e-10);
    CHECK(s.unitarity_error() < 1e-6);
}

TEST_CASE("bias tee dc port passes dc") {
    // Ports: 1 rf, 2 rf+dc (junction), 3 dc. The dc path runs 2 -> 3.
    const auto s = bias_tee_sparams(reference_bias_tee(), FrequencyGrid{{1e3, 1e4, 1e5}});
    CHECK(std::abs(s.at(0, 2, 1)) > 0.9999);
    CHECK(std::abs(s.at(0, 2, 1)) >= std::abs(s.at(2, 2, 1)) - 1e-9);
    CHECK(std::abs(s.at(0, 1, 0)) < 1e-3);  // capacitor blocks
}

TEST_CASE("bias tee through path with an open dc port matches a series C plus shunt stub") {
    const auto spec = reference_bias_tee();
    const auto grid = FrequencyGrid::linear(25e9, 30e9, 51);
    const auto s = bias_tee_through(spec, grid, DcTermination::Open);
    const double z0 = 50.0, zb = spec.dc_branch_impedance;
    const double v = 4e7, len = 8e-3;
    std::size_t transparent = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double w = 2 * constants::pi * grid[k];
        const double theta = w * len / v;
        const double cot = std::cos(theta) / std::sin(theta);
        const cd zc = 1.0 / cd(0.0, w * spec.series_capacitance);
        const cd zstub = cd(0.0, -zb * cot);
        // [1 zc; 0 1] * [1 0; 1/zstub 1]
        const cd a = 1.0 + zc / zstub, b = zc, c = 1.0 / zstub, d = 1.0;
        const cd s21 = 2.0 / (a + b / z0 + c * z0 + d);
        CHECK(std::abs(s.at(k, 1, 0) - s21) < 1e-9);
        if (std::abs(cot) > 1.0) {
            CHECK(s.magnitude_db(k, 2, 1) > -0.5);
            ++transparent;
        }
    }
    CHECK(transparent > grid.size() / 3);
}

TEST_CASE("dc branch resonances form a harmonic ladder") {
    const auto spec = reference_bias_tee();
    for (auto term : {DcTermination::Matched, DcTermination::Open}) {
        const auto r = dc_branch_resonances(spec, 20e9, term);
        REQUIRE(r.size() >= 3);
        for (std::size_t k = 1; k < r.size(); ++k) {
            const double ratio = r[k] / r[0];
            CHECK(std::abs(ratio - std::round(ratio)) < 1e-6 * ratio);
        }
    }
}

TEST_CASE("dc branch fundamental sits at v/2l (matched) or v/4l (open)") {
    const auto spec = reference_bias_tee();
    const double v = spec.branch_section().phase_velocity();
    CHECK(spec.branch_length() == doctest::Approx(8e-3).epsilon(1e-14));
    CHECK(v == doctest::Approx(4e7).epsilon(1e-12));
    CHECK(dc_branch_resonances(spec, 10e9, DcTermination::Matched).front() ==
          doctest::Approx(v / (2 * spec.branch_length())).epsilon(1e-9));
    CHECK(dc_branch_resonances(spec, 10e9, DcTermination::Open).front() ==
          doctest::Approx(v / (4 * spec.branch_length())).epsilon(1e-9));
}

TEST_CASE("doubling the dc branch halves every resonance") {
    auto spec = reference_bias_tee();
    const auto a = dc_branch_resonances(spec, 20e9);
    spec.dc_branch_squares *= 2;
    const auto b = dc_branch_resonances(spec, 20e9);
    REQUIRE(b.size() >= a.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(b[k] == doctest::Approx(a[k] / 2.0).epsilon(1e-9));
}

TEST_CASE("directivity falls steadily as the mode velocities split") {
    double prev = INFINITY;
    for (double split : {0.005, 0.01, 0.02, 0.05, 0.1}) {
        CouplerSpec spec = reference_coupler();
        spec.effective_phase_velocity_odd *= 1.0 + split;
        const auto m = coupler_metrics(coupler_sparams(spec, FrequencyGrid{{15e9}}));
        CHECK(m.directivity_db[0] < prev);
        prev = m.directivity_db[0];
    }
}
