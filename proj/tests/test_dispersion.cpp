#include <cmath>
#include <vector>

#include "doctest.h"
#include "kitamp/dispersion.hpp"
#include "kitamp/errors.hpp"
#include "kitamp/network.hpp"
#include "kitamp/nonlinearity.hpp"
#include "kitamp/units.hpp"

using namespace kitamp;

namespace {

constexpr double kPi = constants::pi;

struct TwoSection {
    double z1, v1, l1, z2, v2, l2;

    // Half trace of the two-section unit cell, written out independently of
    // the ABCD machinery.
    double half_trace(double f) const {
        const double t1 = 2 * kPi * f * l1 / v1;
        const double t2 = 2 * kPi * f * l2 / v2;
        return std::cos(t1) * std::cos(t2) - 0.5 * (z1 / z2 + z2 / z1) * std::sin(t1) * std::sin(t2);
    }
};

TwoSection reference_cell() {
    const double lp = reference_film().inductance_per_length();
    return {50.0, 50.0 / lp, 60e-6, 80.0, 80.0 / lp, 8e-6};
}

// Bisection on |t| - 1 between a passband and a stopband sample.
double edge(const TwoSection& c, double a, double b) {
    auto g = [&](double f) { return std::abs(c.half_trace(f)) - 1.0; };
    double ga = g(a);
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (a + b);
        const double gm = g(m);
        if ((gm > 0) == (ga > 0)) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

std::vector<Stopband> oracle_stopbands(const TwoSection& c, double f_max, std::size_t n) {
    std::vector<Stopband> out;
    bool inside = false;
    double prev = 0.0, lower = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double f = f_max * static_cast<double>(k) / static_cast<double>(n);
        const bool s = std::abs(c.half_trace(f)) > 1.0;
        if (s && !inside) lower = edge(c, prev, f);
        if (!s && inside) out.push_back({lower, edge(c, prev, f)});
        inside = s;
        prev = f;
    }
    return out;
}

BlochDispersion reference_dispersion(std::size_t n, double f_max, double first = 1e6) {
    const auto grid = FrequencyGrid::linear(first, f_max, n);
    const auto spec = reference_supercell();
    const auto ch = supercell_chain(spec, reference_film(), grid);
    return bloch_dispersion(ch.supercell, spec.supercell_length());
}

}  // namespace

TEST_CASE("long-wavelength limit matches the averaged line") {
    const auto d = reference_dispersion(20001, 40e9);
    const auto c = reference_cell();
    // Total series L and shunt C of one period.
    const double lp = reference_film().inductance_per_length();
    const double ltot = lp * (c.l1 + c.l2);
    const double ctot = lp / (c.z1 * c.z1) * c.l1 + lp / (c.z2 * c.z2) * c.l2;
    const double v_avg = (c.l1 + c.l2) / std::sqrt(ltot * ctot);
    const double f = 50e6;
    CHECK(d.wavenumber_at(f) == doctest::Approx(2 * kPi * f / v_avg).epsilon(1e-4));
}

TEST_CASE("uniform line has linear dispersion and no stopbands") {
    auto spec = reference_supercell();
    spec.n_loaded = 0;
    const auto grid = FrequencyGrid::linear(1e6, 40e9, 4001);
    const auto ch = supercell_chain(spec, reference_film(), grid);
    const auto d = bloch_dispersion(ch.supercell, spec.supercell_length());
    CHECK(d.stopbands().empty());
    const double v = 50.0 / reference_film().inductance_per_length();
    for (std::size_t k = 0; k < grid.size(); k += 97)
        CHECK(d.points()[k].wavenumber == doctest::Approx(2 * kPi * grid[k] / v).epsilon(1e-9));
}

TEST_CASE("reference supercell stopbands agree with the closed-form trace") {
    const double f_max = 30e9;
    const std::size_t n = 30001;
    const auto d = reference_dispersion(n, f_max);
    const auto oracle = oracle_stopbands(reference_cell(), f_max, 300000);
    const auto bands = d.stopbands();
    REQUIRE(bands.size() == oracle.size());
    REQUIRE(bands.size() >= 2);
    const double df = f_max / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < bands.size(); ++k) {
        CHECK(std::abs(bands[k].lower - oracle[k].lower) < 1.5 * df);
        CHECK(std::abs(bands[k].upper - oracle[k].upper) < 1.5 * df);
    }
    // Unbiased line: first gap a little above 10.5 GHz, roughly 0.8 GHz wide.
    CHECK(bands[0].lower > 10.3e9);
    CHECK(bands[0].lower < 10.7e9);
    CHECK(bands[0].upper - bands[0].lower > 0.6e9);
    CHECK(bands[0].upper - bands[0].lower < 1.0e9);
}

TEST_CASE("first stopband contains the half-wavelength frequency of the supercell") {
    const auto c = reference_cell();
    const double delay = c.l1 / c.v1 + c.l2 / c.v2;
    const double f_pi = 1.0 / (2.0 * delay);
    const auto bands = reference_dispersion(20001, 25e9).stopbands();
    REQUIRE(!bands.empty());
    CHECK(bands[0].lower < f_pi);
    CHECK(f_pi < bands[0].upper);
}

TEST_CASE("stopband attenuation and pinned phase") {
    const auto d = reference_dispersion(20001, 25e9);
    const auto c = reference_cell();
    const double period = 68e-6;
    bool seen = false;
    for (std::size_t k = 0; k < d.grid().size(); ++k) {
        const auto& p = d.points()[k];
        if (!p.in_stopband) {
            CHECK(p.attenuation == 0.0);
            continue;
        }
        seen = true;
        const double t = std::abs(c.half_trace(d.grid()[k]));
        CHECK(p.attenuation == doctest::Approx(std::acosh(t) / period).epsilon(1e-6));
        const double phase = p.wavenumber * period / kPi;
        CHECK(std::abs(phase - std::round(phase)) < 1e-9);
    }
    CHECK(seen);
}

TEST_CASE("wavenumber lookup is refused inside a stopband") {
    const auto d = reference_dispersion(20001, 25e9);
    const auto gap = d.stopbands().front();
    CHECK_THROWS_AS(d.wavenumber_at(gap.center()), StopbandError);
    CHECK(d.in_stopband_at(gap.center()));
    CHECK_NOTHROW(d.wavenumber_at(0.5 * gap.lower));
    CHECK_THROWS_AS(d.wavenumber_at(30e9), DomainError);
}

TEST_CASE("wavenumber increases monotonically through the passbands") {
    const auto d = reference_dispersion(20001, 25e9);
    double prev = -1.0;
    for (const auto& p : d.points()) {
        CHECK(p.wavenumber >= prev - 1e-9);
        prev = p.wavenumber;
    }
}

TEST_CASE("linear dispersion helper") {
    const auto grid = FrequencyGrid::linear(1e9, 10e9, 10);
    const auto d = BlochDispersion::linear(grid, 1e8, 1e-3);
    CHECK(d.wavenumber_at(5.5e9) == doctest::Approx(2 * kPi * 5.5e9 / 1e8).epsilon(1e-12));
    CHECK(d.stopbands().empty());
}

TEST_CASE("N cascaded supercells advance the Bloch phase N times") {
    auto spec = reference_supercell();
    spec.n_supercells = 7;
    const auto grid = FrequencyGrid::linear(0.5e9, 10e9, 40);
    const auto ch = supercell_chain(spec, reference_film(), grid);
    const auto d = bloch_dispersion(ch.supercell, spec.supercell_length());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto& m = ch.medium[k];
        const double half_trace = 0.5 * (m(0, 0) + m(1, 1)).real();
        const double phase = 7.0 * d.points()[k].wavenumber * spec.supercell_length();
        CHECK(half_trace == doctest::Approx(std::cos(phase)).epsilon(1e-9).scale(1.0));
    }
}
