#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "kitamp/errors.hpp"
#include "kitamp/network.hpp"
#include "kitamp/nonlinearity.hpp"
#include "kitamp/units.hpp"

using namespace kitamp;
using cd = std::complex<double>;

namespace {

constexpr double kPi = constants::pi;

double max_abs_diff(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Line of impedance z whose electrical length at `f` is `theta`.
LineSection line_with_phase(double z, double theta, double f) {
    const double v = 1e8;
    const double len = theta * v / (2 * kPi * f);
    return LineSection::from_l_and_impedance(z / v, z, len);
}

}  // namespace

TEST_CASE("matched lossless line is transparent") {
    const auto grid = FrequencyGrid::linear(1e9, 20e9, 57);
    const auto line = LineSection::from_l_and_impedance(50.0 / 1.2e8, 50.0, 0.0137);
    const auto s = abcd_to_sparams(line_abcd(line, grid), 50.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(std::abs(s.at(k, 0, 0)) < 1e-14);
        CHECK(std::abs(s.at(k, 1, 0)) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("half-wave line has ABCD equal to minus identity and S21 = -1") {
    const double f = 6e9;
    const FrequencyGrid grid{{f}};
    const auto abcd = line_abcd(line_with_phase(50.0, kPi, f), grid);
    CHECK(max_abs_diff(abcd[0], -Eigen::Matrix2cd::Identity()) < 1e-12);
    const auto s = abcd_to_sparams(abcd, 50.0);
    CHECK(std::abs(s.at(0, 1, 0) - cd(-1.0, 0.0)) < 1e-12);
}

TEST_CASE("quarter-wave 80 ohm line") {
    const double f = 3e9;
    const FrequencyGrid grid{{f}};
    const auto abcd = line_abcd(line_with_phase(80.0, kPi / 2, f), grid);
    Eigen::Matrix2cd expected;
    expected << cd(0, 0), cd(0, 80), cd(0, 1.0 / 80), cd(0, 0);
    CHECK(max_abs_diff(abcd[0], expected) < 1e-12);
}

TEST_CASE("two quarter-wave sections equal one half-wave section") {
    const double f = 5e9;
    const FrequencyGrid grid{{f, 1.3 * f, 2.7 * f}};
    const auto q = line_with_phase(50.0, kPi / 2, f);
    auto h = q;
    h.length *= 2;
    const auto two = cascade(line_abcd(q, grid), line_abcd(q, grid));
    const auto one = line_abcd(h, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) CHECK(max_abs_diff(two[k], one[k]) < 1e-12);
}

TEST_CASE("cascade identity and associativity") {
    const auto grid = FrequencyGrid::linear(0.5e9, 12e9, 31);
    const auto a = line_abcd(LineSection::from_l_and_impedance(4e-7, 50.0, 0.01), grid);
    const auto b = series_capacitor_abcd(2e-12, grid);
    const auto c = line_abcd(LineSection::from_l_and_impedance(6e-7, 80.0, 0.003), grid);
    const auto ai = cascade(a, TwoPortChain::identity(grid));
    const auto left = cascade(a, cascade(b, c));
    const auto right = cascade(cascade(a, b), c);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(max_abs_diff(ai[k], a[k]) == 0.0);
        CHECK(max_abs_diff(left[k], right[k]) < 1e-12 * (1.0 + left[k].cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("cascade refuses misaligned grids") {
    const auto a = TwoPortChain::identity(FrequencyGrid::linear(1e9, 2e9, 3));
    const auto b = TwoPortChain::identity(FrequencyGrid::linear(1e9, 2e9, 4));
    CHECK_THROWS_AS(cascade(a, b), AlignmentError);
}

TEST_CASE("repeat equals explicit cascading") {
    const auto grid = FrequencyGrid::linear(1e9, 9e9, 9);
    const auto a = cascade(line_abcd(LineSection::from_l_and_impedance(4e-7, 50.0, 0.002), grid),
                           line_abcd(LineSection::from_l_and_impedance(4e-7, 80.0, 0.001), grid));
    auto explicit_chain = TwoPortChain::identity(grid);
    for (int k = 0; k < 13; ++k) explicit_chain = cascade(explicit_chain, a);
    const auto fast = repeat(a, 13);
    for (std::size_t k = 0; k < grid.size(); ++k) CHECK(max_abs_diff(fast[k], explicit_chain[k]) < 1e-9);
}

TEST_CASE("identity ABCD maps to the ideal through") {
    const FrequencyGrid grid{{1e9}};
    const auto s = abcd_to_sparams(TwoPortChain::identity(grid), 50.0);
    CHECK(std::abs(s.at(0, 0, 0)) == 0.0);
    CHECK(std::abs(s.at(0, 1, 0) - 1.0) == 0.0);
    CHECK(std::abs(s.at(0, 0, 1) - 1.0) == 0.0);
    CHECK(std::abs(s.at(0, 1, 1)) == 0.0);
}

TEST_CASE("series 50 ohm impedance reflects one third") {
    const FrequencyGrid grid{{1e9}};
    const auto s = abcd_to_sparams(series_impedance_abcd({cd(50.0, 0.0)}, grid), 50.0);
    CHECK(s.at(0, 0, 0).real() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(s.at(0, 1, 0).real() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("ABCD to S and back is lossless to round-off") {
    const auto grid = FrequencyGrid::linear(0.1e9, 30e9, 301);
    const auto film = reference_film();
    const auto sc = supercell_chain(reference_supercell(), film, grid).supercell;
    const auto back = sparams_to_abcd(abcd_to_sparams(sc, 50.0));
    for (std::size_t k = 0; k < grid.size(); ++k)
        CHECK(max_abs_diff(back[k], sc[k]) < 1e-10 * (1.0 + sc[k].cwiseAbs().maxCoeff()));
}

TEST_CASE("lossy line has |S21| below one and det(ABCD) = 1") {
    const auto grid = FrequencyGrid::linear(1e9, 10e9, 10);
    const auto line = LineSection::from_l_and_impedance(4e-7, 50.0, 0.05, 0.5);
    const auto abcd = line_abcd(line, grid);
    CHECK(abcd.max_determinant_error() < 1e-12);
    const auto s = abcd_to_sparams(abcd, 50.0);
    for (std::size_t k = 0; k < grid.size(); ++k) CHECK(std::abs(s.at(k, 1, 0)) < 1.0);
}

TEST_CASE("line section validation catches inconsistent impedance") {
    LineSection s = LineSection::from_lc(4e-7, 1.6e-10, 0.01);
    CHECK(s.char_impedance == doctest::Approx(50.0));
    CHECK_NOTHROW(s.validate());
    s.char_impedance = 60.0;
    CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("reference supercell geometry gives 8.16 cm") {
    const auto spec = reference_supercell();
    CHECK(spec.supercell_length() == doctest::Approx(68e-6).epsilon(1e-15));
    CHECK(spec.total_length() == doctest::Approx(0.0816).epsilon(1e-15));
    CHECK(spec.total_length() == doctest::Approx(1200 * 34 * 2e-6).epsilon(1e-15));
}

TEST_CASE("doubling the cell length doubles the medium length") {
    auto spec = reference_supercell();
    const double base = spec.total_length();
    spec.unit_cell_length *= 2;
    CHECK(spec.total_length() == doctest::Approx(2 * base).epsilon(1e-15));
}

TEST_CASE("zero supercells is rejected") {
    auto spec = reference_supercell();
    spec.n_supercells = 0;
    CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("zero-length"), ValidationError);
}

TEST_CASE("supercell sections carry the film inductance and target impedances") {
    const auto film = reference_film();
    const auto sec = supercell_sections(reference_supercell(), film);
    CHECK(sec.unloaded.inductance_per_length == doctest::Approx(3.5e-5).epsilon(1e-14));
    CHECK(sec.loaded.inductance_per_length == doctest::Approx(3.5e-5).epsilon(1e-14));
    CHECK(sec.unloaded.char_impedance == doctest::Approx(50.0).epsilon(1e-14));
    CHECK(sec.loaded.char_impedance == doctest::Approx(80.0).epsilon(1e-14));
    CHECK(sec.unloaded.length == doctest::Approx(60e-6).epsilon(1e-14));
    CHECK(sec.loaded.length == doctest::Approx(8e-6).epsilon(1e-14));
}

TEST_CASE("supercell ABCD is unimodular across the band") {
    const auto grid = FrequencyGrid::linear(0.1e9, 40e9, 2001);
    const auto ch = supercell_chain(reference_supercell(), reference_film(), grid);
    CHECK(ch.supercell.max_determinant_error() < 1e-10);
}

TEST_CASE("terminating a matched port leaves the through path intact") {
    const auto grid = FrequencyGrid::linear(1e9, 5e9, 5);
    const auto s = abcd_to_sparams(line_abcd(LineSection::from_l_and_impedance(4e-7, 50.0, 0.01), grid), 50.0);
    const auto one = terminate_port(s, 2, cd(0.0, 0.0));
    CHECK(one.n_ports == 1);
    for (std::size_t k = 0; k < grid.size(); ++k) CHECK(std::abs(one.at(k, 0, 0)) < 1e-14);
    // A short behind a matched line reflects with magnitude one.
    const auto shorted = terminate_port(s, 2, cd(-1.0, 0.0));
    for (std::size_t k = 0; k < grid.size(); ++k) CHECK(std::abs(shorted.at(k, 0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("frequency grid validation") {
    CHECK_THROWS_AS((FrequencyGrid{{1e9, 1e9}}.validate()), ValidationError);
    CHECK_THROWS_AS((FrequencyGrid{{-1.0, 1e9}}.validate()), ValidationError);
    CHECK_NOTHROW(FrequencyGrid::linear(1e9, 2e9, 11).validate());
}

TEST_CASE("full medium S-parameters stay reciprocal and lossless deep in the stopbands") {
    const auto grid = FrequencyGrid::linear(9e9, 30e9, 2001);
    const auto ch = supercell_chain(reference_supercell(), reference_film(), grid);
    const auto s = abcd_to_sparams(ch.medium, 50.0);
    CHECK(s.reciprocity_error() < 1e-10);
    CHECK(s.unitarity_error() < 1e-10);
    // Somewhere in the first gap the through path is all but closed.
    double weakest = 1.0;
    for (std::size_t k = 0; k < grid.size(); ++k) weakest = std::min(weakest, std::abs(s.at(k, 1, 0)));
    CHECK(weakest < 1e-20);
}
