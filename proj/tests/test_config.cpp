#include <fstream>
#include <sstream>

#include "doctest.h"
#include "kitamp/config.hpp"
#include "kitamp/errors.hpp"

using namespace kitamp;

namespace {

std::string read_defaults() {
    std::ifstream in(std::string(KITAMP_SOURCE_DIR) + "/configs/reference.yaml");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto at = s.find(from);
    REQUIRE(at != std::string::npos);
    return s.replace(at, from.size(), to);
}

}  // namespace

TEST_CASE("shipped defaults parse and validate") {
    const auto c = parse_config(read_defaults());
    CHECK_NOTHROW(c.validate());
    CHECK(c.supercell.total_length() == doctest::Approx(0.0816).epsilon(1e-15));
    CHECK(c.film.i_star == 2.8e-3);
}

TEST_CASE("shipped defaults agree with the built-in reference project") {
    const auto a = parse_config(read_defaults());
    const auto b = reference_config();
    CHECK(a.film.sheet_inductance == b.film.sheet_inductance);
    CHECK(a.supercell.n_supercells == b.supercell.n_supercells);
    CHECK(a.coupler.even_impedance == doctest::Approx(b.coupler.even_impedance).epsilon(1e-12));
    CHECK(a.bias_tee.series_capacitance == b.bias_tee.series_capacitance);
    CHECK(a.bias.i_dc == b.bias.i_dc);
    CHECK(a.pump.frequency == b.pump.frequency);
    CHECK(a.calibration.n_ex == b.calibration.n_ex);
}

TEST_CASE("validation lists every failed field") {
    auto text = replace(read_defaults(), "n_supercells: 1200", "n_supercells: 0");
    text = replace(text, "series_capacitance: 31.8e-12", "series_capacitance: -1.0");
    const auto c = parse_config(text);
    try {
        c.validate();
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("supercell") != std::string::npos);
        CHECK(msg.find("bias_tee") != std::string::npos);
        CHECK(msg.find("2 problems") != std::string::npos);
    }
}

TEST_CASE("missing keys and malformed YAML are parse errors with a line") {
    CHECK_THROWS_AS(parse_config("film: {sheet_inductance: 1}\n"), ParseError);
    CHECK_THROWS_WITH_AS(parse_config("film:\n  a: [1, 2\n"), doctest::Contains("line"), ParseError);
    CHECK_THROWS_AS(parse_config(replace(read_defaults(), "i_star: 2.8e-3", "i_star: lots")), ParseError);
}

TEST_CASE("missing config file is an I/O error") {
    CHECK_THROWS_AS(load_config("/nonexistent/kit.yaml"), IoError);
}
