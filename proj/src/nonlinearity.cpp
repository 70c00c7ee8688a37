#include "kitamp/nonlinearity.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "kitamp/errors.hpp"

namespace kitamp {

void FilmSpec::validate() const {
    std::vector<std::string> bad;
    auto positive = [&](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) bad.push_back(std::string(name) + " must be > 0");
    };
    positive(sheet_inductance, "film.sheet_inductance");
    positive(thickness, "film.thickness");
    positive(line_width, "film.line_width");
    positive(i_star, "film.i_star");
    positive(i_critical, "film.i_critical");
    if (i_critical > 0.0 && i_star > 0.0 && !(i_critical < i_star))
        bad.push_back("film.i_critical must be below film.i_star");
    if (!bad.empty()) {
        std::ostringstream os;
        for (std::size_t k = 0; k < bad.size(); ++k) os << (k ? "; " : "") << bad[k];
        throw ValidationError(os.str());
    }
}

void BiasState::validate(const FilmSpec& film) const {
    double total = std::abs(i_dc) + std::abs(i_pump_amplitude);
    if (!(total < film.i_critical)) {
        std::ostringstream os;
        os << "operating point |i_dc| + |i_p| = " << total << " A exceeds i_critical = "
           << film.i_critical << " A";
        throw OperatingPointError(os.str());
    }
}

FilmSpec reference_film() {
    return FilmSpec{35e-12, 10e-9, 1e-6, 2.8e-3, 800e-6};
}

double kinetic_inductance(const FilmSpec& film, double i_total) {
    if (!(std::abs(i_total) < film.i_star)) {
        std::ostringstream os;
        os << "kinetic_inductance: |I| = " << std::abs(i_total) << " A must be below i_star = "
           << film.i_star << " A";
        throw DomainError(os.str());
    }
    double x2 = (i_total / film.i_star) * (i_total / film.i_star);
    return film.sheet_inductance * (1.0 + x2 + x2 * x2);
}

double kinetic_inductance_slope(const FilmSpec& film, double i_total) {
    if (!(std::abs(i_total) < film.i_star))
        throw DomainError("kinetic_inductance_slope: |I| must be below i_star");
    double x = i_total / film.i_star;
    return film.sheet_inductance * (2.0 * x + 4.0 * x * x * x) / film.i_star;
}

MixingCoefficients mixing_coefficients(double i_star, double i_dc) {
    if (!(i_star > 0.0)) throw DomainError("mixing_coefficients: i_star must be > 0");
    double denom = i_star * i_star + i_dc * i_dc;
    return {2.0 * i_dc / denom, 1.0 / denom};
}

MixingCoefficients mixing_coefficients(const FilmSpec& film, double i_dc) {
    if (!(std::abs(i_dc) < film.i_critical)) {
        std::ostringstream os;
        os << "mixing_coefficients: |i_dc| = " << std::abs(i_dc)
           << " A is not below i_critical = " << film.i_critical << " A";
        throw OperatingPointError(os.str());
    }
    return mixing_coefficients(film.i_star, i_dc);
}

}  // namespace kitamp
