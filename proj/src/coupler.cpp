#include "kitamp/coupler.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "kitamp/errors.hpp"
#include "kitamp/units.hpp"

namespace kitamp {

void CouplerSpec::validate(bool require_matched) const {
    std::string bad;
    auto add = [&](const char* m) { bad += bad.empty() ? m : std::string("; ") + m; };
    if (!(coupled_length > 0.0)) add("coupler.coupled_length must be > 0");
    if (!(even_impedance > 0.0) || !(odd_impedance > 0.0)) add("coupler impedances must be > 0");
    if (!(effective_phase_velocity_even > 0.0) || !(effective_phase_velocity_odd > 0.0))
        add("coupler phase velocities must be > 0");
    if (even_impedance < odd_impedance) add("coupler.even_impedance must not be below odd_impedance");
    if (require_matched && even_impedance > 0.0 && odd_impedance > 0.0) {
        double zc = std::sqrt(even_impedance * odd_impedance);
        if (std::abs(zc - 50.0) > 0.05 * 50.0) add("coupler: sqrt(Ze*Zo) must be within 5% of 50 ohm");
    }
    if (!bad.empty()) throw ValidationError(bad);
}

double CouplerSpec::coupling_coefficient() const {
    return (even_impedance - odd_impedance) / (even_impedance + odd_impedance);
}

EvenOddImpedance coupler_impedances_for(double coupling_db, double z0) {
    if (!(coupling_db < 0.0)) throw DomainError("coupler_impedances_for: coupling must be negative dB");
    double k = std::pow(10.0, coupling_db / 20.0);
    double ratio = std::sqrt((1.0 + k) / (1.0 - k));
    return {z0 * ratio, z0 / ratio};
}

CouplerSpec reference_coupler() {
    auto z = coupler_impedances_for(-20.0);
    const double length = 1500e-6;
    const double v = 4.0 * length * 15e9;
    return {length, z.even, z.odd, v, v};
}

NPortSParams coupler_sparams(const CouplerSpec& spec, const FrequencyGrid& grid, double z_ref) {
    spec.validate(false);
    grid.validate();
    auto mode = [&](double z, double v) {
        // Any L', C' pair with the right Z and v will do.
        double l = z / v;
        double c = 1.0 / (z * v);
        return abcd_to_sparams(line_abcd(LineSection::from_lc(l, c, spec.coupled_length), grid), z_ref);
    };
    NPortSParams even = mode(spec.even_impedance, spec.effective_phase_velocity_even);
    NPortSParams odd = mode(spec.odd_impedance, spec.effective_phase_velocity_odd);

    NPortSParams out;
    out.n_ports = 4;
    out.grid = grid;
    out.reference_impedance = z_ref;
    out.matrix.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        // Mode two-ports are symmetric: S11 = S22, S21 = S12.
        cdouble ge = even.matrix[k](0, 0), te = even.matrix[k](1, 0);
        cdouble go = odd.matrix[k](0, 0), to = odd.matrix[k](1, 0);
        cdouble refl = 0.5 * (ge + go);
        cdouble thru = 0.5 * (te + to);
        cdouble near = 0.5 * (ge - go);   // same-end port on the other line
        cdouble far = 0.5 * (te - to);    // opposite-end port on the other line
        Eigen::MatrixXcd s(4, 4);
        // rows/cols: 0 = port 1, 1 = port 2, 2 = port 3, 3 = port 4
        s << refl, thru, near, far,
             thru, refl, far, near,
             near, far, refl, thru,
             far, near, thru, refl;
        out.matrix.push_back(std::move(s));
    }
    return out;
}

CouplerMetrics coupler_metrics(const NPortSParams& s) {
    if (s.n_ports != 4) throw DomainError("coupler_metrics: 4-port data required");
    CouplerMetrics m;
    const std::size_t n = s.grid.size();
    m.through_db.resize(n);
    m.forward_db.resize(n);
    m.reverse_db.resize(n);
    m.directivity_db.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        m.through_db[k] = s.magnitude_db(k, 2, 1);
        m.forward_db[k] = s.magnitude_db(k, 2, 4);
        m.reverse_db[k] = s.magnitude_db(k, 2, 3);
        double rev = std::abs(s.at(k, 1, 2));
        m.directivity_db[k] = rev == 0.0 ? std::numeric_limits<double>::infinity()
                                         : m.forward_db[k] - m.reverse_db[k];
    }
    return m;
}

}  // namespace kitamp
