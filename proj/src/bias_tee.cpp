#include "kitamp/bias_tee.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "kitamp/errors.hpp"
#include "kitamp/units.hpp"

namespace kitamp {

void BiasTeeSpec::validate() const {
    std::string bad;
    auto need = [&](double v, const char* name) {
        if (!(v > 0.0)) bad += (bad.empty() ? "" : "; ") + std::string(name) + " must be > 0";
    };
    need(series_capacitance, "bias_tee.series_capacitance");
    need(dc_branch_squares, "bias_tee.dc_branch_squares");
    need(dc_branch_width, "bias_tee.dc_branch_width");
    need(dc_branch_impedance, "bias_tee.dc_branch_impedance");
    need(sheet_inductance, "bias_tee.sheet_inductance");
    if (!bad.empty()) throw ValidationError(bad);
}

LineSection BiasTeeSpec::branch_section() const {
    validate();
    return LineSection::from_l_and_impedance(sheet_inductance / dc_branch_width, dc_branch_impedance,
                                             branch_length());
}

BiasTeeSpec reference_bias_tee() { return {31.8e-12, 4000.0, 2e-6, 700.0, 35e-12}; }

NPortSParams bias_tee_sparams(const BiasTeeSpec& spec, const FrequencyGrid& grid, double z_ref) {
    spec.validate();
    grid.validate();
    TwoPortChain line = line_abcd(spec.branch_section(), grid);
    NPortSParams out;
    out.n_ports = 3;
    out.grid = grid;
    out.reference_impedance = z_ref;
    out.matrix.reserve(grid.size());

    // Modified nodal analysis with the dc line kept in ABCD form, so the
    // system stays regular where the line is a whole number of half waves.
    // Unknowns: V1, VJ (= port 2), V3, I_line (into the line at J), I_out
    // (out of the line into port 3). Port k is driven by E_k through z_ref;
    // with a_k = 1, E_k = 2 sqrt(z_ref) and b_j = (2 V_j - E_j) / (2 sqrt(z_ref)).
    const double sz = std::sqrt(z_ref);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto& m = line[k];
        const cdouble yc(0.0, angular(grid[k]) * spec.series_capacitance);
        const double g = 1.0 / z_ref;
        Eigen::Matrix<cdouble, 5, 5> a = Eigen::Matrix<cdouble, 5, 5>::Zero();
        // node 1: g V1 + yc (V1 - VJ) = g E1
        a(0, 0) = g + yc;
        a(0, 1) = -yc;
        // node J: g VJ - yc (V1 - VJ) + I_line = g E2
        a(1, 0) = -yc;
        a(1, 1) = g + yc;
        a(1, 3) = 1.0;
        // node 3: g V3 - I_out = g E3
        a(2, 2) = g;
        a(2, 4) = -1.0;
        // VJ = A V3 + B I_out
        a(3, 1) = 1.0;
        a(3, 2) = -m(0, 0);
        a(3, 4) = -m(0, 1);
        // I_line = C V3 + D I_out
        a(4, 3) = 1.0;
        a(4, 2) = -m(1, 0);
        a(4, 4) = -m(1, 1);

        Eigen::Matrix<cdouble, 5, 3> rhs = Eigen::Matrix<cdouble, 5, 3>::Zero();
        for (int p = 0; p < 3; ++p) rhs(p, p) = g * 2.0 * sz;
        const auto lu = a.fullPivLu();
        if (!lu.isInvertible()) throw NumericalError("bias_tee_sparams: singular nodal system", k);
        const Eigen::Matrix<cdouble, 5, 3> v = lu.solve(rhs);

        const int node[3] = {0, 1, 2};
        Eigen::Matrix3cd sm;
        for (int j = 0; j < 3; ++j)
            for (int p = 0; p < 3; ++p) {
                const double e = j == p ? 2.0 * sz : 0.0;
                sm(j, p) = (2.0 * v(node[j], p) - e) / (2.0 * sz);
            }
        out.matrix.emplace_back(sm);
    }
    return out;
}

NPortSParams bias_tee_through(const BiasTeeSpec& spec, const FrequencyGrid& grid, DcTermination termination,
                              double z_ref) {
    cdouble gamma = termination == DcTermination::Open ? cdouble(1.0) : cdouble(0.0);
    return terminate_port(bias_tee_sparams(spec, grid, z_ref), 3, gamma);
}

double series_capacitor_corner(double capacitance, double z_source, double z_load) {
    return 1.0 / (2.0 * constants::pi * (z_source + z_load) * capacitance);
}

double series_capacitor_corner_numeric(double capacitance, double z_ref) {
    auto excess = [&](double f) {
        FrequencyGrid g{{f}};
        auto s = abcd_to_sparams(series_capacitor_abcd(capacitance, g), z_ref);
        return std::norm(s.matrix[0](1, 0)) - 0.5;
    };
    double lo = 1.0, hi = 1.0;
    while (excess(hi) < 0.0) hi *= 2.0;
    while (excess(lo) > 0.0) lo /= 2.0;
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(excess, lo, hi, boost::math::tools::eps_tolerance<double>(50),
                                               iters);
    return 0.5 * (r.first + r.second);
}

cdouble dc_branch_input_impedance(const BiasTeeSpec& spec, double frequency, DcTermination termination,
                                  double z_ref) {
    FrequencyGrid g{{frequency}};
    const auto m = line_abcd(spec.branch_section(), g)[0];
    if (termination == DcTermination::Open) return m(0, 0) / m(1, 0);
    return (m(0, 0) * z_ref + m(0, 1)) / (m(1, 0) * z_ref + m(1, 1));
}

std::vector<double> dc_branch_resonances(const BiasTeeSpec& spec, double f_max, DcTermination termination,
                                         double z_ref) {
    if (!(f_max > 0.0)) throw DomainError("dc_branch_resonances: f_max must be > 0");
    spec.validate();
    const double zb = spec.dc_branch_impedance;
    auto gamma = [&](double f) {
        cdouble zin = dc_branch_input_impedance(spec, f, termination, z_ref);
        if (!std::isfinite(std::abs(zin))) return cdouble(1.0, 0.0);
        return (zin - zb) / (zin + zb);
    };
    // Gamma_in turns once around the origin per v/(2 l); sample 32x finer.
    const double period = spec.branch_section().phase_velocity() / (2.0 * spec.branch_length());
    const std::size_t samples = static_cast<std::size_t>(std::ceil(32.0 * f_max / period)) + 2;
    const double step = f_max / static_cast<double>(samples);

    std::vector<double> out;
    double f_prev = step * 1e-3;
    cdouble g_prev = gamma(f_prev);
    for (std::size_t k = 1; k <= samples; ++k) {
        double f = std::min(step * static_cast<double>(k), f_max);
        cdouble g = gamma(f);
        bool sign_change = (g_prev.imag() <= 0.0) != (g.imag() <= 0.0);
        if (sign_change && g.real() < 0.0 && g_prev.real() < 0.0) {
            auto im = [&](double x) { return gamma(x).imag(); };
            std::uintmax_t iters = 200;
            auto r = boost::math::tools::toms748_solve(im, f_prev, f, boost::math::tools::eps_tolerance<double>(50),
                                                       iters);
            out.push_back(0.5 * (r.first + r.second));
        }
        f_prev = f;
        g_prev = g;
    }
    return out;
}

}  // namespace kitamp
