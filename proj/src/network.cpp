#include "kitamp/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "kitamp/errors.hpp"
#include "kitamp/units.hpp"

namespace kitamp {

FrequencyGrid FrequencyGrid::linear(double start, double stop, std::size_t count) {
    FrequencyGrid g;
    if (count == 0) throw ValidationError("FrequencyGrid: point count must be >= 1");
    g.points.resize(count);
    if (count == 1) {
        g.points[0] = start;
    } else {
        double step = (stop - start) / static_cast<double>(count - 1);
        for (std::size_t k = 0; k < count; ++k) g.points[k] = start + step * static_cast<double>(k);
        g.points.back() = stop;
    }
    g.validate();
    return g;
}

void FrequencyGrid::validate() const {
    if (points.empty()) throw ValidationError("FrequencyGrid: empty");
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (!(points[k] > 0.0) || !std::isfinite(points[k]))
            throw ValidationError("FrequencyGrid: point " + std::to_string(k) + " is not > 0");
        if (k > 0 && !(points[k] > points[k - 1]))
            throw ValidationError("FrequencyGrid: not strictly increasing at point " + std::to_string(k));
    }
}

LineSection LineSection::from_lc(double l_per_m, double c_per_m, double length, double loss) {
    LineSection s{std::sqrt(l_per_m / c_per_m), length, l_per_m, c_per_m, loss};
    s.validate();
    return s;
}

LineSection LineSection::from_l_and_impedance(double l_per_m, double z0, double length, double loss) {
    return from_lc(l_per_m, l_per_m / (z0 * z0), length, loss);
}

void LineSection::validate() const {
    if (!(length > 0.0)) throw ValidationError("LineSection: length must be > 0");
    if (!(inductance_per_length > 0.0) || !(capacitance_per_length > 0.0))
        throw ValidationError("LineSection: per-length L and C must be > 0");
    if (!(char_impedance > 0.0)) throw ValidationError("LineSection: char_impedance must be > 0");
    if (loss_per_length < 0.0) throw ValidationError("LineSection: loss_per_length must be >= 0");
    if (loss_per_length == 0.0) {
        double z = std::sqrt(inductance_per_length / capacitance_per_length);
        if (std::abs(z - char_impedance) > 1e-9 * z)
            throw ValidationError("LineSection: char_impedance inconsistent with sqrt(L'/C')");
    }
}

double LineSection::phase_velocity() const {
    return 1.0 / std::sqrt(inductance_per_length * capacitance_per_length);
}

TwoPortChain::TwoPortChain(FrequencyGrid grid, std::vector<Eigen::Matrix2cd> abcd)
    : grid_(std::move(grid)), abcd_(std::move(abcd)) {
    if (grid_.size() != abcd_.size())
        throw AlignmentError("TwoPortChain: matrix count does not match grid size");
}

TwoPortChain TwoPortChain::identity(const FrequencyGrid& grid) {
    return TwoPortChain(grid, std::vector<Eigen::Matrix2cd>(grid.size(), Eigen::Matrix2cd::Identity()));
}

double TwoPortChain::max_determinant_error() const {
    double worst = 0.0;
    for (const auto& m : abcd_) worst = std::max(worst, std::abs(m.determinant() - 1.0));
    return worst;
}

double NPortSParams::magnitude_db(std::size_t k, std::size_t i, std::size_t j) const {
    return amplitude_to_db(std::abs(matrix[k](i - 1, j - 1)));
}

double NPortSParams::reciprocity_error() const {
    double worst = 0.0;
    for (const auto& s : matrix) worst = std::max(worst, (s - s.transpose()).cwiseAbs().maxCoeff());
    return worst;
}

double NPortSParams::unitarity_error() const {
    double worst = 0.0;
    for (const auto& s : matrix) {
        Eigen::MatrixXcd e = s.adjoint() * s - Eigen::MatrixXcd::Identity(s.rows(), s.cols());
        worst = std::max(worst, e.cwiseAbs().maxCoeff());
    }
    return worst;
}

double NPortSParams::max_magnitude() const {
    double worst = 0.0;
    for (const auto& s : matrix) worst = std::max(worst, s.cwiseAbs().maxCoeff());
    return worst;
}

TwoPortChain line_abcd(const LineSection& section, const FrequencyGrid& grid) {
    section.validate();
    const double z0 = section.char_impedance;
    const double root_lc = std::sqrt(section.inductance_per_length * section.capacitance_per_length);
    std::vector<Eigen::Matrix2cd> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double beta = angular(grid[k]) * root_lc;
        Eigen::Matrix2cd m;
        if (section.loss_per_length == 0.0) {
            double c = std::cos(beta * section.length);
            double s = std::sin(beta * section.length);
            m << c, cdouble(0.0, z0 * s), cdouble(0.0, s / z0), c;
        } else {
            cdouble gl = cdouble(section.loss_per_length, beta) * section.length;
            cdouble ch = std::cosh(gl);
            cdouble sh = std::sinh(gl);
            m << ch, z0 * sh, sh / z0, ch;
        }
        out[k] = m;
    }
    return TwoPortChain(grid, std::move(out));
}

TwoPortChain series_impedance_abcd(const std::vector<cdouble>& impedance, const FrequencyGrid& grid) {
    if (impedance.size() != grid.size())
        throw AlignmentError("series_impedance_abcd: impedance count does not match grid");
    std::vector<Eigen::Matrix2cd> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] << 1.0, impedance[k], 0.0, 1.0;
    return TwoPortChain(grid, std::move(out));
}

TwoPortChain series_capacitor_abcd(double capacitance, const FrequencyGrid& grid) {
    std::vector<cdouble> z(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) z[k] = cdouble(0.0, -1.0 / (angular(grid[k]) * capacitance));
    return series_impedance_abcd(z, grid);
}

TwoPortChain cascade(std::span<const TwoPortChain> chains) {
    if (chains.empty()) throw AlignmentError("cascade: no chains given");
    const FrequencyGrid& grid = chains.front().grid();
    for (std::size_t c = 1; c < chains.size(); ++c)
        if (!(chains[c].grid() == grid))
            throw AlignmentError("cascade: chain " + std::to_string(c) + " uses a different frequency grid");
    std::vector<Eigen::Matrix2cd> out = chains.front().abcd();
    for (std::size_t c = 1; c < chains.size(); ++c)
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = (out[k] * chains[c][k]).eval();
    return TwoPortChain(grid, std::move(out));
}

TwoPortChain cascade(const TwoPortChain& first, const TwoPortChain& second) {
    const TwoPortChain both[] = {first, second};
    return cascade(std::span<const TwoPortChain>(both));
}

TwoPortChain repeat(const TwoPortChain& chain, std::size_t count) {
    std::vector<Eigen::Matrix2cd> out(chain.size());
    for (std::size_t k = 0; k < chain.size(); ++k) {
        Eigen::Matrix2cd result = Eigen::Matrix2cd::Identity();
        Eigen::Matrix2cd base = chain[k];
        std::size_t n = count;
        while (n > 0) {
            if (n & 1u) result = (result * base).eval();
            base = (base * base).eval();
            n >>= 1u;
        }
        out[k] = result;
    }
    return TwoPortChain(chain.grid(), std::move(out));
}

NPortSParams abcd_to_sparams(const TwoPortChain& chain, double z_ref) {
    if (!(z_ref > 0.0)) throw DomainError("abcd_to_sparams: z_ref must be > 0");
    NPortSParams out;
    out.n_ports = 2;
    out.grid = chain.grid();
    out.reference_impedance = z_ref;
    out.matrix.reserve(chain.size());
    for (std::size_t k = 0; k < chain.size(); ++k) {
        const auto& m = chain[k];
        cdouble a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
        cdouble den = a + b / z_ref + c * z_ref + d;
        if (!(std::abs(den) > 1e-300) || !std::isfinite(std::abs(den))) {
            std::ostringstream os;
            os << "abcd_to_sparams: singular denominator at index " << k << " (f = " << out.grid[k] << " Hz)";
            throw NumericalError(os.str(), k);
        }
        Eigen::MatrixXcd s(2, 2);
        s(0, 0) = (a + b / z_ref - c * z_ref - d) / den;
        // Long chains in a stopband have entries near e^(alpha L), and AD - BC
        // then loses every digit. A determinant that equals one within its own
        // rounding error is taken as exactly one, which keeps S12 = S21 for
        // reciprocal cascades.
        cdouble det = a * d - b * c;
        const double scale = std::abs(a * d) + std::abs(b * c);
        if (std::abs(det - 1.0) <= 64.0 * std::numeric_limits<double>::epsilon() * scale) det = 1.0;
        s(0, 1) = 2.0 * det / den;
        s(1, 0) = 2.0 / den;
        s(1, 1) = (-a + b / z_ref - c * z_ref + d) / den;
        out.matrix.push_back(std::move(s));
    }
    return out;
}

TwoPortChain sparams_to_abcd(const NPortSParams& sp) {
    if (sp.n_ports != 2) throw DomainError("sparams_to_abcd: only 2-port data can be converted");
    const double z = sp.reference_impedance;
    std::vector<Eigen::Matrix2cd> out(sp.matrix.size());
    for (std::size_t k = 0; k < sp.matrix.size(); ++k) {
        const auto& s = sp.matrix[k];
        cdouble s11 = s(0, 0), s12 = s(0, 1), s21 = s(1, 0), s22 = s(1, 1);
        if (!(std::abs(s21) > 1e-300)) {
            std::ostringstream os;
            os << "sparams_to_abcd: S21 vanishes at index " << k << " (f = " << sp.grid[k] << " Hz)";
            throw NumericalError(os.str(), k);
        }
        cdouble den = 2.0 * s21;
        out[k] << ((1.0 + s11) * (1.0 - s22) + s12 * s21) / den,
            z * ((1.0 + s11) * (1.0 + s22) - s12 * s21) / den,
            ((1.0 - s11) * (1.0 - s22) - s12 * s21) / (den * z),
            ((1.0 - s11) * (1.0 + s22) + s12 * s21) / den;
    }
    return TwoPortChain(sp.grid, std::move(out));
}

NPortSParams terminate_port(const NPortSParams& s, std::size_t port, cdouble gamma) {
    if (port < 1 || port > s.n_ports) throw DomainError("terminate_port: port index out of range");
    const Eigen::Index p = static_cast<Eigen::Index>(port - 1);
    const Eigen::Index n = static_cast<Eigen::Index>(s.n_ports);
    NPortSParams out;
    out.n_ports = s.n_ports - 1;
    out.grid = s.grid;
    out.reference_impedance = s.reference_impedance;
    out.matrix.reserve(s.matrix.size());
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i)
        if (i != p) keep.push_back(i);
    for (std::size_t k = 0; k < s.matrix.size(); ++k) {
        const auto& m = s.matrix[k];
        cdouble loop = 1.0 - m(p, p) * gamma;
        if (!(std::abs(loop) > 1e-300)) throw NumericalError("terminate_port: singular loop gain", k);
        Eigen::MatrixXcd r(n - 1, n - 1);
        for (std::size_t a = 0; a < keep.size(); ++a)
            for (std::size_t b = 0; b < keep.size(); ++b)
                r(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    m(keep[a], keep[b]) + m(keep[a], p) * gamma * m(p, keep[b]) / loop;
        out.matrix.push_back(std::move(r));
    }
    return out;
}

void SupercellSpec::validate() const {
    std::vector<std::string> bad;
    if (n_unloaded == 0) bad.emplace_back("supercell.n_unloaded must be >= 1");
    if (n_supercells == 0) bad.emplace_back("supercell.n_supercells must be >= 1 (zero-length medium)");
    if (!(unloaded_z0 > 0.0)) bad.emplace_back("supercell.unloaded_z0 must be > 0");
    if (!(loaded_z0 > 0.0)) bad.emplace_back("supercell.loaded_z0 must be > 0");
    if (!(unit_cell_length > 0.0)) bad.emplace_back("supercell.unit_cell_length must be > 0");
    if (!bad.empty()) {
        std::string msg;
        for (std::size_t k = 0; k < bad.size(); ++k) msg += (k ? "; " : "") + bad[k];
        throw ValidationError(msg);
    }
}

double SupercellSpec::supercell_length() const {
    return static_cast<double>(n_unloaded + n_loaded) * unit_cell_length;
}

double SupercellSpec::total_length() const {
    return static_cast<double>(n_supercells) * supercell_length();
}

SupercellSpec reference_supercell() { return SupercellSpec{30, 4, 50.0, 80.0, 2e-6, 1200}; }

SupercellSections supercell_sections(const SupercellSpec& spec, const FilmSpec& film,
                                     double inductance_scale) {
    spec.validate();
    film.validate();
    const double l0 = film.inductance_per_length();
    const double c_unloaded = l0 / (spec.unloaded_z0 * spec.unloaded_z0);
    const double c_loaded = l0 / (spec.loaded_z0 * spec.loaded_z0);
    const double l = l0 * inductance_scale;
    SupercellSections s{
        LineSection::from_lc(l, c_unloaded, static_cast<double>(spec.n_unloaded) * spec.unit_cell_length),
        LineSection::from_lc(l, c_loaded, static_cast<double>(std::max<std::size_t>(spec.n_loaded, 1)) *
                                              spec.unit_cell_length)};
    return s;
}

SupercellChain supercell_chain(const SupercellSpec& spec, const FilmSpec& film, const FrequencyGrid& grid,
                               double inductance_scale) {
    grid.validate();
    SupercellSections sec = supercell_sections(spec, film, inductance_scale);
    TwoPortChain cell = line_abcd(sec.unloaded, grid);
    if (spec.n_loaded > 0) cell = cascade(cell, line_abcd(sec.loaded, grid));
    TwoPortChain medium = repeat(cell, spec.n_supercells);
    return {std::move(cell), std::move(medium)};
}

}  // namespace kitamp
