#include "kitamp/calfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "kitamp/detail/parallel.hpp"
#include "kitamp/errors.hpp"
#include "kitamp/lsq.hpp"
#include "kitamp/noisechain.hpp"
#include "kitamp/units.hpp"

namespace kitamp {

using constants::elementary_charge;
using constants::planck;

void NoiseSweep::validate() const {
    std::ostringstream err;
    if (voltages.size() != power.size()) err << "; voltage and power lists differ in length";
    if (voltages.size() < 7) err << "; need at least 7 voltage points, got " << voltages.size();
    const bool neg = std::any_of(voltages.begin(), voltages.end(), [](double v) { return v < 0.0; });
    const bool pos = std::any_of(voltages.begin(), voltages.end(), [](double v) { return v > 0.0; });
    if (!neg || !pos) err << "; voltages must span both signs";
    if (!(resolution_bandwidth > 0.0)) err << "; resolution bandwidth must be > 0";
    if (!(frequency > 0.0) || !(idler_frequency > 0.0)) err << "; signal and idler frequencies must be > 0";
    if (!(temperature >= 0.0)) err << "; temperature must be >= 0";
    for (double p : power)
        if (!std::isfinite(p)) {
            err << "; non-finite power value";
            break;
        }
    if (!err.str().empty()) throw ValidationError("noise sweep: " + err.str().substr(2));
}

void FitBounds::validate() const {
    std::ostringstream err;
    auto check = [&](const Interval& i, const char* name) {
        if (!(i.lo < i.hi)) err << "; " << name << " bounds need lo < hi";
    };
    check(g_sys, "g_sys");
    check(asymmetry, "asymmetry");
    check(n_ex, "n_ex");
    if (!(g_sys.lo >= 0.0)) err << "; g_sys lower bound must be >= 0";
    if (!err.str().empty()) throw ValidationError("fit bounds: " + err.str().substr(2));
}

double model_output(const FitParams& p, double v, double f_signal, double f_idler, double temperature, double rbw) {
    const double ns = sntj_noise(v, f_signal, temperature);
    const double ni = sntj_noise(v, f_idler, temperature);
    return p.g_sys * (ns + p.asymmetry * ni + p.n_ex) * planck * f_signal * rbw;
}

void SyntheticSpec::validate() const {
    if (!(noise_fraction >= 0.0)) throw ValidationError("synthetic spec: noise fraction must be >= 0");
    if (!(truth.g_sys > 0.0)) throw ValidationError("synthetic spec: g_sys must be > 0");
    if (voltages.empty()) throw ValidationError("synthetic spec: empty voltage grid");
}

std::vector<double> symmetric_voltages(double v_max, std::size_t n) {
    if (n < 2) throw DomainError("symmetric_voltages: need at least two points");
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k)
        v[k] = -v_max + 2.0 * v_max * static_cast<double>(k) / static_cast<double>(n - 1);
    return v;
}

NoiseSweep synthesize_sweep(const SyntheticSpec& spec, double f_signal, double f_idler, double temperature,
                            double rbw) {
    spec.validate();
    NoiseSweep s{f_signal, f_idler, spec.voltages, {}, rbw, temperature};
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    s.power.reserve(spec.voltages.size());
    for (double v : spec.voltages) {
        double p = model_output(spec.truth, v, f_signal, f_idler, temperature, rbw);
        // Always draw, so the noise sequence does not depend on the fraction.
        const double z = gauss(rng);
        s.power.push_back(p * (1.0 + spec.noise_fraction * z));
    }
    return s;
}

namespace {

struct Problem {
    const NoiseSweep& sweep;
    std::array<BoundedParameter, 3> map;
    std::vector<double> ns, ni;  // junction noise per point
    double hfb = 0.0;
    double scale = 1.0;          // residual normalisation, W

    FitParams external(const Eigen::VectorXd& x) const {
        return {map[0].to_external(x(0)), map[1].to_external(x(1)), map[2].to_external(x(2))};
    }

    Eigen::VectorXd internal(const FitParams& p) const {
        Eigen::VectorXd x(3);
        x << map[0].to_internal(p.g_sys), map[1].to_internal(p.asymmetry), map[2].to_internal(p.n_ex);
        return x;
    }

    // Jacobian of the model in physical parameters, W per unit parameter.
    Eigen::MatrixXd physical_jacobian(const FitParams& p) const {
        const std::size_t m = ns.size();
        Eigen::MatrixXd J(m, 3);
        for (std::size_t k = 0; k < m; ++k) {
            J(k, 0) = (ns[k] + p.asymmetry * ni[k] + p.n_ex) * hfb;
            J(k, 1) = p.g_sys * ni[k] * hfb;
            J(k, 2) = p.g_sys * hfb;
        }
        return J;
    }

    void operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J) const {
        const FitParams p = external(x);
        const std::size_t m = ns.size();
        r.resize(static_cast<Eigen::Index>(m));
        for (std::size_t k = 0; k < m; ++k)
            r(k) = (p.g_sys * (ns[k] + p.asymmetry * ni[k] + p.n_ex) * hfb - sweep.power[k]) / scale;
        if (J) {
            *J = physical_jacobian(p) / scale;
            for (int j = 0; j < 3; ++j) J->col(j) *= map[j].derivative(x(j));
        }
    }
};

double clamp_inside(double v, const Interval& b) {
    const double lo = std::isfinite(b.lo) ? b.lo : -INFINITY;
    const double hi = std::isfinite(b.hi) ? b.hi : INFINITY;
    if (std::isfinite(lo) && std::isfinite(hi)) {
        const double margin = 1e-3 * (hi - lo);
        return std::clamp(v, lo + margin, hi - margin);
    }
    if (std::isfinite(lo)) return std::max(v, lo + std::max(1e-3 * std::abs(lo), 1e-2));
    if (std::isfinite(hi)) return std::min(v, hi - std::max(1e-3 * std::abs(hi), 1e-2));
    return v;
}

// Straight line P = a |V| + b through the outer half of the sweep.
std::pair<double, double> asymptote_line(const NoiseSweep& s) {
    double vmax = 0.0;
    for (double v : s.voltages) vmax = std::max(vmax, std::abs(v));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t k = 0; k < s.voltages.size(); ++k) {
        const double x = std::abs(s.voltages[k]);
        if (x < 0.5 * vmax) continue;
        sx += x;
        sy += s.power[k];
        sxx += x * x;
        sxy += x * s.power[k];
        ++n;
    }
    const double den = n * sxx - sx * sx;
    if (n < 2 || den <= 0.0) return {0.0, 0.0};
    const double a = (n * sxy - sx * sy) / den;
    return {a, (sy - a * sx) / n};
}

// The model is linear in (a, b, c) = (g, g r, g n_ex), and every bound is a
// linear inequality in those variables, so the bounded problem is a convex
// quadratic program. With three unknowns and at most six constraints the
// global minimum is found by trying every active set of size <= 3.
std::optional<FitParams> convex_solution(const Problem& prob, const FitBounds& bounds) {
    const std::size_t m = prob.ns.size();
    // Work in units where z = (a, b, c) / gref is of order one, so the KKT
    // matrix is well scaled against the unit constraint rows.
    double peak_n = 0.0;
    for (std::size_t k = 0; k < m; ++k) peak_n = std::max(peak_n, prob.ns[k] + prob.ni[k] + 1.0);
    const double gref = prob.scale / (prob.hfb * peak_n);
    Eigen::MatrixXd X(m, 3);
    Eigen::VectorXd y(m);
    for (std::size_t k = 0; k < m; ++k) {
        X(k, 0) = prob.ns[k] / peak_n;
        X(k, 1) = prob.ni[k] / peak_n;
        X(k, 2) = 1.0 / peak_n;
        y(k) = prob.sweep.power[k] / prob.scale;
    }
    // Rows of G z >= h.
    std::vector<Eigen::RowVector3d> G;
    std::vector<double> h;
    auto add = [&](double a, double b, double c, double rhs) {
        G.push_back(Eigen::RowVector3d(a, b, c));
        h.push_back(rhs);
    };
    if (std::isfinite(bounds.g_sys.lo)) add(1, 0, 0, bounds.g_sys.lo / gref);
    if (std::isfinite(bounds.g_sys.hi)) add(-1, 0, 0, -bounds.g_sys.hi / gref);
    if (std::isfinite(bounds.asymmetry.lo)) add(-bounds.asymmetry.lo, 1, 0, 0);
    if (std::isfinite(bounds.asymmetry.hi)) add(bounds.asymmetry.hi, -1, 0, 0);
    if (std::isfinite(bounds.n_ex.lo)) add(-bounds.n_ex.lo, 0, 1, 0);
    if (std::isfinite(bounds.n_ex.hi)) add(bounds.n_ex.hi, 0, -1, 0);
    const std::size_t nc = G.size();

    const Eigen::Matrix3d H = X.transpose() * X;
    const Eigen::Vector3d q = X.transpose() * y;
    double best = INFINITY;
    Eigen::Vector3d zbest = Eigen::Vector3d::Zero();
    for (unsigned mask = 0; mask < (1u << nc); ++mask) {
        const int active = __builtin_popcount(mask);
        if (active > 3) continue;
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(3 + active, 3 + active);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(3 + active);
        K.topLeftCorner(3, 3) = H;
        rhs.head(3) = q;
        int row = 3;
        for (std::size_t c = 0; c < nc; ++c)
            if (mask & (1u << c)) {
                K.block(row, 0, 1, 3) = G[c];
                K.block(0, row, 3, 1) = G[c].transpose();
                rhs(row) = h[c];
                ++row;
            }
        const auto lu = K.fullPivLu();
        if (!lu.isInvertible()) continue;
        const Eigen::Vector3d z = lu.solve(rhs).head(3);
        bool feasible = true;
        for (std::size_t c = 0; c < nc && feasible; ++c)
            feasible = G[c].dot(z) >= h[c] - 1e-12 * (1.0 + std::abs(h[c]) + G[c].cwiseAbs().dot(z.cwiseAbs()));
        if (!feasible || !(z(0) > 0.0)) continue;
        const double cost = (X * z - y).squaredNorm();
        if (cost < best) {
            best = cost;
            zbest = z;
        }
    }
    if (!std::isfinite(best)) return std::nullopt;
    FitParams p{zbest(0) * gref, zbest(1) / zbest(0), zbest(2) / zbest(0)};
    p.asymmetry = std::clamp(p.asymmetry, bounds.asymmetry.lo, bounds.asymmetry.hi);
    p.n_ex = std::clamp(p.n_ex, bounds.n_ex.lo, bounds.n_ex.hi);
    p.g_sys = std::clamp(p.g_sys, bounds.g_sys.lo, bounds.g_sys.hi);
    return p;
}

}  // namespace

FitResult fit_noise_sweep(const NoiseSweep& sweep, const FitBounds& bounds) {
    sweep.validate();
    bounds.validate();

    const double fs = sweep.frequency, fi = sweep.idler_frequency;
    Problem prob{sweep,
                 {BoundedParameter{bounds.g_sys.lo, bounds.g_sys.hi, true},
                  BoundedParameter{bounds.asymmetry.lo, bounds.asymmetry.hi, bounds.asymmetry.lo > 0.0},
                  BoundedParameter{bounds.n_ex.lo, bounds.n_ex.hi, false}},
                 {},
                 {},
                 planck * fs * sweep.resolution_bandwidth,
                 1.0};
    for (double v : sweep.voltages) {
        prob.ns.push_back(sntj_noise(v, fs, sweep.temperature));
        prob.ni.push_back(sntj_noise(v, fi, sweep.temperature));
    }
    prob.scale = 0.0;
    for (double p : sweep.power) prob.scale = std::max(prob.scale, std::abs(p));
    if (!(prob.scale > 0.0)) throw FitError("fit_noise_sweep: all measured powers are zero");

    // Moment estimates. Far above the crossover the junction noise is
    // e|V|/2hf, so the slope fixes G_sys (1 + r f_s/f_i) and the intercept
    // fixes G_sys N_ex.
    const auto [slope, intercept] = asymptote_line(sweep);
    auto g_from_slope = [&](double r) {
        const double g = slope / (0.5 * elementary_charge * sweep.resolution_bandwidth * (1.0 + r * fs / fi));
        return g > 0.0 ? g : prob.scale / (prob.hfb * 2.0);
    };
    std::size_t k0 = 0;
    for (std::size_t k = 1; k < sweep.voltages.size(); ++k)
        if (std::abs(sweep.voltages[k]) < std::abs(sweep.voltages[k0])) k0 = k;

    std::vector<std::pair<std::string, FitParams>> initial;
    {
        const double g = g_from_slope(1.0);
        initial.push_back({"flat-asymmetry", {g, 1.0, sweep.power[k0] / (g * prob.hfb) - prob.ns[k0] - prob.ni[k0]}});
    }
    {
        const double r = 0.1;
        const double g = g_from_slope(r);
        initial.push_back({"hemt-only", {g, r, intercept / (g * prob.hfb)}});
    }
    {
        const double g = g_from_slope(1.0);
        initial.push_back({"asymptote-slope", {g, 1.0, intercept / (g * prob.hfb)}});
    }

    const auto exact = convex_solution(prob, bounds);

    FitResult best;
    best.frequency = fs;
    double best_cost = INFINITY;
    bool any = false;
    const ResidualFunction fn = [&prob](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
        prob(x, r, J);
    };
    for (auto& [label, p0] : initial) {
        p0.g_sys = clamp_inside(p0.g_sys, bounds.g_sys);
        p0.asymmetry = clamp_inside(p0.asymmetry, bounds.asymmetry);
        p0.n_ex = clamp_inside(std::isfinite(p0.n_ex) ? p0.n_ex : 1.0, bounds.n_ex);
    }
    // Started exactly on the convex optimum, which may sit on a bound.
    if (exact) initial.push_back({"convex-projection", *exact});

    for (std::size_t s = 0; s < initial.size(); ++s) {
        const FitParams p0 = initial[s].second;
        FitStart st{initial[s].first, p0, {}, 0.0, 0, false, {}};
        LsqResult lr = levenberg_marquardt(fn, prob.internal(p0));
        st.final = prob.external(lr.x);
        st.cost = lr.cost;
        st.iterations = lr.iterations;
        st.converged = lr.converged;
        st.message = lr.message;
        best.starts.push_back(st);
        if (st.converged && st.cost < best_cost) {
            best_cost = st.cost;
            best.chosen_start = s;
            any = true;
        }
    }
    if (!any) {
        std::ostringstream os;
        os << "fit_noise_sweep at " << fs << " Hz: no start converged";
        for (const auto& st : best.starts)
            os << "; [" << st.label << "] (" << st.final.g_sys << ", " << st.final.asymmetry << ", " << st.final.n_ex << ") cost " << st.cost << " after " << st.iterations << " iterations: "
               << st.message;
        throw FitError(os.str());
    }

    const FitStart& chosen = best.starts[best.chosen_start];
    const FitParams p = chosen.final;
    best.g_sys = p.g_sys;
    best.g_sys_db = power_to_db(p.g_sys);
    best.asymmetry = p.asymmetry;
    best.n_ex = p.n_ex;
    best.n_sys = p.n_ex + 0.5;
    best.converged = true;

    const std::size_t m = sweep.voltages.size();
    double ssr = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double d = p.g_sys * (prob.ns[k] + p.asymmetry * prob.ni[k] + p.n_ex) * prob.hfb - sweep.power[k];
        ssr += d * d;
    }
    best.residual_rms = std::sqrt(ssr / static_cast<double>(m));
    const Eigen::MatrixXd J = prob.physical_jacobian(p);
    const double sigma2 = m > 3 ? ssr / static_cast<double>(m - 3) : 0.0;
    // Columns differ by many decades (W per unit gain vs W per quantum), so
    // equilibrate before the pseudo-inverse.
    Eigen::Vector3d col = J.colwise().norm().transpose();
    for (int i = 0; i < 3; ++i)
        if (!(col(i) > 0.0)) col(i) = 1.0;
    const Eigen::MatrixXd Jn = J * col.cwiseInverse().asDiagonal();
    const Eigen::Matrix3d inv = (Jn.transpose() * Jn).completeOrthogonalDecomposition().pseudoInverse();
    best.covariance = sigma2 * col.cwiseInverse().asDiagonal() * inv * col.cwiseInverse().asDiagonal();
    best.at_bound = {prob.map[0].at_bound(p.g_sys), prob.map[1].at_bound(p.asymmetry),
                     prob.map[2].at_bound(p.n_ex)};
    return best;
}

BandFit fit_band(const std::vector<NoiseSweep>& sweeps, const FitBounds& bounds, double band_lower,
                 double band_upper, const std::vector<double>& true_gain_db) {
    if (sweeps.empty()) throw ValidationError("fit_band: no sweeps supplied");
    if (!(band_lower <= band_upper)) throw ValidationError("fit_band: band lower edge above upper edge");
    if (!true_gain_db.empty() && true_gain_db.size() != sweeps.size())
        throw AlignmentError("fit_band: one true-gain value per sweep is required");
    bounds.validate();

    BandFit band;
    const std::size_t n = sweeps.size();
    band.frequencies.resize(n);
    band.results.resize(n);
    band.errors.resize(n);
    band.band_lower = band_lower;
    band.band_upper = band_upper;
    detail::parallel_for(n, [&](std::size_t k) {
        band.frequencies[k] = sweeps[k].frequency;
        try {
            band.results[k] = fit_noise_sweep(sweeps[k], bounds);
        } catch (const Error& e) {
            band.errors[k] = e.what();
        }
    });

    std::vector<double> nsys, gains;
    for (std::size_t k = 0; k < n; ++k) {
        const double f = band.frequencies[k];
        if (f < band_lower || f > band_upper) continue;
        ++band.points_in_band;
        if (!band.results[k]) {
            ++band.failed;
            continue;
        }
        nsys.push_back(band.results[k]->n_sys);
        if (!true_gain_db.empty()) gains.push_back(true_gain_db[k]);
    }
    band.median_n_sys = detail::median(nsys);
    band.median_true_gain_db = detail::median(gains);
    return band;
}

CsvTable sweep_to_csv(const NoiseSweep& s) {
    CsvTable t{{"voltage_v", "power_w"}, {}};
    for (std::size_t k = 0; k < s.voltages.size(); ++k)
        t.rows.push_back({format_double(s.voltages[k]), format_double(s.power[k])});
    return t;
}

nlohmann::json sweep_sidecar(const NoiseSweep& s) {
    return {{"frequency_hz", s.frequency},
            {"idler_frequency_hz", s.idler_frequency},
            {"rbw_hz", s.resolution_bandwidth},
            {"temperature_k", s.temperature}};
}

NoiseSweep sweep_from_files(const CsvTable& table, const nlohmann::json& sidecar) {
    NoiseSweep s;
    s.voltages = table.numeric_column("voltage_v");
    s.power = table.numeric_column("power_w");
    try {
        s.frequency = sidecar.at("frequency_hz").get<double>();
        s.idler_frequency = sidecar.at("idler_frequency_hz").get<double>();
        s.resolution_bandwidth = sidecar.at("rbw_hz").get<double>();
        s.temperature = sidecar.at("temperature_k").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("sweep sidecar: ") + e.what(), 1);
    }
    s.validate();
    return s;
}

nlohmann::json fit_result_json(const FitResult& r) {
    nlohmann::json cov = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) cov.push_back({r.covariance(i, 0), r.covariance(i, 1), r.covariance(i, 2)});
    nlohmann::json starts = nlohmann::json::array();
    for (const auto& s : r.starts)
        starts.push_back({{"label", s.label},
                          {"initial", {s.initial.g_sys, s.initial.asymmetry, s.initial.n_ex}},
                          {"final", {s.final.g_sys, s.final.asymmetry, s.final.n_ex}},
                          {"cost", s.cost},
                          {"iterations", s.iterations},
                          {"converged", s.converged},
                          {"message", s.message}});
    return {{"frequency_hz", r.frequency},
            {"g_sys", r.g_sys},
            {"g_sys_db", r.g_sys_db},
            {"asymmetry", r.asymmetry},
            {"n_ex", r.n_ex},
            {"n_sys", r.n_sys},
            {"residual_rms_w", r.residual_rms},
            {"covariance", cov},
            {"converged", r.converged},
            {"at_bound", {{"g_sys", r.at_bound[0]}, {"asymmetry", r.at_bound[1]}, {"n_ex", r.at_bound[2]}}},
            {"chosen_start", r.chosen_start},
            {"starts", starts}};
}

FitResult fit_result_from_json(const nlohmann::json& j) {
    FitResult r;
    try {
        r.frequency = j.at("frequency_hz").get<double>();
        r.g_sys = j.at("g_sys").get<double>();
        r.g_sys_db = j.at("g_sys_db").get<double>();
        r.asymmetry = j.at("asymmetry").get<double>();
        r.n_ex = j.at("n_ex").get<double>();
        r.n_sys = j.at("n_sys").get<double>();
        r.residual_rms = j.at("residual_rms_w").get<double>();
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k) r.covariance(i, k) = j.at("covariance").at(i).at(k).get<double>();
        r.converged = j.at("converged").get<bool>();
        r.at_bound = {j.at("at_bound").at("g_sys").get<bool>(), j.at("at_bound").at("asymmetry").get<bool>(),
                      j.at("at_bound").at("n_ex").get<bool>()};
        r.chosen_start = j.at("chosen_start").get<std::size_t>();
        for (const auto& s : j.at("starts")) {
            FitStart st;
            st.label = s.at("label").get<std::string>();
            st.initial = {s.at("initial").at(0).get<double>(), s.at("initial").at(1).get<double>(),
                          s.at("initial").at(2).get<double>()};
            st.final = {s.at("final").at(0).get<double>(), s.at("final").at(1).get<double>(),
                        s.at("final").at(2).get<double>()};
            st.cost = s.at("cost").get<double>();
            st.iterations = s.at("iterations").get<int>();
            st.converged = s.at("converged").get<bool>();
            st.message = s.at("message").get<std::string>();
            r.starts.push_back(st);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("fit result: ") + e.what(), 1);
    }
    return r;
}

nlohmann::json band_fit_json(const BandFit& b) {
    nlohmann::json points = nlohmann::json::array();
    for (std::size_t k = 0; k < b.frequencies.size(); ++k) {
        nlohmann::json p = {{"frequency_hz", b.frequencies[k]}};
        if (b.results[k]) {
            p["n_sys"] = b.results[k]->n_sys;
            p["g_sys_db"] = b.results[k]->g_sys_db;
            p["asymmetry"] = b.results[k]->asymmetry;
        } else {
            p["error"] = b.errors[k];
        }
        points.push_back(p);
    }
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    return {{"band_lower_hz", b.band_lower},
            {"band_upper_hz", b.band_upper},
            {"median_n_sys", num(b.median_n_sys)},
            {"median_true_gain_db", num(b.median_true_gain_db)},
            {"points_in_band", b.points_in_band},
            {"failed", b.failed},
            {"points", points}};
}

}  // namespace kitamp
