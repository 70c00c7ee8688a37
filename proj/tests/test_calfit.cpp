#include <cmath>
#include <sstream>

#include "doctest.h"
#include "kitamp/calfit.hpp"
#include "kitamp/errors.hpp"
#include "kitamp/lsq.hpp"
#include "kitamp/noisechain.hpp"
#include "kitamp/units.hpp"

using namespace kitamp;
using constants::elementary_charge;
using constants::planck;

namespace {

constexpr double kFs = 6.5e9, kFi = 7.5e9, kT = 0.03;

NoiseSweep truth_sweep(FitParams p, double noise = 0.0, std::uint64_t seed = 1, std::size_t n = 25) {
    return synthesize_sweep({p, symmetric_voltages(600e-6, n), noise, seed}, kFs, kFi, kT);
}

}  // namespace

TEST_CASE("model output at zero bias is twice the vacuum") {
    const FitParams p{1e9, 1.0, 0.0};
    CHECK(model_output(p, 0.0, 6e9, 6e9, 0.0, 1e6) == doctest::Approx(1e9 * planck * 6e9 * 1e6).epsilon(1e-14));
}

TEST_CASE("model output slope at large bias") {
    const FitParams p{1e9, 1.3, 2.0};
    const double v1 = 0.5, v2 = 0.6;  // far above hf/e
    const double slope = (model_output(p, v2, 6e9, 6e9, 0.0, 1e6) - model_output(p, v1, 6e9, 6e9, 0.0, 1e6)) / (v2 - v1);
    CHECK(slope == doctest::Approx(1e9 * 2.3 * 0.5 * elementary_charge * 1e6).epsilon(1e-9));
    // Distinct idler frequency: the idler asymptote scales with f_s / f_i.
    const double s2 = (model_output(p, v2, 6e9, 8e9, 0.0, 1e6) - model_output(p, v1, 6e9, 8e9, 0.0, 1e6)) / (v2 - v1);
    CHECK(s2 == doctest::Approx(1e9 * (1.0 + 1.3 * 6.0 / 8.0) * 0.5 * elementary_charge * 1e6).epsilon(1e-9));
}

TEST_CASE("model output scales linearly with bandwidth") {
    const FitParams p{3e8, 0.8, 1.7};
    for (double v : {-4e-4, 0.0, 1e-5, 3e-4})
        CHECK(model_output(p, v, kFs, kFi, kT, 2e6) == doctest::Approx(2.0 * model_output(p, v, kFs, kFi, kT, 1e6)).epsilon(1e-15));
}

TEST_CASE("noiseless synthesis is the model curve") {
    const FitParams p{1e9, 1.2, 2.9};
    const auto s = truth_sweep(p);
    for (std::size_t k = 0; k < s.voltages.size(); ++k)
        CHECK(s.power[k] == model_output(p, s.voltages[k], kFs, kFi, kT, 1e6));
}

TEST_CASE("synthesis is deterministic per seed") {
    const FitParams p{1e9, 1.2, 2.9};
    const auto a = truth_sweep(p, 0.01, 77), b = truth_sweep(p, 0.01, 77), c = truth_sweep(p, 0.01, 78);
    CHECK(a.power == b.power);
    CHECK(a.power != c.power);
}

TEST_CASE("sweep validation") {
    auto s = truth_sweep({1e9, 1.0, 1.0});
    CHECK_NOTHROW(s.validate());
    auto few = truth_sweep({1e9, 1.0, 1.0}, 0.0, 1, 5);
    CHECK_THROWS_AS(few.validate(), ValidationError);
    s.resolution_bandwidth = 0.0;
    CHECK_THROWS_AS(s.validate(), ValidationError);
    auto one_sided = truth_sweep({1e9, 1.0, 1.0});
    for (double& v : one_sided.voltages) v = std::abs(v) + 1e-6;
    CHECK_THROWS_AS(one_sided.validate(), ValidationError);
}

TEST_CASE("bounded parameter maps stay inside their bounds") {
    const BoundedParameter both{0.01, 100.0, true}, lin{-2.0, 3.0, false}, lo{0.0, INFINITY, false},
        pos{0.0, INFINITY, true};
    for (double x = -20.0; x <= 20.0; x += 0.37) {
        CHECK(both.to_external(x) >= 0.01 * (1 - 1e-15));
        CHECK(both.to_external(x) <= 100.0 * (1 + 1e-15));
        CHECK(lin.to_external(x) >= -2.0);
        CHECK(lin.to_external(x) <= 3.0);
        CHECK(lo.to_external(x) >= 0.0);
        CHECK(pos.to_external(x) > 0.0);
        const double h = 1e-6;
        for (const auto* m : {&both, &lin, &lo, &pos}) {
            const double fd = (m->to_external(x + h) - m->to_external(x - h)) / (2 * h);
            CHECK(m->derivative(x) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
        }
    }
    for (double p : {0.02, 1.0, 55.0}) CHECK(both.to_external(both.to_internal(p)) == doctest::Approx(p).epsilon(1e-12));
    CHECK(lo.to_external(lo.to_internal(2.9)) == doctest::Approx(2.9).epsilon(1e-14));
}

TEST_CASE("levenberg-marquardt solves Rosenbrock") {
    const ResidualFunction f = [](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
        r.resize(2);
        r << 10 * (x(1) - x(0) * x(0)), 1 - x(0);
        if (J) {
            J->resize(2, 2);
            *J << -20 * x(0), 10, -1, 0;
        }
    };
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    const auto res = levenberg_marquardt(f, x0);
    CHECK(res.converged);
    CHECK(res.x(0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(res.x(1) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("noiseless fit recovers the truth") {
    for (const FitParams p : {FitParams{1e9, 1.2, 2.9}, FitParams{db_to_power(90.0), 0.6, 0.4}, FitParams{5e7, 3.0, 8.0}}) {
        const auto r = fit_noise_sweep(truth_sweep(p));
        CHECK(r.converged);
        CHECK(std::abs(r.g_sys / p.g_sys - 1) < 1e-6);
        CHECK(std::abs(r.asymmetry / p.asymmetry - 1) < 1e-6);
        CHECK(std::abs(r.n_ex / p.n_ex - 1) < 1e-6);
        CHECK(r.n_sys == r.n_ex + 0.5);
        CHECK(r.starts.size() >= 3);
        double peak = 0.0;
        for (double w : truth_sweep(p).power) peak = std::max(peak, w);
        CHECK(r.residual_rms < 1e-8 * peak);
    }
}

TEST_CASE("fit is scale equivariant") {
    const FitParams p{1e9, 1.2, 2.9};
    auto s = truth_sweep(p);
    const auto a = fit_noise_sweep(s);
    for (double& w : s.power) w *= 37.5;
    const auto b = fit_noise_sweep(s);
    CHECK(b.g_sys / a.g_sys == doctest::Approx(37.5).epsilon(1e-7));
    CHECK(b.asymmetry == doctest::Approx(a.asymmetry).epsilon(1e-7));
    CHECK(b.n_ex == doctest::Approx(a.n_ex).epsilon(1e-7));
}

TEST_CASE("fitted parameters respect the bounds") {
    FitBounds tight;
    tight.asymmetry = {0.5, 1.0};  // truth 1.2 lies outside
    tight.n_ex = {0.0, 2.0};       // truth 2.9 lies outside
    const auto r = fit_noise_sweep(truth_sweep({1e9, 1.2, 2.9}, 0.01, 3), tight);
    CHECK(r.asymmetry >= 0.5);
    CHECK(r.asymmetry <= 1.0);
    CHECK(r.n_ex >= 0.0);
    CHECK(r.n_ex <= 2.0);
    CHECK((r.at_bound[1] || r.at_bound[2]));
}

TEST_CASE("noisy fit at 90 dB stays within one reported sigma most of the time") {
    const FitParams p{db_to_power(90.0), 1.2, 2.9};
    int inside = 0;
    const int runs = 40;
    for (int seed = 0; seed < runs; ++seed) {
        const auto r = fit_noise_sweep(truth_sweep(p, 0.01, seed));
        const double sg = std::sqrt(r.covariance(0, 0)), sr = std::sqrt(r.covariance(1, 1)),
                     sn = std::sqrt(r.covariance(2, 2));
        if (std::abs(r.g_sys - p.g_sys) < 2 * sg && std::abs(r.asymmetry - p.asymmetry) < 2 * sr &&
            std::abs(r.n_ex - p.n_ex) < 2 * sn)
            ++inside;
    }
    // Joint 2-sigma box for three roughly Gaussian estimates: ~87% coverage.
    CHECK(inside >= runs * 3 / 4);
}

TEST_CASE("widened asymmetry bounds expose a non-physical or boundary solution") {
    FitBounds wide;
    wide.asymmetry = {-2.0, 100.0};
    bool pathological = false;
    for (int seed = 0; seed < 40 && !pathological; ++seed) {
        const auto r = fit_noise_sweep(truth_sweep({db_to_power(90.0), 1.2, 2.9}, 0.01, seed), wide);
        for (const auto& s : r.starts) {
            const BoundedParameter a{wide.asymmetry.lo, wide.asymmetry.hi, false};
            const BoundedParameter n{wide.n_ex.lo, wide.n_ex.hi, false};
            if (s.final.asymmetry <= 0.0 || a.at_bound(s.final.asymmetry, 1e-4) || n.at_bound(s.final.n_ex, 1e-4))
                pathological = true;
        }
    }
    CHECK(pathological);
}

TEST_CASE("band fit medians") {
    const FitParams p{1e9, 1.0, 2.9};
    std::vector<NoiseSweep> one{truth_sweep(p)};
    auto b = fit_band(one, {}, 0.0, 1e12, {17.0});
    CHECK(b.median_n_sys == doctest::Approx(3.4).epsilon(1e-6));
    CHECK(b.median_true_gain_db == 17.0);
    std::vector<NoiseSweep> many;
    for (int k = 0; k < 6; ++k) {
        auto s = truth_sweep(p);
        s.frequency = 5e9 + k * 0.4e9;
        s.idler_frequency = 14e9 - s.frequency;
        s.power.clear();
        for (double v : s.voltages) s.power.push_back(model_output(p, v, s.frequency, s.idler_frequency, kT, 1e6));
        many.push_back(s);
    }
    b = fit_band(many, {}, 5.3e9, 6.3e9);
    CHECK(b.points_in_band == 3);
    CHECK(b.failed == 0);
    CHECK(b.median_n_sys == doctest::Approx(3.4).epsilon(1e-6));
    CHECK(std::isnan(b.median_true_gain_db));
}

TEST_CASE("band fit counts failures and keeps going") {
    std::vector<NoiseSweep> sweeps{truth_sweep({1e9, 1.0, 2.9}), truth_sweep({1e9, 1.0, 2.9})};
    for (double& w : sweeps[1].power) w = 0.0;
    const auto b = fit_band(sweeps, {}, 0.0, 1e12);
    CHECK(b.failed == 1);
    CHECK(!b.errors[1].empty());
    CHECK(b.median_n_sys == doctest::Approx(3.4).epsilon(1e-6));
}

TEST_CASE("sweep files and fit results round trip") {
    const auto s = truth_sweep({1e9, 1.2, 2.9}, 0.01, 9);
    std::stringstream csv;
    write_csv(csv, sweep_to_csv(s));
    const auto back = sweep_from_files(read_csv(csv), nlohmann::json::parse(sweep_sidecar(s).dump()));
    CHECK(back.voltages == s.voltages);
    CHECK(back.power == s.power);
    CHECK(back.frequency == s.frequency);
    CHECK(back.idler_frequency == s.idler_frequency);
    CHECK(back.temperature == s.temperature);
    const auto r = fit_noise_sweep(s);
    const auto r2 = fit_result_from_json(nlohmann::json::parse(fit_result_json(r).dump()));
    CHECK(fit_result_json(r2) == fit_result_json(r));
    CHECK(r2.covariance == r.covariance);
}

TEST_CASE("sidecar with missing fields is a parse error") {
    const auto s = truth_sweep({1e9, 1.2, 2.9});
    auto side = sweep_sidecar(s);
    side.erase("rbw_hz");
    CHECK_THROWS_AS(sweep_from_files(sweep_to_csv(s), side), ParseError);
}
