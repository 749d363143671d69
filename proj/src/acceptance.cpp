#include "rabi/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "rabi/calibrate.hpp"
#include "rabi/dynamics.hpp"
#include "rabi/model.hpp"
#include "rabi/quad.hpp"
#include "rabi/scenario.hpp"

namespace rabi {

namespace {

constexpr double kPi = std::numbers::pi;

struct Reference {
    double nbar;
    double g_prime;
    double omega_rabi_over_2pi;
    double tc_lo, tc_hi;  // us
    double tr_lo, tr_hi;  // us
};

constexpr Reference kScenarioA{0.85, 149084.0, 64.5457e3, 14.5, 15.5, 63.0, 65.0};
constexpr Reference kScenarioB{1.77, 152852.0, 80.9769e3, 12.0, 13.0, 73.0, 75.0};

double rel_diff(double value, double reference) { return std::abs(value - reference) / std::abs(reference); }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(8);
    os << v;
    return os.str();
}

struct Calibrated {
    ResonantSystem sys;
    LossModel loss;
    DriveField drive;
    Calibration cal;
};

Calibrated calibrate_reference(double nbar) {
    const ResonantSystem sys;
    const LossModel loss = net_quality_factor(sys);
    DriveField drive = poisson_weights(nbar);
    const Calibration cal = solve_coupling(CalibrationProblem{sys, loss, drive});
    return {sys, loss, std::move(drive), cal};
}

ModelInputs inputs_of(const Calibrated& c) { return {c.sys, c.loss, c.drive, c.cal, 1e-9}; }

// Fixed-step trapezoid on [0, x_max] of the substituted integrand, written out
// independently of the library integrand.
double trapezoid_oracle(const LineIntegralSpec& spec, double x_max, std::size_t points) {
    const auto f = [&](double x) {
        const double big_omega = std::sqrt(spec.omega_n * spec.omega_n + x * x);
        const double lorentz = spec.gamma * spec.gamma / (4.0 * x * x + spec.gamma * spec.gamma);
        const double s = std::sin(big_omega * spec.t / 2.0);
        return lorentz * s * s / (big_omega * big_omega);
    };
    const double h = x_max / static_cast<double>(points - 1);
    double sum = 0.5 * (f(0.0) + f(x_max));
    for (std::size_t i = 1; i + 1 < points; ++i) sum += f(h * static_cast<double>(i));
    return sum * h;
}

double window_mean(const TimeSeries& s, double lo, double hi) {
    // Trapezoid mean over samples inside [lo, hi].
    double area = 0.0;
    for (std::size_t i = 1; i < s.times.size(); ++i) {
        if (s.times[i - 1] < lo || s.times[i] > hi) continue;
        area += 0.5 * (s.p_multimode[i] + s.p_multimode[i - 1]) * (s.times[i] - s.times[i - 1]);
    }
    return area / (hi - lo);
}

double window_amplitude(const TimeSeries& s, double lo, double hi) {
    double mx = -std::numeric_limits<double>::infinity();
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        if (s.times[i] < lo || s.times[i] > hi) continue;
        mx = std::max(mx, s.p_multimode[i]);
        mn = std::min(mn, s.p_multimode[i]);
    }
    return mx - mn;
}

double mean_model_gap(const TimeSeries& s, double lo, double hi) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        if (s.times[i] < lo || s.times[i] > hi) continue;
        sum += std::abs(s.p_multimode[i] - s.p_singlemode[i]);
        ++count;
    }
    return sum / static_cast<double>(count);
}

// Half-maximum crossing of a decreasing function on [near, far] by bisection,
// finished with one linear interpolation between the last bracketing samples
// so the crossing is resolved below the spacing of representable frequencies.
double half_max_crossing(const std::function<double(double)>& spectrum, double center, double near, double far,
                         double half) {
    double inside = near;
    double outside = far;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (inside + outside);
        if (mid == inside || mid == outside) break;
        (spectrum(mid) > half ? inside : outside) = mid;
    }
    const double s_in = spectrum(inside);
    const double s_out = spectrum(outside);
    const double frac = (s_in - half) / (s_in - s_out);
    // Offsets from the center are exact in floating point this close to it.
    return (inside - center) + frac * (outside - inside);
}

CriterionResult criterion_quality_factor() {
    const LossModel loss = net_quality_factor(ResonantSystem{});
    const double rd = rel_diff(loss.q_net, 1.28318e6);
    return {1, "Quality factor chain", rd <= 1e-4,
            "Q' = " + fmt(loss.q_net) + ", reference 1.28318e6, rel diff " + fmt(rd) + " (tol 1e-4)"};
}

CriterionResult criterion_roots(const Calibrated& a, const Calibrated& b) {
    bool ok = true;
    std::string detail;
    for (const auto* pair : {&a, &b}) {
        const Reference& ref = pair == &a ? kScenarioA : kScenarioB;
        const double rd_g = rel_diff(pair->cal.g_prime, ref.g_prime);
        const double rd_w = rel_diff(pair->cal.omega_rabi, 2.0 * kPi * ref.omega_rabi_over_2pi);
        ok = ok && rd_g <= 2e-3 && rd_w <= 2e-3;
        detail += "nbar=" + fmt(ref.nbar) + ": g'=" + fmt(pair->cal.g_prime) + " (rel " + fmt(rd_g) +
                  "), Omega_R/2pi=" + fmt(pair->cal.omega_rabi / (2.0 * kPi)) + " (rel " + fmt(rd_w) + "); ";
    }
    return {2, "Calibration roots", ok, detail + "tol 2e-3"};
}

CriterionResult criterion_times(const Calibrated& a, const Calibrated& b) {
    bool ok = true;
    std::string detail;
    for (const auto* pair : {&a, &b}) {
        const Reference& ref = pair == &a ? kScenarioA : kScenarioB;
        const double tc = collapse_time(pair->cal.g_prime, ref.nbar) * 1e6;
        const double tr = revival_time(pair->cal.g_prime, ref.nbar) * 1e6;
        ok = ok && tc >= ref.tc_lo && tc <= ref.tc_hi && tr >= ref.tr_lo && tr <= ref.tr_hi;
        detail += "nbar=" + fmt(ref.nbar) + ": t_c=" + fmt(tc) + " us in [" + fmt(ref.tc_lo) + ", " +
                  fmt(ref.tc_hi) + "], t_r=" + fmt(tr) + " us in [" + fmt(ref.tr_lo) + ", " + fmt(ref.tr_hi) +
                  "]; ";
    }
    return {3, "Collapse/revival times", ok, detail};
}

CriterionResult criterion_two_route(const Calibrated& a, const Calibrated& b) {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> log_g(std::log(1e3), std::log(1e7));
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const Calibrated& c = i % 2 == 0 ? a : b;
        const double g = std::exp(log_g(rng));
        const double direct = f_of_g(g, c.sys, c.loss, c.drive);
        double via_integral = 0.0;
        for (std::size_t n = 0; n <= c.drive.n_max(); ++n) {
            const double omega_n = rabi_frequency(g, static_cast<double>(n));
            via_integral += c.sys.einstein_a * (4.0 / kPi) * (static_cast<double>(n) + 1.0) * c.drive.weight(n) *
                            rabi_line_integral_longtime(omega_n, c.loss.gamma);
        }
        worst = std::max(worst, rel_diff(direct, via_integral));
    }
    return {4, "Two-route long-time identity", worst <= 1e-10,
            "max rel diff " + fmt(worst) + " over 20 random g (tol 1e-10)"};
}

CriterionResult criterion_quadrature_oracle() {
    std::mt19937_64 rng(4321);
    std::uniform_real_distribution<double> log_omega(std::log(1e5), std::log(2e6));
    std::uniform_real_distribution<double> log_gamma(std::log(5e4), std::log(1e6));
    std::uniform_real_distribution<double> time_us(1.0, 20.0);
    constexpr std::size_t kPoints = 1000000;
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const auto spec = LineIntegralSpec::with_default_tolerances(time_us(rng) * 1e-6, std::exp(log_omega(rng)),
                                                                    std::exp(log_gamma(rng)));
        const LineIntegral adaptive = rabi_line_integral(spec);
        // Truncate the oracle where the tail can change the result by < 1e-10.
        double x_max = 2.0 * std::max(spec.omega_n, spec.gamma);
        while (tail_bound(x_max, spec) > 1e-10 * adaptive.value) x_max *= 1.1;
        const double oracle = trapezoid_oracle(spec, x_max, kPoints);
        worst = std::max(worst, rel_diff(adaptive.value, oracle));
    }
    return {5, "Quadrature oracle", worst <= 1e-8,
            "max rel diff vs 1e6-point trapezoid " + fmt(worst) + " over 20 random specs (tol 1e-8)"};
}

CriterionResult criterion_normalization(const Calibrated& a, const Calibrated& b, unsigned threads) {
    bool ok = true;
    std::string detail;
    for (const auto* pair : {&a, &b}) {
        const auto grid = uniform_grid(400e-6, 500e-6, 401);
        const TimeSeries s = sweep(grid, inputs_of(*pair), threads);
        const double mean = window_mean(s, 400e-6, 500e-6);
        ok = ok && std::abs(mean - 0.5) <= 0.01;
        detail += "nbar=" + fmt(pair->drive.nbar()) + ": mean P over [400, 500] us = " + fmt(mean) + "; ";
    }
    return {6, "End-to-end normalization", ok, detail + "target 0.50 +- 0.01"};
}

CriterionResult criterion_morphology(const TimeSeries& b_curve, const Calibrated& b) {
    const double tc = collapse_time(b.cal.g_prime, b.drive.nbar());
    const double tr = revival_time(b.cal.g_prime, b.drive.nbar());
    const double early = window_amplitude(b_curve, 0.0, 10e-6);
    const double collapsed = window_amplitude(b_curve, tc, tc + 10e-6);
    const double revived = window_amplitude(b_curve, tr - 10e-6, tr + 10e-6);
    return {7, "Collapse/revival morphology", collapsed < early && collapsed < revived,
            "nbar=1.77 amplitude [0,10]us=" + fmt(early) + ", [t_c,t_c+10]us=" + fmt(collapsed) +
                ", [t_r-10,t_r+10]us=" + fmt(revived)};
}

CriterionResult criterion_short_vs_long(const TimeSeries& a_curve, const TimeSeries& b_curve) {
    bool ok = true;
    std::string detail;
    for (const auto* s : {&a_curve, &b_curve}) {
        const double short_gap = mean_model_gap(*s, 0.0, 10e-6);
        const double long_gap = mean_model_gap(*s, 50e-6, 90e-6);
        ok = ok && short_gap < long_gap;
        detail += "nbar=" + fmt(s->meta.cal.nbar) + ": mean|P_mm-P_sm| [0,10]us=" + fmt(short_gap) +
                  ", [50,90]us=" + fmt(long_gap) + "; ";
    }
    return {8, "Short- vs long-time model divergence", ok, detail};
}

CriterionResult criterion_fwhm() {
    const ResonantSystem sys;
    const auto spectrum = [&sys](double omega) { return field_spectrum(omega, sys, 1.0); };
    const double peak = spectrum(sys.omega0);
    const double width = spectrum_fwhm(sys);
    const double right = half_max_crossing(spectrum, sys.omega0, sys.omega0, sys.omega0 + 10.0 * width, 0.5 * peak);
    const double left = half_max_crossing(spectrum, sys.omega0, sys.omega0, sys.omega0 - 10.0 * width, 0.5 * peak);
    const double measured = right - left;
    const double rd = rel_diff(measured, width);
    return {9, "Spectrum FWHM", rd <= 1e-9,
            "measured " + fmt(measured) + " rad/s vs omega0/Q " + fmt(width) + ", rel diff " + fmt(rd) +
                " (tol 1e-9)"};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

CriterionResult criterion_determinism(const AcceptanceOptions& options) {
    namespace fs = std::filesystem;
    const fs::path root = options.scratch_dir.empty() ? fs::temp_directory_path() / "rabi-acceptance"
                                                      : options.scratch_dir;
    Scenario scenario;
    scenario.name = "determinism";
    const ReportFiles first = run_report(scenario, root / "run1", options.threads);
    const ReportFiles second = run_report(scenario, root / "run2", options.threads);
    const bool curve_same = slurp(first.curve) == slurp(second.curve);
    const bool summary_same = slurp(*first.summary) == slurp(*second.summary);
    return {10, "Report determinism", curve_same && summary_same && !slurp(first.curve).empty(),
            std::string("curve ") + (curve_same ? "identical" : "DIFFERS") + ", summary " +
                (summary_same ? "identical" : "DIFFERS")};
}

template <class F>
CriterionResult guarded(int id, const char* title, F&& run) {
    try {
        return run();
    } catch (const std::exception& e) {
        return {id, title, false, std::string("raised: ") + e.what()};
    }
}

}  // namespace

std::string format_criterion(const CriterionResult& r) {
    return std::string(r.passed ? "[PASS] " : "[FAIL] ") + std::to_string(r.id) + " " + r.title + ": " + r.detail;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream* progress) {
    std::vector<CriterionResult> results;
    const auto record = [&](CriterionResult r) {
        if (progress != nullptr) *progress << format_criterion(r) << std::endl;
        results.push_back(std::move(r));
    };

    record(guarded(1, "Quality factor chain", criterion_quality_factor));

    const Calibrated a = calibrate_reference(kScenarioA.nbar);
    const Calibrated b = calibrate_reference(kScenarioB.nbar);
    record(guarded(2, "Calibration roots", [&] { return criterion_roots(a, b); }));
    record(guarded(3, "Collapse/revival times", [&] { return criterion_times(a, b); }));
    record(guarded(4, "Two-route long-time identity", [&] { return criterion_two_route(a, b); }));
    record(guarded(5, "Quadrature oracle", criterion_quadrature_oracle));
    record(guarded(6, "End-to-end normalization", [&] { return criterion_normalization(a, b, options.threads); }));

    // 0.1 us sampling resolves every Rabi period that carries visible weight.
    const double t_end = std::max(90e-6, revival_time(b.cal.g_prime, b.drive.nbar()) + 10e-6);
    const auto grid = uniform_grid(0.0, t_end, static_cast<std::size_t>(std::lround(t_end / 0.1e-6)) + 1);
    std::optional<TimeSeries> curve_a;
    std::optional<TimeSeries> curve_b;
    const auto curves = [&] {
        if (!curve_a) curve_a = sweep(grid, inputs_of(a), options.threads);
        if (!curve_b) curve_b = sweep(grid, inputs_of(b), options.threads);
    };
    record(guarded(7, "Collapse/revival morphology", [&] {
        curves();
        return criterion_morphology(*curve_b, b);
    }));
    record(guarded(8, "Short- vs long-time model divergence", [&] {
        curves();
        return criterion_short_vs_long(*curve_a, *curve_b);
    }));
    record(guarded(9, "Spectrum FWHM", criterion_fwhm));
    record(guarded(10, "Report determinism", [&] { return criterion_determinism(options); }));
    return results;
}

}  // namespace rabi
