#include "rabi/calibrate.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rabi/error.hpp"

namespace rabi {

namespace {

constexpr int kMaxExpansions = 30;
constexpr int kMaxIterations = 500;

void require_coupling(double g) {
    if (!(g > 0.0) || !std::isfinite(g)) {
        throw InvalidInput("coupling constant must be positive, got " + std::to_string(g));
    }
}

void require_nbar(double nbar) {
    if (!(nbar >= 0.0) || !std::isfinite(nbar)) {
        throw InvalidInput("mean photon number must be non-negative, got " + std::to_string(nbar));
    }
}

}  // namespace

double rabi_frequency(double g, double n) { return 2.0 * std::sqrt(n + 1.0) * g; }

double f_of_g(double g, const ResonantSystem& sys, const LossModel& loss, const DriveField& drive) {
    require_coupling(g);
    const double gamma = loss.gamma;
    double sum = 0.0;
    const auto weights = drive.weights();
    for (std::size_t n = 0; n < weights.size(); ++n) {
        const double denom = 2.0 * g * (4.0 * g + gamma / std::sqrt(1.0 + static_cast<double>(n)));
        sum += weights[n] / denom;
    }
    return sys.einstein_a * gamma * sum;
}

Calibration solve_coupling(const CalibrationProblem& problem) {
    if (!(problem.g_lo > 0.0 && problem.g_lo < problem.g_hi)) {
        throw InvalidInput("coupling bracket must satisfy 0 < g_lo < g_hi");
    }
    if (!(problem.rel_tol > 0.0 && problem.rel_tol < 1.0)) {
        throw InvalidInput("root tolerance must lie in (0, 1)");
    }
    const auto h = [&](double g) { return f_of_g(g, problem.sys, problem.loss, problem.drive) - 0.5; };

    // f decreases from +inf to 0, so the root lies right of any g with h > 0.
    double lo = problem.g_lo;
    double hi = problem.g_hi;
    double h_lo = h(lo);
    double h_hi = h(hi);
    int expansions = 0;
    while (!(h_lo > 0.0 && h_hi < 0.0)) {
        if (h_lo == 0.0) {
            hi = lo;
            h_hi = 0.0;
        }
        if (h_hi == 0.0) break;
        if (++expansions > kMaxExpansions) {
            throw NoRoot("f(g) never crosses 1/2 while widening the coupling bracket", lo, hi);
        }
        if (!(h_lo > 0.0)) {
            lo /= 10.0;
            h_lo = h(lo);
        }
        if (!(h_hi < 0.0)) {
            hi *= 10.0;
            h_hi = h(hi);
        }
    }

    Calibration cal;
    cal.nbar = problem.drive.nbar();
    cal.bracket_lo = lo;
    cal.bracket_hi = hi;

    // False position through the bracket ends; whenever two consecutive steps
    // fail to halve the bracket, bisect instead.
    double root = hi;
    double halved_at = hi - lo;
    int stalled = 0;
    std::size_t iterations = 0;
    while (h_hi != 0.0 && hi - lo > problem.rel_tol * 0.5 * (lo + hi)) {
        if (++iterations > kMaxIterations) {
            throw NoRoot("coupling bisection did not converge", lo, hi);
        }
        double candidate = 0.5 * (lo + hi);
        if (stalled < 2) {
            const double secant = lo - h_lo * (hi - lo) / (h_hi - h_lo);
            if (std::isfinite(secant) && secant > lo && secant < hi) candidate = secant;
        }
        const double h_c = h(candidate);
        if (h_c == 0.0) {
            lo = hi = candidate;
            h_lo = h_hi = 0.0;
            break;
        }
        if (h_c > 0.0) {
            lo = candidate;
            h_lo = h_c;
        } else {
            hi = candidate;
            h_hi = h_c;
        }
        if (hi - lo <= 0.5 * halved_at) {
            halved_at = hi - lo;
            stalled = 0;
        } else {
            ++stalled;
        }
    }
    root = std::abs(h_lo) < std::abs(h_hi) ? lo : hi;

    cal.g_prime = root;
    cal.omega_rabi = rabi_frequency(root, cal.nbar);
    cal.residual = h(root);
    cal.iterations = iterations;
    return cal;
}

double collapse_time(double g_prime, double nbar) {
    require_coupling(g_prime);
    require_nbar(nbar);
    if (nbar == 0.0) return std::numeric_limits<double>::infinity();
    // sqrt(a) - sqrt(b) written as (a - b) / (sqrt(a) + sqrt(b)) with a - b = 2 sqrt(nbar).
    const double spread = std::sqrt(nbar);
    const double diff = 2.0 * spread / (std::sqrt(nbar + spread + 1.0) + std::sqrt(nbar - spread + 1.0));
    return std::numbers::pi / (2.0 * g_prime * diff);
}

double revival_time(double g_prime, double nbar) {
    require_coupling(g_prime);
    require_nbar(nbar);
    const double diff = 1.0 / (std::sqrt(nbar + 2.0) + std::sqrt(nbar + 1.0));
    return 2.0 * std::numbers::pi / (2.0 * g_prime * diff);
}

}  // namespace rabi
