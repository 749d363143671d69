#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rabi/error.hpp"
#include "rabi/quad.hpp"

using namespace rabi;
using doctest::Approx;

namespace {

// Integrand in the original frequency variable, singular at W = w.
double raw_integrand(double W, double w, double G, double t) {
    const double d = W * W - w * w;
    const double s = std::sin(W * t / 2.0);
    return G * G / (4.0 * d + G * G) * s * s / (W * std::sqrt(d));
}

// Composite Simpson on [a, b] of the substituted integrand, written out here
// rather than taken from the library.
double simpson(double a, double b, int n, double w, double G, double t) {
    auto f = [&](double x) {
        const double r = w * w + x * x;
        const double s = std::sin(std::sqrt(r) * t / 2.0);
        return G * G / (4.0 * x * x + G * G) * s * s / r;
    };
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return sum * h / 3.0;
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

}  // namespace

TEST_CASE("integral vanishes at t = 0") {
    const auto spec = LineIntegralSpec::with_default_tolerances(0.0, 3e5, 2.5e5);
    const LineIntegral r = rabi_line_integral(spec);
    CHECK(r.value == 0.0);
    CHECK(r.error_bound == 0.0);
}

TEST_CASE("default tolerances") {
    const auto spec = LineIntegralSpec::with_default_tolerances(1e-5, 4e5, 2.5e5);
    CHECK(spec.rel_tol == 1e-9);
    CHECK(spec.abs_tol == Approx(1e-15 / 4e5).epsilon(1e-15));
}

TEST_CASE("substituted integrand at the old endpoint") {
    const double w = 3e5;
    const double t = 1e-5;
    const auto spec = LineIntegralSpec::with_default_tolerances(t, w, 2.5e5);
    const double s = std::sin(w * t / 2.0);
    CHECK(substituted_integrand(0.0, spec) == Approx(s * s / (w * w)).epsilon(1e-14));
    CHECK(std::isfinite(substituted_integrand(0.0, spec)));
}

TEST_CASE("change of variables matches the raw integrand times dW/dx") {
    std::mt19937_64 rng(314);
    for (int i = 0; i < 1000; ++i) {
        const double w = log_uniform(rng, 1e4, 1e7);
        const double G = log_uniform(rng, 1e4, 1e7);
        const double t = log_uniform(rng, 1e-7, 1e-3);
        const double x = log_uniform(rng, 0.1 * w, 1e3 * w);
        const double W = std::sqrt(w * w + x * x);
        const LineIntegralSpec spec{t, w, G, 1e-9, 1e-15 / w};
        const double expected = raw_integrand(W, w, G, t) * x / W;
        REQUIRE(substituted_integrand(x, spec) == Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("integral agrees with a Simpson oracle") {
    struct Case {
        double t, w, G;
    };
    for (const Case c : {Case{5e-6, 3e5, 2.5e5}, Case{2e-5, 6e5, 2.5e5}, Case{1e-6, 1e5, 1e6},
                         Case{3e-5, 2e6, 5e4}}) {
        const auto spec = LineIntegralSpec::with_default_tolerances(c.t, c.w, c.G);
        const LineIntegral r = rabi_line_integral(spec);

        // Truncate where the analytic tail bound is negligible.
        double X = 2.0 * std::max(c.G, c.w);
        while (c.G * c.G / (12.0 * X * X * X) > 1e-11 * r.value) X *= 1.5;
        const double oracle = simpson(0.0, X, 2000000, c.w, c.G, c.t);

        CAPTURE(c.t);
        CAPTURE(c.w);
        CHECK(r.value == Approx(oracle).epsilon(2e-9));
        CHECK(r.error_bound <= std::max(spec.abs_tol, spec.rel_tol * r.value));
        CHECK(r.error_bound >= 0.0);
        CHECK(r.panels > 0);
    }
}

TEST_CASE("integral is non-negative and bounded by the t -> inf envelope") {
    std::mt19937_64 rng(555);
    for (int i = 0; i < 40; ++i) {
        const double w = log_uniform(rng, 1e5, 3e6);
        const double G = log_uniform(rng, 5e4, 1e6);
        const double t = log_uniform(rng, 1e-7, 2e-4);
        const LineIntegral r = rabi_line_integral(LineIntegralSpec::with_default_tolerances(t, w, G));
        CHECK(r.value >= 0.0);
        // sin^2 <= 1 everywhere, so I <= 2 I_inf.
        CHECK(r.value <= 2.0 * rabi_line_integral_longtime(w, G) * (1.0 + 1e-9));
    }
}

TEST_CASE("scaling: I(t / s, s w, s G) = I(t, w, G) / s") {
    std::mt19937_64 rng(8080);
    for (int i = 0; i < 20; ++i) {
        const double w = log_uniform(rng, 1e5, 1e6);
        const double G = log_uniform(rng, 1e5, 1e6);
        const double t = log_uniform(rng, 1e-6, 5e-5);
        const double s = log_uniform(rng, 0.1, 10.0);
        const double base = rabi_line_integral(LineIntegralSpec::with_default_tolerances(t, w, G)).value;
        const double scaled =
            rabi_line_integral(LineIntegralSpec::with_default_tolerances(t / s, s * w, s * G)).value;
        CHECK(scaled * s == Approx(base).epsilon(5e-9));
    }
}

TEST_CASE("long-time closed form") {
    CHECK(rabi_line_integral_longtime(3e5, 2.5e5) == Approx(7.78544296e-7).epsilon(1e-8));
    CHECK(rabi_line_integral_longtime(3e5, 2.5e5) ==
          Approx(std::numbers::pi * 2.5e5 / (4.0 * 3e5 * (2.5e5 + 6e5))).epsilon(1e-15));
    CHECK_THROWS_AS(rabi_line_integral_longtime(0.0, 1.0), InvalidInput);
}

TEST_CASE("window average at long times approaches the closed form") {
    struct Case {
        double w, G;
    };
    for (const Case c : {Case{3e5, 2.5e5}, Case{5e5, 2.5e5}, Case{1e6, 5e5}}) {
        const int n = 101;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double t = 400e-6 + 100e-6 * i / (n - 1);
            const double v = rabi_line_integral(LineIntegralSpec::with_default_tolerances(t, c.w, c.G)).value;
            sum += (i == 0 || i == n - 1) ? 0.5 * v : v;
        }
        const double mean = sum / (n - 1);
        CHECK(mean == Approx(rabi_line_integral_longtime(c.w, c.G)).epsilon(0.01));
    }
}

TEST_CASE("tail bound") {
    const auto spec = LineIntegralSpec::with_default_tolerances(1e-5, 3e5, 2.5e5);
    CHECK(tail_bound(1e8, spec) == Approx(5.2083333e-15).epsilon(1e-7));
    CHECK(tail_bound(2e8, spec) < tail_bound(1e8, spec));
    CHECK(tail_bound(2e8, spec) == Approx(tail_bound(1e8, spec) / 8.0).epsilon(1e-15));
    CHECK_THROWS_AS(tail_bound(0.0, spec), InvalidInput);
}

TEST_CASE("tail bound dominates the truncated remainder") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 50; ++i) {
        const double w = log_uniform(rng, 1e5, 1e6);
        const double G = log_uniform(rng, 5e4, 1e6);
        const double t = log_uniform(rng, 1e-6, 1e-5);
        const double X = log_uniform(rng, w, 20.0 * w);
        const LineIntegralSpec spec{t, w, G, 1e-9, 1e-15 / w};
        // [X, 50 X] numerically; beyond that the integrand is below G^2 / (4 x^4).
        const double far = G * G / (12.0 * std::pow(50.0 * X, 3));
        const double remainder = simpson(X, 50.0 * X, 200000, w, G, t) + far;
        CHECK(remainder <= tail_bound(X, spec));
    }
}

TEST_CASE("invalid specs and budget exhaustion") {
    CHECK_THROWS_AS(rabi_line_integral(LineIntegralSpec{1e-5, -1.0, 2.5e5, 1e-9, 1e-20}), InvalidInput);
    CHECK_THROWS_AS(rabi_line_integral(LineIntegralSpec{1e-5, 3e5, 0.0, 1e-9, 1e-20}), InvalidInput);
    CHECK_THROWS_AS(rabi_line_integral(LineIntegralSpec{-1e-5, 3e5, 2.5e5, 1e-9, 1e-20}), InvalidInput);
    CHECK_THROWS_AS(rabi_line_integral(LineIntegralSpec{1e-5, 3e5, 2.5e5, 0.0, 1e-20}), InvalidInput);

    const auto spec = LineIntegralSpec::with_default_tolerances(5e-4, 3e5, 2.5e5);
    try {
        rabi_line_integral(spec, 10);
        FAIL("expected ConvergenceFailure");
    } catch (const ConvergenceFailure& e) {
        CHECK(e.error_bound() >= 0.0);
        CHECK(std::string(e.what()).find("line integral") != std::string::npos);
    }
}
