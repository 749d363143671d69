#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "rabi/error.hpp"
#include "rabi/model.hpp"

using namespace rabi;
using doctest::Approx;

namespace {

// Independent Poisson pmf by running product, for small n.
double poisson_pmf(double nbar, int n) {
    double p = std::exp(-nbar);
    for (int k = 1; k <= n; ++k) p *= nbar / k;
    return p;
}

}  // namespace

TEST_CASE("escape probability") {
    CHECK(escape_probability(25e-3, 27e-3) == Approx(27.0 / 52.0).epsilon(1e-15));
    CHECK(escape_probability(1.0, 1.0) == 0.5);
    CHECK(escape_probability(1e-12, 1.0) == Approx(1.0).epsilon(1e-11));

    CHECK_THROWS_AS(escape_probability(0.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(escape_probability(1.0, -1.0), InvalidInput);
    CHECK_THROWS_AS(escape_probability(std::numeric_limits<double>::quiet_NaN(), 1.0),
                    InvalidInput);
}

TEST_CASE("escape probability stays in (0,1) and is monotone in r and h") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> len(1e-3, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double r = len(rng);
        const double h = len(rng);
        const double p = escape_probability(r, h);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
        CHECK(escape_probability(1.5 * r, h) < p);
        CHECK(escape_probability(r, 1.5 * h) > p);
    }
}

TEST_CASE("net quality factor of the reference cavity") {
    const ResonantSystem sys;
    const LossModel loss = net_quality_factor(sys);
    CHECK(loss.p0 == Approx(27.0 / 52.0).epsilon(1e-15));
    CHECK(loss.q3 == Approx(1307139.83).epsilon(1e-8));
    CHECK(loss.q_net == Approx(1283178.5).epsilon(1e-7));
    CHECK(loss.gamma == Approx(250210.31).epsilon(1e-7));
    CHECK(loss.gamma == Approx(sys.omega0 / loss.q_net).epsilon(1e-15));
}

TEST_CASE("without spontaneous emission Q' is the bare Q") {
    ResonantSystem sys;
    sys.einstein_a = 0.0;
    const LossModel loss = net_quality_factor(sys);
    CHECK(loss.q_net == sys.q_bare);
    CHECK(std::isinf(loss.q3));
}

TEST_CASE("Q' composes harmonically and never exceeds either channel") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> logq(4.0, 10.0);
    std::uniform_real_distribution<double> loga(2.0, 8.0);
    std::uniform_real_distribution<double> len(1e-3, 0.1);
    for (int i = 0; i < 200; ++i) {
        ResonantSystem sys;
        sys.q_bare = std::pow(10.0, logq(rng));
        sys.einstein_a = std::pow(10.0, loga(rng));
        sys.mirror_radius = len(rng);
        sys.mirror_gap = len(rng);
        const LossModel loss = net_quality_factor(sys);
        CHECK(1.0 / loss.q_net == Approx(1.0 / sys.q_bare + 1.0 / loss.q3).epsilon(1e-12));
        CHECK(loss.q_net < sys.q_bare);
        CHECK(loss.q_net < loss.q3);
        CHECK(loss.q_net > 0.0);
    }
}

TEST_CASE("invalid systems are rejected") {
    ResonantSystem sys;
    sys.q_bare = -7e7;
    CHECK_THROWS_AS(net_quality_factor(sys), InvalidInput);
    sys = {};
    sys.einstein_a = -1.0;
    CHECK_THROWS_AS(sys.validate(), InvalidInput);
    sys = {};
    sys.omega0 = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(sys.validate(), InvalidInput);
}

TEST_CASE("Poisson weights at nbar = 0.85") {
    const DriveField d = poisson_weights(0.85);
    CHECK(d.weight(0) == Approx(0.4274149319487267).epsilon(1e-14));
    CHECK(d.weight(1) == Approx(0.3633026921564177).epsilon(1e-14));
    CHECK(d.n_max() == 20);
    for (int n = 0; n <= 12; ++n) CHECK(d.weight(n) == Approx(poisson_pmf(0.85, n)).epsilon(1e-13));
    CHECK(d.mass() >= 1.0 - 1e-10);
    CHECK(d.mass() <= 1.0 + 1e-14);
}

TEST_CASE("vacuum drive puts all weight on n = 0") {
    const DriveField d = poisson_weights(0.0);
    CHECK(d.weight(0) == 1.0);
    CHECK(d.n_max() == 20);
    for (std::size_t n = 1; n <= d.n_max(); ++n) CHECK(d.weight(n) == 0.0);
}

TEST_CASE("Poisson weight properties over random drives") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> nbar_dist(0.01, 60.0);
    for (int i = 0; i < 100; ++i) {
        const double nbar = nbar_dist(rng);
        const DriveField d = poisson_weights(nbar, 1e-10);
        const auto w = d.weights();

        CHECK(std::all_of(w.begin(), w.end(), [](double p) { return p > 0.0; }));
        CHECK(d.mass() >= 1.0 - 1e-10);
        CHECK(d.mass() <= 1.0 + 1e-12);
        CHECK(d.n_max() >= 20);

        // Minimal: dropping the last term falls short unless the floor of 20 binds.
        if (d.n_max() > 20) CHECK(d.mass() - w.back() < 1.0 - 1e-10);

        // Unimodal with the mode at floor(nbar).
        const auto mode = static_cast<std::size_t>(std::floor(nbar));
        const auto peak = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
        CHECK(peak == mode);
        for (std::size_t n = 1; n <= mode; ++n) CHECK(w[n] >= w[n - 1]);
        for (std::size_t n = mode + 1; n < w.size(); ++n) CHECK(w[n] <= w[n - 1]);
    }
}

TEST_CASE("bad Poisson inputs") {
    CHECK_THROWS_AS(poisson_weights(-0.1), InvalidInput);
    CHECK_THROWS_AS(poisson_weights(1.0, 0.0), InvalidInput);
    CHECK_THROWS_AS(poisson_weights(1.0, 1.5), InvalidInput);
    CHECK_THROWS_AS(poisson_weights(std::numeric_limits<double>::quiet_NaN()), InvalidInput);
}

TEST_CASE("single photon transition") {
    const double w0 = defaults::omega0;
    CHECK(single_photon_transition(1e5, w0, w0, 0, 0.0) == 0.0);
    CHECK(single_photon_transition(1e5, w0, w0, 0, std::numbers::pi / 2e5) == Approx(1.0).epsilon(1e-14));
    CHECK(single_photon_transition(1e5, w0 + 2e5, w0, 0, 1e-5) ==
          Approx(0.4878407820314619).epsilon(1e-9));

    // Resonant period in t is pi / (g sqrt(n + 1)).
    const double g = 3e4;
    for (int n : {0, 1, 3, 8}) {
        const double period = std::numbers::pi / (g * std::sqrt(n + 1.0));
        const double t = 0.37 * period;
        CHECK(single_photon_transition(g, w0, w0, n, t + period) ==
              Approx(single_photon_transition(g, w0, w0, n, t)).epsilon(1e-9));
    }
}

TEST_CASE("single photon transition lies in [0, 1]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double g = 1e3 + 1e6 * u(rng);
        const double detuning = (u(rng) - 0.5) * 1e7;
        const double n = std::floor(50.0 * u(rng));
        const double t = 1e-3 * u(rng);
        const double p = single_photon_transition(g, 1e9 + detuning, 1e9, n, t);
        REQUIRE(p >= 0.0);
        REQUIRE(p <= 1.0 + 1e-15);
    }
}

TEST_CASE("free decay of the cavity energy") {
    const ResonantSystem sys;
    CHECK(energy_decay(1.0, sys, 0.0) == 1.0);
    CHECK(energy_decay(1.0, sys, sys.q_bare / sys.omega0) == Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(energy_decay(1.0, sys, 1e-3) == Approx(0.010187075047123193).epsilon(1e-12));
    CHECK(energy_decay(1.0, sys, 1e-6) == Approx(0.9954238670349627).epsilon(1e-14));
    CHECK(energy_decay(3.0, sys, 1e-6) == Approx(3.0 * 0.9954238670349627).epsilon(1e-14));
}

TEST_CASE("Lorentzian field spectrum") {
    const ResonantSystem sys;
    const double hw = sys.omega0 / (2.0 * sys.q_bare);
    const double peak = field_spectrum(sys.omega0, sys, 1.0);
    CHECK(peak == Approx(1.0 / (hw * hw)).epsilon(1e-14));
    CHECK(field_spectrum(sys.omega0 + hw, sys, 1.0) == Approx(peak / 2.0).epsilon(1e-6));
    CHECK(field_spectrum(sys.omega0 - hw, sys, 1.0) == Approx(peak / 2.0).epsilon(1e-6));
    for (double d : {0.3, 1.0, 7.5, 40.0}) {
        CHECK(field_spectrum(sys.omega0 + d * hw, sys, 2.0) ==
              Approx(field_spectrum(sys.omega0 - d * hw, sys, 2.0)).epsilon(1e-6));
    }
    CHECK(spectrum_fwhm(sys) == Approx(sys.omega0 / 7e7).epsilon(1e-15));
}

TEST_CASE("numeric FWHM matches omega0 / Q") {
    // Small resonance frequency so the half-maximum points resolve well in double.
    ResonantSystem sys;
    sys.omega0 = 1000.0;
    sys.q_bare = 50.0;
    const double half = field_spectrum(sys.omega0, sys, 1.0) / 2.0;
    auto edge = [&](double sign) {
        double lo = 0.0;
        double hi = 10.0 * spectrum_fwhm(sys);
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (field_spectrum(sys.omega0 + sign * mid, sys, 1.0) > half ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    CHECK(edge(1.0) + edge(-1.0) == Approx(spectrum_fwhm(sys)).epsilon(1e-9));
}
