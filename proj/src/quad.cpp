#include "rabi/quad.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "rabi/error.hpp"

namespace rabi {

namespace {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Integrand {
    double half_t;
    double omega_sq;
    double lorentz_sq;  // (gamma / 2)^2

    double operator()(double x) const {
        const double x_sq = x * x;
        const double r = omega_sq + x_sq;
        const double s = std::sin(std::sqrt(r) * half_t);
        return lorentz_sq / (x_sq + lorentz_sq) * (s * s) / r;
    }
};

struct Panel {
    double lo;
    double hi;
    double value;
    double error;
};

struct LargerError {
    bool operator()(const Panel& a, const Panel& b) const { return a.error < b.error; }
};

Panel kronrod15(const Integrand& f, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double f_center = f(center);
    double kronrod = f_center * kKronrodWeights[7];
    double gauss = f_center * kGaussWeights[3];
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        const double pair = f(center - dx) + f(center + dx);
        kronrod += kKronrodWeights[j] * pair;
        if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;
    return {lo, hi, kronrod, std::abs(kronrod - gauss)};
}

// Global adaptive bisection: always split the panel with the largest error.
class AdaptiveSum {
public:
    AdaptiveSum(const Integrand& f, std::size_t budget) : f_(f), budget_(budget) {}

    double value() const { return value_; }
    double error() const { return error_; }
    std::size_t evaluated() const { return evaluated_; }

    // Equal panels of width <= max_width between consecutive geometric edges.
    bool add_range(double lo, double hi, double max_width, bool geometric) {
        std::vector<double> edges{lo};
        if (geometric && lo > 0.0) {
            for (double e = 2.0 * lo; e < hi; e *= 2.0) edges.push_back(e);
        }
        edges.push_back(hi);
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            const double width = edges[i + 1] - edges[i];
            const double count = std::max(geometric ? 1.0 : 8.0, std::ceil(width / max_width));
            if (count > static_cast<double>(budget_ - std::min(budget_, evaluated_))) return false;
            const auto pieces = static_cast<std::size_t>(count);
            for (std::size_t k = 0; k < pieces; ++k) {
                const double a = edges[i] + width * static_cast<double>(k) / count;
                const double b = k + 1 == pieces ? edges[i + 1]
                                                 : edges[i] + width * static_cast<double>(k + 1) / count;
                push(kronrod15(f_, a, b));
            }
        }
        return true;
    }

    // Refines until error() <= allowed(value()). False when the budget runs out.
    template <class Allowed>
    bool refine(Allowed allowed) {
        for (int pass = 0; pass < 4; ++pass) {
            while (error_ > allowed(value_)) {
                if (evaluated_ + 2 > budget_ || heap_.empty()) return false;
                std::pop_heap(heap_.begin(), heap_.end(), LargerError{});
                const Panel worst = heap_.back();
                heap_.pop_back();
                value_ -= worst.value;
                error_ -= worst.error;
                const double mid = 0.5 * (worst.lo + worst.hi);
                if (!(mid > worst.lo && mid < worst.hi)) {
                    heap_.push_back(worst);  // cannot split further
                    resum();
                    return false;
                }
                push(kronrod15(f_, worst.lo, mid));
                push(kronrod15(f_, mid, worst.hi));
            }
            // The running sums drift after many updates; confirm with a fresh sum.
            resum();
            if (error_ <= allowed(value_)) return true;
        }
        return error_ <= allowed(value_);
    }

private:
    void push(const Panel& p) {
        heap_.push_back(p);
        std::push_heap(heap_.begin(), heap_.end(), LargerError{});
        value_ += p.value;
        error_ += p.error;
        ++evaluated_;
    }

    void resum() {
        value_ = 0.0;
        error_ = 0.0;
        for (const Panel& p : heap_) {
            value_ += p.value;
            error_ += p.error;
        }
    }

    const Integrand& f_;
    std::size_t budget_;
    std::vector<Panel> heap_;
    double value_ = 0.0;
    double error_ = 0.0;
    std::size_t evaluated_ = 0;
};

// int_X^inf a^2 / ((x^2 + a^2)(x^2 + w^2)) dx for X > max(a, w), expanded in
// powers of 1/X^2. The partial-fraction arctan form cancels badly here.
double mean_tail_integral(double x, double lorentz_sq, double omega_sq) {
    const double u = lorentz_sq / (x * x);
    const double v = omega_sq / (x * x);
    double complete = 1.0;  // complete homogeneous polynomial h_k(u, v)
    double u_power = 1.0;
    double sum = 1.0 / 3.0;
    double sign = 1.0;
    for (int k = 1; k < 400; ++k) {
        u_power *= u;
        complete = v * complete + u_power;
        sign = -sign;
        const double term = sign * complete / (2.0 * k + 3.0);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return lorentz_sq / (x * x * x) * sum;
}

struct TailPiece {
    double estimate;
    double bound;
};

// Contribution of [x, inf). sin^2 = (1 - cos)/2; the mean part is exact, and
// the cosine part is integrated by parts once against the phase
// phi = t sqrt(w^2 + x^2). For x >= max(a, w) the remainder amplitude
// |g'| / phi' with g = h / phi' is decreasing, which bounds what is left by
// |g'(x)| / phi'(x). The cruder enclosure tail in [0, H] is used when tighter.
TailPiece tail_piece(double x, const LineIntegralSpec& spec) {
    const double lorentz_sq = 0.25 * spec.gamma * spec.gamma;
    const double omega_sq = spec.omega_n * spec.omega_n;
    const double x_sq = x * x;
    const double mean = mean_tail_integral(x, lorentz_sq, omega_sq);
    const TailPiece crude{0.5 * mean, 0.5 * mean};

    const double r = omega_sq + x_sq;
    const double phase = spec.t * std::sqrt(r);
    const double phase_rate = spec.t * x / std::sqrt(r);
    const double h = lorentz_sq / ((x_sq + lorentz_sq) * r);
    const double g = h / phase_rate;
    const double g_slope = g * (2.0 * x / (x_sq + lorentz_sq) + x / r + 1.0 / x);
    const TailPiece by_parts{0.5 * mean + 0.5 * g * std::sin(phase), g_slope / phase_rate};

    return by_parts.bound < crude.bound ? by_parts : crude;
}

std::string describe(const LineIntegralSpec& spec) {
    std::ostringstream os;
    os.precision(6);
    os << "t=" << spec.t << " s, omega_n=" << spec.omega_n << " rad/s, gamma=" << spec.gamma
       << " rad/s";
    return os.str();
}

}  // namespace

LineIntegralSpec LineIntegralSpec::with_default_tolerances(double t, double omega_n, double gamma) {
    LineIntegralSpec spec;
    spec.t = t;
    spec.omega_n = omega_n;
    spec.gamma = gamma;
    spec.rel_tol = 1e-9;
    spec.abs_tol = 1e-15 / omega_n;
    return spec;
}

void LineIntegralSpec::validate() const {
    if (!(omega_n > 0.0) || !std::isfinite(omega_n)) throw InvalidInput("omega_n must be positive");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidInput("gamma must be positive");
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidInput("t must be non-negative");
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InvalidInput("rel_tol must lie in (0, 1)");
    if (!(abs_tol > 0.0 && abs_tol < 1.0)) throw InvalidInput("abs_tol must lie in (0, 1)");
}

double substituted_integrand(double x, const LineIntegralSpec& spec) {
    const double gamma_sq = spec.gamma * spec.gamma;
    const double r = spec.omega_n * spec.omega_n + x * x;
    const double s = std::sin(std::sqrt(r) * spec.t / 2.0);
    return gamma_sq / (4.0 * x * x + gamma_sq) * (s * s) / r;
}

double rabi_line_integral_longtime(double omega_n, double gamma) {
    if (!(omega_n > 0.0) || !(gamma > 0.0)) {
        throw InvalidInput("long-time integral needs positive omega_n and gamma");
    }
    return std::numbers::pi * gamma / (4.0 * omega_n * (gamma + 2.0 * omega_n));
}

double tail_bound(double x_max, const LineIntegralSpec& spec) {
    if (!(x_max > 0.0)) throw InvalidInput("x_max must be positive");
    return spec.gamma * spec.gamma / (12.0 * x_max * x_max * x_max);
}

LineIntegral rabi_line_integral(const LineIntegralSpec& spec, std::size_t panel_budget) {
    spec.validate();
    if (spec.t == 0.0) return {};

    const Integrand f{0.5 * spec.t, spec.omega_n * spec.omega_n,
                      0.25 * spec.gamma * spec.gamma};
    const auto target = [&spec](double value) {
        return std::max(spec.abs_tol, spec.rel_tol * std::abs(value));
    };
    const double half_period = std::numbers::pi / spec.t;
    const double x_core = 2.0 * std::max(0.5 * spec.gamma, spec.omega_n);

    AdaptiveSum sum(f, panel_budget);
    auto fail = [&](const char* why, double tail_estimate, double tail_error) -> LineIntegral {
        throw ConvergenceFailure(std::string("line integral: ") + why + " (" + describe(spec) + ")",
                                 sum.value() + tail_estimate, sum.error() + tail_error);
    };

    // Core region holds the Lorentzian peak and the slowest part of the decay.
    // A coarse pass gives a lower bound on I used to place the truncation point.
    if (!sum.add_range(0.0, x_core, half_period, false)) return fail("panel budget exhausted", 0, 0);
    if (!sum.refine([&](double v) { return std::max(spec.abs_tol, 1e-3 * std::abs(v)); })) {
        return fail("panel budget exhausted in core region", 0, 0);
    }
    const double lower = std::max(0.0, sum.value() - sum.error());

    double x_max = x_core;
    TailPiece tail = tail_piece(x_max, spec);
    while (tail.bound > 0.25 * target(lower)) {
        x_max *= 1.25;
        if (x_max > 1e12 * x_core) return fail("tail never fell below tolerance", tail.estimate, tail.bound);
        tail = tail_piece(x_max, spec);
    }

    if (x_max > x_core && !sum.add_range(x_core, x_max, half_period, true)) {
        return fail("panel budget exhausted", tail.estimate, tail.bound);
    }
    const bool converged = sum.refine(
        [&](double v) { return target(v + tail.estimate) - tail.bound; });
    if (!converged) return fail("panel budget exhausted", tail.estimate, tail.bound);

    LineIntegral result;
    result.value = sum.value() + tail.estimate;
    result.error_bound = sum.error() + tail.bound;
    result.x_max = x_max;
    result.tail = tail.estimate;
    result.panels = sum.evaluated();
    return result;
}

}  // namespace rabi
