#include "rabi/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>

#include "rabi/error.hpp"
#include "rabi/quad.hpp"

namespace rabi {

double transition_probability_multimode(double t, const ModelInputs& in) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidInput("time must be non-negative");
    if (t == 0.0) return 0.0;

    const auto weights = in.drive.weights();
    double sum = 0.0;
    for (std::size_t n = 0; n < weights.size(); ++n) {
        if (weights[n] == 0.0) continue;
        auto spec = LineIntegralSpec::with_default_tolerances(t, in.cal.omega_n(n), in.loss.gamma);
        spec.rel_tol = in.rel_tol;
        const double integral = rabi_line_integral(spec).value;
        sum += weights[n] * (static_cast<double>(n) + 1.0) * integral;
    }
    return in.sys.einstein_a * (4.0 / std::numbers::pi) * sum;
}

double transition_probability_singlemode(double t, double g, double nbar, std::size_t n_max) {
    if (!(nbar >= 0.0) || !std::isfinite(nbar)) throw InvalidInput("mean photon number must be non-negative");
    if (nbar == 0.0) {
        const double s = std::sin(g * t);
        return s * s;
    }
    const double log_nbar = std::log(nbar);
    double sum = 0.0;
    for (std::size_t n = 0; n <= n_max; ++n) {
        const double dn = static_cast<double>(n);
        const double p = std::exp(dn * log_nbar - nbar - std::lgamma(dn + 1.0));
        const double s = std::sin(g * t * std::sqrt(dn + 1.0));
        sum += p * s * s;
    }
    return sum;
}

double transition_probability_singlemode(double t, double g, const DriveField& drive) {
    const auto weights = drive.weights();
    double sum = 0.0;
    for (std::size_t n = 0; n < weights.size(); ++n) {
        const double s = std::sin(g * t * std::sqrt(static_cast<double>(n) + 1.0));
        sum += weights[n] * s * s;
    }
    return sum;
}

std::vector<double> uniform_grid(double t_start, double t_end, std::size_t n_points) {
    if (n_points == 0) throw InvalidInput("time grid needs at least one point");
    if (!(t_start >= 0.0) || !std::isfinite(t_end)) throw InvalidInput("time grid must be non-negative");
    if (n_points == 1) {
        if (t_start != t_end) throw InvalidInput("a one-point grid needs t_start == t_end");
        return {t_start};
    }
    if (!(t_end > t_start)) throw InvalidInput("time grid needs t_end > t_start");
    std::vector<double> grid(n_points);
    const double step = (t_end - t_start) / static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) grid[i] = t_start + step * static_cast<double>(i);
    grid.back() = t_end;
    return grid;
}

TimeSeries sweep(std::span<const double> t_grid, const ModelInputs& in, unsigned threads) {
    TimeSeries series;
    series.times.assign(t_grid.begin(), t_grid.end());
    std::sort(series.times.begin(), series.times.end());
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        const double t = series.times[i];
        if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidInput("sweep times must be non-negative");
        if (i > 0 && t == series.times[i - 1]) throw InvalidInput("sweep times must be distinct");
    }

    const std::size_t count = series.times.size();
    series.p_multimode.assign(count, 0.0);
    series.p_singlemode.assign(count, 0.0);
    series.meta.sys = in.sys;
    series.meta.loss = in.loss;
    series.meta.cal = in.cal;
    series.meta.n_max = in.drive.n_max();
    series.meta.t_collapse = collapse_time(in.cal.g_prime, in.drive.nbar());
    series.meta.t_revival = revival_time(in.cal.g_prime, in.drive.nbar());
    series.meta.rel_tol = in.rel_tol;

    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    std::size_t failed_index = count;

    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            const double t = series.times[i];
            try {
                series.p_multimode[i] = transition_probability_multimode(t, in);
                series.p_singlemode[i] = transition_probability_singlemode(t, in.cal.g_prime, in.drive);
            } catch (...) {
                // Keep the earliest failing time so the report is deterministic.
                const std::lock_guard lock(failure_mutex);
                if (i < failed_index) {
                    failed_index = i;
                    failure = std::current_exception();
                }
            }
        }
    };

    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    if (failure) {
        const double t = series.times[failed_index];
        try {
            std::rethrow_exception(failure);
        } catch (const InvalidInput&) {
            throw;
        } catch (const std::exception& e) {
            std::ostringstream os;
            os.precision(9);
            os << "evaluation failed at t = " << t << " s: " << e.what();
            throw PointFailure(os.str(), t);
        }
    }
    return series;
}

}  // namespace rabi
