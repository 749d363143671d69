#include "rabi/model.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rabi/error.hpp"

namespace rabi {

namespace {

void require_positive(double value, const char* what) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw InvalidInput(std::string(what) + " must be positive and finite, got " +
                           std::to_string(value));
    }
}

}  // namespace

void ResonantSystem::validate() const {
    require_positive(omega0, "omega0");
    require_positive(q_bare, "q_bare");
    require_positive(mirror_radius, "mirror radius");
    require_positive(mirror_gap, "mirror gap");
    if (!(einstein_a >= 0.0) || !std::isfinite(einstein_a)) {
        throw InvalidInput("einstein_a must be non-negative and finite, got " +
                           std::to_string(einstein_a));
    }
}

double escape_probability(double mirror_radius, double mirror_gap) {
    require_positive(mirror_radius, "mirror radius");
    require_positive(mirror_gap, "mirror gap");
    // h / (h + r) is the same as 1 / (1 + r/h) without the intermediate ratio.
    return mirror_gap / (mirror_gap + mirror_radius);
}

LossModel net_quality_factor(const ResonantSystem& sys) {
    sys.validate();
    LossModel loss{};
    loss.p0 = escape_probability(sys.mirror_radius, sys.mirror_gap);
    const double open_rate = loss.p0 * sys.einstein_a;
    if (open_rate > 0.0) {
        loss.q3 = sys.omega0 / open_rate;
        loss.q_net = 1.0 / (1.0 / sys.q_bare + open_rate / sys.omega0);
    } else {
        loss.q3 = std::numeric_limits<double>::infinity();
        loss.q_net = sys.q_bare;
    }
    loss.gamma = sys.omega0 / loss.q_net;
    return loss;
}

double DriveField::mass() const noexcept {
    return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

DriveField poisson_weights(double nbar, double tail_tol) {
    if (!(nbar >= 0.0) || !std::isfinite(nbar)) {
        throw InvalidInput("mean photon number must be non-negative, got " + std::to_string(nbar));
    }
    if (!(tail_tol > 0.0 && tail_tol < 1.0)) {
        throw InvalidInput("tail tolerance must lie in (0, 1), got " + std::to_string(tail_tol));
    }

    std::vector<double> weights;
    if (nbar == 0.0) {
        weights.assign(defaults::min_n_max + 1, 0.0);
        weights[0] = 1.0;
        return DriveField(nbar, tail_tol, std::move(weights));
    }

    // Log space keeps e^-nbar from underflowing for large drives.
    const double log_nbar = std::log(nbar);
    const auto hard_limit =
        static_cast<std::size_t>(nbar + 40.0 * std::sqrt(nbar) + 1000.0);
    double cumulative = 0.0;
    for (std::size_t n = 0;; ++n) {
        const double dn = static_cast<double>(n);
        const double p = std::exp(dn * log_nbar - nbar - std::lgamma(dn + 1.0));
        weights.push_back(p);
        cumulative += p;
        if (n >= defaults::min_n_max && cumulative >= 1.0 - tail_tol) break;
        if (n > hard_limit) {
            throw InvalidInput("Poisson mass never reaches 1 - " + std::to_string(tail_tol) +
                               " for nbar = " + std::to_string(nbar));
        }
    }
    return DriveField(nbar, tail_tol, std::move(weights));
}

double single_photon_transition(double g, double omega, double omega0, double n, double t) {
    const double detuning = omega - omega0;
    const double coupling_sq = 4.0 * g * g * (n + 1.0);
    const double generalized_sq = detuning * detuning + coupling_sq;
    const double s = std::sin(std::sqrt(generalized_sq) * t / 2.0);
    return coupling_sq * s * s / generalized_sq;
}

double energy_decay(double w0, const ResonantSystem& sys, double t) {
    return w0 * std::exp(-sys.omega0 * t / sys.q_bare);
}

double field_spectrum(double omega, const ResonantSystem& sys, double e0) {
    const double detuning = omega - sys.omega0;
    const double half_width = sys.omega0 / (2.0 * sys.q_bare);
    return e0 * e0 / (detuning * detuning + half_width * half_width);
}

double spectrum_fwhm(const ResonantSystem& sys) { return sys.omega0 / sys.q_bare; }

}  // namespace rabi
