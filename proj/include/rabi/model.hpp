#pragma once

// Cavity and atom constants, loss bookkeeping, coherent-drive statistics and
// the closed-form single-photon kernels. All frequencies are angular (rad/s).

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace rabi {

namespace defaults {
inline constexpr double omega0 = 2.0 * std::numbers::pi * 51.099e9;  // rad/s
inline constexpr double q_bare = 7.0e7;
inline constexpr double mirror_radius = 25.0e-3;  // m
inline constexpr double mirror_gap = 27.0e-3;     // m
inline constexpr double einstein_a = 0.473053e6;  // 1/s
inline constexpr double tail_tol = 1e-10;
inline constexpr std::size_t min_n_max = 20;
}  // namespace defaults

/// Resonant cavity plus the two-level atom it hosts.
///
/// The cavity resonance and the atomic Bohr frequency coincide (omega0).
/// `einstein_a` is the Purcell-enhanced spontaneous emission rate A(0),
/// taken as an input constant.
struct ResonantSystem {
    double omega0 = defaults::omega0;
    double q_bare = defaults::q_bare;
    double mirror_radius = defaults::mirror_radius;
    double mirror_gap = defaults::mirror_gap;
    double einstein_a = defaults::einstein_a;

    /// Throws InvalidInput on a non-positive or non-finite constant.
    /// A zero `einstein_a` is accepted and disables the open-surface channel.
    void validate() const;

    bool operator==(const ResonantSystem&) const = default;
};

/// Loss quantities derived from a ResonantSystem.
struct LossModel {
    double p0;     ///< escape probability through the open curved surface
    double q3;     ///< quality factor of the open-surface emission channel
    double q_net;  ///< net quality factor Q'
    double gamma;  ///< linewidth omega0 / Q' (rad/s)
};

/// Fraction of spontaneous emission leaving through the open curved surface
/// of a cylindrical cavity with mirror radius r and gap h: 1 / (1 + r/h).
double escape_probability(double mirror_radius, double mirror_gap);

/// Harmonic composition of the bare cavity Q with the open-surface channel.
LossModel net_quality_factor(const ResonantSystem& sys);

/// Coherent drive with Poisson photon-number weights precomputed up to n_max.
class DriveField {
public:
    double nbar() const noexcept { return nbar_; }
    std::size_t n_max() const noexcept { return weights_.size() - 1; }
    double tail_tol() const noexcept { return tail_tol_; }

    /// p_n for n <= n_max.
    double weight(std::size_t n) const { return weights_.at(n); }
    std::span<const double> weights() const noexcept { return weights_; }

    /// Sum of the stored weights.
    double mass() const noexcept;

private:
    friend DriveField poisson_weights(double nbar, double tail_tol);
    DriveField(double nbar, double tail_tol, std::vector<double> weights)
        : nbar_(nbar), tail_tol_(tail_tol), weights_(std::move(weights)) {}

    double nbar_;
    double tail_tol_;
    std::vector<double> weights_;
};

/// Poisson weights p_n = nbar^n e^-nbar / n! for n = 0..n_max, where n_max is
/// the smallest index >= 20 whose cumulative mass reaches 1 - tail_tol.
DriveField poisson_weights(double nbar, double tail_tol = defaults::tail_tol);

/// Detuned n-photon Rabi transition probability for a single mode of
/// frequency `omega` and coupling `g`.
double single_photon_transition(double g, double omega, double omega0, double n, double t);

/// Stored cavity energy after time t of free decay: w0 exp(-omega0 t / Q).
double energy_decay(double w0, const ResonantSystem& sys, double t);

/// Lorentzian spectral density of the decaying cavity field,
/// e0^2 / ((omega - omega0)^2 + omega0^2 / (4 Q^2)).
double field_spectrum(double omega, const ResonantSystem& sys, double e0);

/// Analytic full width at half maximum of field_spectrum: omega0 / Q.
double spectrum_fwhm(const ResonantSystem& sys);

}  // namespace rabi
