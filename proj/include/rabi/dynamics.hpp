#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rabi/calibrate.hpp"
#include "rabi/model.hpp"

namespace rabi {

/// Everything the multi-mode model needs at one time point.
struct ModelInputs {
    ResonantSystem sys;
    LossModel loss;
    DriveField drive;
    Calibration cal;
    double rel_tol = 1e-9;  ///< relative tolerance of each inner integral
};

/// Multi-mode transition probability
///   A(0) sum_n (4/pi) p_n (n + 1) I_n(t),  w_n = 2 sqrt(n + 1) g'.
/// Propagates ConvergenceFailure from the inner integrals.
double transition_probability_multimode(double t, const ModelInputs& in);

/// Lossless single-mode comparison: sum_{n<=n_max} p_n sin^2(g t sqrt(n + 1)).
double transition_probability_singlemode(double t, double g, double nbar, std::size_t n_max);

/// Same sum over the weights already stored in `drive`.
double transition_probability_singlemode(double t, double g, const DriveField& drive);

struct SeriesMetadata {
    ResonantSystem sys;
    LossModel loss;
    Calibration cal;
    std::size_t n_max = 0;
    double t_collapse = 0.0;  ///< s, +inf when nbar = 0
    double t_revival = 0.0;   ///< s
    double rel_tol = 0.0;
};

/// Sampled curves. Values may stray outside [0, 1] by the quadrature
/// tolerance and are kept as computed.
struct TimeSeries {
    std::vector<double> times;  ///< s, strictly increasing
    std::vector<double> p_multimode;
    std::vector<double> p_singlemode;
    SeriesMetadata meta;
};

/// n_points uniformly spaced samples on [t_start, t_end] (s). One point
/// requires t_start == t_end.
std::vector<double> uniform_grid(double t_start, double t_end, std::size_t n_points);

/// Evaluates both models on every grid point. The grid is sorted before
/// evaluation; duplicates or negative times are rejected. Points are spread
/// over `threads` workers (0 = hardware concurrency) and the result does not
/// depend on the worker count. A failing point is rethrown as PointFailure.
TimeSeries sweep(std::span<const double> t_grid, const ModelInputs& in, unsigned threads = 0);

}  // namespace rabi
