#pragma once

#include <cstddef>

#include "rabi/model.hpp"

namespace rabi {

/// 2 sqrt(n + 1) g, the n-photon Rabi frequency for coupling g. Accepts a
/// real-valued n so the same formula yields the mean Rabi frequency at n = nbar.
double rabi_frequency(double g, double n);

/// Renormalized coupling fixed by the long-time limit P(inf) = 1/2.
struct Calibration {
    double g_prime = 0.0;     ///< rad/s
    double nbar = 0.0;
    double omega_rabi = 0.0;  ///< 2 sqrt(nbar + 1) g', rad/s
    double residual = 0.0;    ///< f(g') - 1/2
    double bracket_lo = 0.0;  ///< bracket that contained the root
    double bracket_hi = 0.0;
    std::size_t iterations = 0;

    double omega_n(std::size_t n) const { return rabi_frequency(g_prime, static_cast<double>(n)); }
};

struct CalibrationProblem {
    ResonantSystem sys;
    LossModel loss;
    DriveField drive;
    double g_lo = 1e3;  ///< rad/s
    double g_hi = 1e7;  ///< rad/s
    double rel_tol = 1e-10;
};

/// Long-time transition probability as a function of the coupling:
///   sum_n A(0) G e^-nbar nbar^n / (2 g (4 g + G / sqrt(1 + n)) n!)
/// over the stored weights. Strictly decreasing in g.
double f_of_g(double g, const ResonantSystem& sys, const LossModel& loss, const DriveField& drive);

/// Solves f(g) = 1/2 by bracketed bisection with secant acceleration.
///
/// The bracket is widened by factors of ten on whichever side fails to
/// straddle the root; NoRoot is thrown when widening is exhausted.
Calibration solve_coupling(const CalibrationProblem& problem);

/// Collapse estimate from the spread sqrt(nbar) of the photon distribution:
/// pi / (2 g [sqrt(nbar + sqrt(nbar) + 1) - sqrt(nbar - sqrt(nbar) + 1)]).
/// Returns +infinity at nbar = 0, where the Rabi frequencies do not spread.
double collapse_time(double g_prime, double nbar);

/// Rephasing of neighbouring photon numbers:
/// 2 pi / (2 g [sqrt(nbar + 2) - sqrt(nbar + 1)]).
double revival_time(double g_prime, double nbar);

}  // namespace rabi
