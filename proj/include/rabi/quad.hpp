#pragma once

// Inner frequency integral of the multi-mode transition probability:
//
//   I_n(t) = int_{w_n}^inf  G^2 / (4 (W^2 - w_n^2) + G^2)
//                           * sin^2(W t / 2) / (W sqrt(W^2 - w_n^2))  dW
//
// The 1/sqrt endpoint singularity is removed exactly by x = sqrt(W^2 - w_n^2),
// giving the smooth integrand
//
//   G^2 / (4 x^2 + G^2) * sin^2(sqrt(w_n^2 + x^2) t / 2) / (w_n^2 + x^2)
//
// on [0, inf), which decays like x^-4.

#include <cstddef>

namespace rabi {

struct LineIntegralSpec {
    double t = 0.0;        ///< s
    double omega_n = 0.0;  ///< n-photon Rabi frequency, rad/s
    double gamma = 0.0;    ///< linewidth, rad/s
    double rel_tol = 1e-9;
    double abs_tol = 0.0;  ///< s; see with_default_tolerances

    /// rel_tol = 1e-9 and abs_tol = 1e-15 / omega_n.
    static LineIntegralSpec with_default_tolerances(double t, double omega_n, double gamma);

    /// Throws InvalidInput unless omega_n > 0, gamma > 0, t >= 0 and both
    /// tolerances lie in (0, 1).
    void validate() const;
};

struct LineIntegral {
    double value = 0.0;        ///< I_n(t), s
    double error_bound = 0.0;  ///< quadrature error plus tail remainder bound
    double x_max = 0.0;        ///< truncation point of the numerical part
    double tail = 0.0;         ///< analytic contribution of [x_max, inf)
    std::size_t panels = 0;    ///< Gauss-Kronrod panels evaluated
};

inline constexpr std::size_t kDefaultPanelBudget = 400000;

/// Integrand after the change of variables; finite for every x >= 0.
double substituted_integrand(double x, const LineIntegralSpec& spec);

/// Adaptive Gauss-Kronrod evaluation of I_n(t).
///
/// Panels never exceed pi / t, so each covers at most half an oscillation of
/// sin^2. Beyond x_max the mean of sin^2 is integrated in closed form and the
/// oscillatory remainder is handled by one integration by parts with a
/// rigorous bound. The returned error bound is at most
/// max(abs_tol, rel_tol * value); otherwise ConvergenceFailure is thrown with
/// the best estimate.
LineIntegral rabi_line_integral(const LineIntegralSpec& spec,
                                std::size_t panel_budget = kDefaultPanelBudget);

/// t -> inf value of I_n, where sin^2 averages to 1/2:
/// pi G / (4 w_n (G + 2 w_n)).
double rabi_line_integral_longtime(double omega_n, double gamma);

/// G^2 / (12 x_max^3), an upper bound on the integral of the substituted
/// integrand over [x_max, inf).
double tail_bound(double x_max, const LineIntegralSpec& spec);

}  // namespace rabi
