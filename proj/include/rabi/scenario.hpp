#pragma once

// Scenario files and the calibrate -> simulate -> report pipeline.
//
// A scenario is flat `key = value` text, one entry per line, with `#` starting
// a comment line. Recognised keys:
//
//   name, omega0_rad_s, q_bare, r_m, h_m, a0_per_s, nbar,
//   t_start_us, t_end_us, n_points, rel_tol, tail_tol, overlay
//
// Only `name` is required; everything else falls back to the reference
// cavity (Q = 7e7, r = 25 mm, h = 27 mm, A(0) = 0.473053e6 1/s,
// omega0 = 2 pi 51.099 GHz), nbar = 0.85 and a 0..100 us grid of 1001 points.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rabi/calibrate.hpp"
#include "rabi/dynamics.hpp"
#include "rabi/model.hpp"

namespace rabi {

struct Scenario {
    std::string name;
    ResonantSystem sys;
    double nbar = 0.85;
    double t_start_us = 0.0;
    double t_end_us = 100.0;
    std::size_t n_points = 1001;
    double rel_tol = 1e-9;
    double tail_tol = defaults::tail_tol;
    std::optional<std::filesystem::path> overlay;

    /// Throws ConfigError naming the offending key.
    void validate() const;

    bool operator==(const Scenario&) const = default;
};

Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::filesystem::path& path);

/// Serialises every key at full precision; parse_scenario inverts it exactly.
std::string format_scenario(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// Calibration stage of a scenario.
struct CalibrationReport {
    ResonantSystem sys;
    LossModel loss;
    DriveField drive;
    Calibration cal;
    double t_collapse;  ///< s
    double t_revival;   ///< s
};

CalibrationReport calibrate_scenario(const Scenario& scenario);

struct SimulationResult {
    CalibrationReport calibration;
    std::vector<double> times_us;
    TimeSeries series;
};

SimulationResult simulate_scenario(const Scenario& scenario, unsigned threads = 0);

/// Shortest decimal text that reads back to the same double.
std::string format_exact(double value);

/// Six significant digits.
std::string format_summary(double value);

/// `t_us,p_multimode,p_singlemode` header then one row per grid point.
void write_curve_csv(std::ostream& out, const SimulationResult& result);

/// `key = value` lines; `grid` adds the sampling description when present.
void write_summary(std::ostream& out, const Scenario& scenario, const CalibrationReport& report,
                   const SimulationResult* grid = nullptr);

struct OverlayPoint {
    double t_us;
    double p;
};

/// Two-column CSV with header `t_us,p`.
std::vector<OverlayPoint> load_overlay(const std::filesystem::path& path);
std::vector<OverlayPoint> parse_overlay(std::istream& in);

struct OverlayResidual {
    double t_us;
    double p_data;
    double p_multimode;  ///< model curve linearly interpolated at t_us
    double p_singlemode;
};

/// Interpolates both model curves at each overlay time stamp. Time stamps
/// outside the simulated grid are rejected.
std::vector<OverlayResidual> overlay_residuals(const SimulationResult& result,
                                               std::span<const OverlayPoint> overlay);

void write_residual_csv(std::ostream& out, std::span<const OverlayResidual> residuals);

struct ReportFiles {
    std::filesystem::path curve;
    std::optional<std::filesystem::path> summary;
    std::optional<std::filesystem::path> residuals;
};

/// Curve file only: `<out_dir>/<name>.curve.csv`.
ReportFiles run_simulate(const Scenario& scenario, const std::filesystem::path& out_dir,
                         unsigned threads = 0);

/// Curve, `<name>.summary.txt` and, with an overlay, `<name>.residuals.csv`.
ReportFiles run_report(const Scenario& scenario, const std::filesystem::path& out_dir,
                       unsigned threads = 0);

}  // namespace rabi
