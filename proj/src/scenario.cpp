#include "rabi/scenario.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string_view>

#include "rabi/error.hpp"

namespace rabi {

namespace {

constexpr std::array<std::string_view, 13> kKeys = {
    "name",    "omega0_rad_s", "q_bare",     "r_m",      "h_m",     "a0_per_s", "nbar",
    "t_start_us", "t_end_us",  "n_points",   "rel_tol",  "tail_tol", "overlay"};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view text, std::size_t line, const std::string& key) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty()) {
        throw ConfigError("line " + std::to_string(line) + ": key '" + key + "' expects a number, got '" +
                              std::string(text) + "'",
                          line, key);
    }
    return value;
}

std::size_t parse_count(std::string_view text, std::size_t line, const std::string& key) {
    std::size_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty()) {
        throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                              "' expects a non-negative integer, got '" + std::string(text) + "'",
                          line, key);
    }
    return value;
}

void check(bool ok, const char* key, const std::string& what) {
    if (!ok) throw ConfigError(std::string("invalid scenario: ") + key + " " + what, 0, key);
}

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + path.string());
    return out;
}

double interpolate(std::span<const double> xs, std::span<const double> ys, double x) {
    const auto it = std::lower_bound(xs.begin(), xs.end(), x);
    const auto i = static_cast<std::size_t>(it - xs.begin());
    if (it != xs.end() && *it == x) return ys[i];
    const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + w * (ys[i] - ys[i - 1]);
}

}  // namespace

void Scenario::validate() const {
    check(!name.empty(), "name", "must be non-empty");
    check(std::all_of(name.begin(), name.end(),
                      [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '-' || c == '.'; }),
          "name", "may only contain letters, digits, '_', '-' and '.'");
    check(positive(sys.omega0), "omega0_rad_s", "must be positive");
    check(positive(sys.q_bare), "q_bare", "must be positive");
    check(positive(sys.mirror_radius), "r_m", "must be positive");
    check(positive(sys.mirror_gap), "h_m", "must be positive");
    check(positive(sys.einstein_a), "a0_per_s", "must be positive");
    check(nbar >= 0.0 && std::isfinite(nbar), "nbar", "must be non-negative");
    check(t_start_us >= 0.0 && std::isfinite(t_start_us), "t_start_us", "must be non-negative");
    check(std::isfinite(t_end_us), "t_end_us", "must be finite");
    check(n_points >= 1, "n_points", "must be at least 1");
    if (n_points == 1) {
        check(t_end_us == t_start_us, "t_end_us", "must equal t_start_us for a one-point grid");
    } else {
        check(t_end_us > t_start_us, "t_end_us", "must exceed t_start_us");
    }
    check(rel_tol > 0.0 && rel_tol < 1.0, "rel_tol", "must lie in (0, 1)");
    check(tail_tol > 0.0 && tail_tol < 1.0, "tail_tol", "must lie in (0, 1)");
    check(!overlay || !overlay->empty(), "overlay", "must be a non-empty path");
}

Scenario parse_scenario(std::istream& in) {
    Scenario s;
    std::map<std::string, std::size_t> seen;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string_view text = trim(raw);
        if (text.empty() || text.front() == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line) + ": expected key = value", line, "");
        }
        const std::string key(trim(text.substr(0, eq)));
        const std::string_view value = trim(text.substr(eq + 1));
        if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
            throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'", line, key);
        }
        if (const auto prev = seen.find(key); prev != seen.end()) {
            throw ConfigError("line " + std::to_string(line) + ": key '" + key + "' already set on line " +
                                  std::to_string(prev->second),
                              line, key);
        }
        seen.emplace(key, line);

        if (key == "name") s.name = std::string(value);
        else if (key == "overlay") s.overlay = std::filesystem::path(std::string(value));
        else if (key == "n_points") s.n_points = parse_count(value, line, key);
        else {
            const double v = parse_double(value, line, key);
            if (key == "omega0_rad_s") s.sys.omega0 = v;
            else if (key == "q_bare") s.sys.q_bare = v;
            else if (key == "r_m") s.sys.mirror_radius = v;
            else if (key == "h_m") s.sys.mirror_gap = v;
            else if (key == "a0_per_s") s.sys.einstein_a = v;
            else if (key == "nbar") s.nbar = v;
            else if (key == "t_start_us") s.t_start_us = v;
            else if (key == "t_end_us") s.t_end_us = v;
            else if (key == "rel_tol") s.rel_tol = v;
            else if (key == "tail_tol") s.tail_tol = v;
        }
    }
    if (!seen.contains("name")) throw ConfigError("missing required key 'name'", 0, "name");
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file " + path.string(), 0, "");
    try {
        return parse_scenario(in);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what(), e.line(), e.key());
    }
}

std::string format_exact(double value) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return ec == std::errc() ? std::string(buf.data(), ptr) : std::string("nan");
}

std::string format_summary(double value) {
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%.6g", value);
    return buf.data();
}

std::string format_scenario(const Scenario& s) {
    std::ostringstream os;
    os << "name = " << s.name << '\n'
       << "omega0_rad_s = " << format_exact(s.sys.omega0) << '\n'
       << "q_bare = " << format_exact(s.sys.q_bare) << '\n'
       << "r_m = " << format_exact(s.sys.mirror_radius) << '\n'
       << "h_m = " << format_exact(s.sys.mirror_gap) << '\n'
       << "a0_per_s = " << format_exact(s.sys.einstein_a) << '\n'
       << "nbar = " << format_exact(s.nbar) << '\n'
       << "t_start_us = " << format_exact(s.t_start_us) << '\n'
       << "t_end_us = " << format_exact(s.t_end_us) << '\n'
       << "n_points = " << s.n_points << '\n'
       << "rel_tol = " << format_exact(s.rel_tol) << '\n'
       << "tail_tol = " << format_exact(s.tail_tol) << '\n';
    if (s.overlay) os << "overlay = " << s.overlay->string() << '\n';
    return os.str();
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << format_scenario(scenario);
}

CalibrationReport calibrate_scenario(const Scenario& scenario) {
    scenario.validate();
    const LossModel loss = net_quality_factor(scenario.sys);
    DriveField drive = poisson_weights(scenario.nbar, scenario.tail_tol);
    const Calibration cal = solve_coupling(CalibrationProblem{scenario.sys, loss, drive});
    return CalibrationReport{scenario.sys,
                             loss,
                             std::move(drive),
                             cal,
                             collapse_time(cal.g_prime, scenario.nbar),
                             revival_time(cal.g_prime, scenario.nbar)};
}

SimulationResult simulate_scenario(const Scenario& scenario, unsigned threads) {
    CalibrationReport report = calibrate_scenario(scenario);
    std::vector<double> times_us = uniform_grid(scenario.t_start_us, scenario.t_end_us, scenario.n_points);
    std::vector<double> times_s(times_us.size());
    std::transform(times_us.begin(), times_us.end(), times_s.begin(), [](double t) { return t * 1e-6; });

    const ModelInputs inputs{report.sys, report.loss, report.drive, report.cal, scenario.rel_tol};
    TimeSeries series = sweep(times_s, inputs, threads);
    return SimulationResult{std::move(report), std::move(times_us), std::move(series)};
}

void write_curve_csv(std::ostream& out, const SimulationResult& result) {
    out << "t_us,p_multimode,p_singlemode\n";
    const auto& s = result.series;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        out << format_exact(result.times_us[i]) << ',' << format_exact(s.p_multimode[i]) << ','
            << format_exact(s.p_singlemode[i]) << '\n';
    }
}

void write_summary(std::ostream& out, const Scenario& scenario, const CalibrationReport& r,
                   const SimulationResult* grid) {
    const auto line = [&out](const char* key, double value) {
        out << key << " = " << format_summary(value) << '\n';
    };
    out << "scenario = " << scenario.name << '\n';
    line("nbar", scenario.nbar);
    line("g_prime_rad_s", r.cal.g_prime);
    line("omega_rabi_rad_s", r.cal.omega_rabi);
    line("omega_rabi_over_2pi_hz", r.cal.omega_rabi / (2.0 * std::numbers::pi));
    line("escape_probability", r.loss.p0);
    line("q3", r.loss.q3);
    line("q_net", r.loss.q_net);
    line("gamma_rad_s", r.loss.gamma);
    line("t_collapse_us", r.t_collapse * 1e6);
    line("t_revival_us", r.t_revival * 1e6);
    line("f_residual", r.cal.residual);
    out << "n_max = " << r.drive.n_max() << '\n';
    if (grid != nullptr) {
        out << "grid_points = " << grid->times_us.size() << '\n';
        line("t_start_us", grid->times_us.front());
        line("t_end_us", grid->times_us.back());
        line("quadrature_rel_tol", scenario.rel_tol);
    }
}

std::vector<OverlayPoint> parse_overlay(std::istream& in) {
    std::vector<OverlayPoint> points;
    std::string raw;
    std::size_t line = 0;
    bool header = false;
    while (std::getline(in, raw)) {
        ++line;
        const std::string_view text = trim(raw);
        if (text.empty()) continue;
        if (!header) {
            std::string compact;
            for (const char c : text) {
                if (c != ' ' && c != '\t') compact.push_back(c);
            }
            if (compact != "t_us,p") {
                throw ConfigError("overlay line " + std::to_string(line) + ": expected header t_us,p", line,
                                  "overlay");
            }
            header = true;
            continue;
        }
        const auto comma = text.find(',');
        if (comma == std::string_view::npos) {
            throw ConfigError("overlay line " + std::to_string(line) + ": expected two columns", line, "overlay");
        }
        points.push_back({parse_double(trim(text.substr(0, comma)), line, "overlay"),
                          parse_double(trim(text.substr(comma + 1)), line, "overlay")});
    }
    if (!header) throw ConfigError("overlay file is empty", 0, "overlay");
    return points;
}

std::vector<OverlayPoint> load_overlay(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open overlay file " + path.string(), 0, "overlay");
    return parse_overlay(in);
}

std::vector<OverlayResidual> overlay_residuals(const SimulationResult& result,
                                               std::span<const OverlayPoint> overlay) {
    const auto& xs = result.times_us;
    std::vector<OverlayResidual> out;
    out.reserve(overlay.size());
    for (const auto& point : overlay) {
        if (!(point.t_us >= xs.front() && point.t_us <= xs.back())) {
            throw ConfigError("overlay time " + format_exact(point.t_us) + " us lies outside the simulated grid",
                              0, "overlay");
        }
        out.push_back({point.t_us, point.p, interpolate(xs, result.series.p_multimode, point.t_us),
                       interpolate(xs, result.series.p_singlemode, point.t_us)});
    }
    return out;
}

void write_residual_csv(std::ostream& out, std::span<const OverlayResidual> residuals) {
    out << "t_us,p_data,p_multimode,residual_multimode,p_singlemode,residual_singlemode\n";
    for (const auto& r : residuals) {
        out << format_exact(r.t_us) << ',' << format_exact(r.p_data) << ',' << format_exact(r.p_multimode)
            << ',' << format_exact(r.p_multimode - r.p_data) << ',' << format_exact(r.p_singlemode) << ','
            << format_exact(r.p_singlemode - r.p_data) << '\n';
    }
}

ReportFiles run_simulate(const Scenario& scenario, const std::filesystem::path& out_dir, unsigned threads) {
    const SimulationResult result = simulate_scenario(scenario, threads);
    std::filesystem::create_directories(out_dir);
    ReportFiles files;
    files.curve = out_dir / (scenario.name + ".curve.csv");
    auto out = open_output(files.curve);
    write_curve_csv(out, result);
    return files;
}

ReportFiles run_report(const Scenario& scenario, const std::filesystem::path& out_dir, unsigned threads) {
    // Read the overlay first so a bad file fails before the expensive sweep.
    std::vector<OverlayPoint> overlay;
    if (scenario.overlay) overlay = load_overlay(*scenario.overlay);

    const SimulationResult result = simulate_scenario(scenario, threads);
    std::filesystem::create_directories(out_dir);

    ReportFiles files;
    files.curve = out_dir / (scenario.name + ".curve.csv");
    {
        auto out = open_output(files.curve);
        write_curve_csv(out, result);
    }
    files.summary = out_dir / (scenario.name + ".summary.txt");
    {
        auto out = open_output(*files.summary);
        write_summary(out, scenario, result.calibration, &result);
    }
    if (scenario.overlay) {
        const auto residuals = overlay_residuals(result, overlay);
        files.residuals = out_dir / (scenario.name + ".residuals.csv");
        auto out = open_output(*files.residuals);
        write_residual_csv(out, residuals);
    }
    return files;
}

}  // namespace rabi
