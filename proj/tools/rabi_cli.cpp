// Command-line driver: calibrate, simulate, report and selftest verbs.
//
// Exit codes: 0 success, 1 invalid input or configuration, 2 numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "rabi/acceptance.hpp"
#include "rabi/error.hpp"
#include "rabi/scenario.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

rabi::Scenario resolve_scenario(const std::string& config, const std::optional<double>& nbar) {
    rabi::Scenario scenario;
    if (config.empty()) {
        scenario.name = "default";
    } else {
        scenario = rabi::load_scenario(config);
    }
    if (nbar) scenario.nbar = *nbar;
    scenario.validate();
    return scenario;
}

int run(const std::string& verb, const std::string& config, const std::filesystem::path& out_dir,
        const std::optional<double>& nbar, unsigned threads) {
    if (verb == "selftest") {
        rabi::AcceptanceOptions options;
        options.threads = threads;
        options.scratch_dir = out_dir / "selftest";
        const auto results = rabi::run_acceptance(options, &std::cout);
        std::size_t failed = 0;
        for (const auto& r : results) failed += r.passed ? 0 : 1;
        std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed\n";
        return failed == 0 ? 0 : kExitNumerical;
    }

    const rabi::Scenario scenario = resolve_scenario(config, nbar);
    if (verb == "calibrate") {
        rabi::write_summary(std::cout, scenario, rabi::calibrate_scenario(scenario));
        return 0;
    }
    if (verb == "simulate") {
        const auto files = rabi::run_simulate(scenario, out_dir, threads);
        std::cout << "curve: " << files.curve.string() << '\n';
        return 0;
    }
    const auto files = rabi::run_report(scenario, out_dir, threads);
    std::cout << "curve: " << files.curve.string() << '\n';
    std::cout << "summary: " << files.summary->string() << '\n';
    if (files.residuals) std::cout << "residuals: " << files.residuals->string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collapse and revival of Rabi oscillations in a lossy resonant cavity"};
    std::string verb;
    std::string config;
    std::string out_dir = ".";
    std::optional<double> nbar;
    unsigned threads = 0;

    app.add_option("--verb", verb, "What to run")
        ->required()
        ->check(CLI::IsMember({"calibrate", "simulate", "report", "selftest"}));
    app.add_option("--config", config, "Scenario file (key = value); reference cavity when omitted")
        ->check(CLI::ExistingFile);
    app.add_option("--out-dir", out_dir, "Directory for curve, summary and residual files");
    app.add_option("--nbar", nbar, "Mean photon number, overrides the scenario");
    app.add_option("--threads", threads, "Worker threads for curve sweeps (0 = all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        return run(verb, config, out_dir, nbar, threads);
    } catch (const rabi::InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const rabi::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}
