#pragma once

// End-to-end acceptance checks: reference cavity numbers, calibration roots,
// collapse/revival estimates, two-route identities, quadrature oracle,
// long-time normalization, curve morphology, spectrum width and report
// determinism. Shared by the acceptance test binary and `rabi --verb selftest`.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace rabi {

struct CriterionResult {
    int id;
    std::string title;
    bool passed;
    std::string detail;
};

struct AcceptanceOptions {
    unsigned threads = 0;                ///< sweep workers, 0 = hardware concurrency
    std::filesystem::path scratch_dir;   ///< report output for the determinism check; empty = temp dir
};

/// Runs every criterion; a criterion that throws is reported as failed. When
/// `progress` is given, one PASS/FAIL line per criterion is printed as it finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream* progress = nullptr);

/// "[PASS] 3 title: detail"
std::string format_criterion(const CriterionResult& result);

}  // namespace rabi
