// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <iostream>

#include "rabi/acceptance.hpp"

int main(int argc, char** argv) {
    rabi::AcceptanceOptions options;
    if (argc > 1) options.scratch_dir = argv[1];

    const auto start = std::chrono::steady_clock::now();
    const auto results = rabi::run_acceptance(options, &std::cout);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::size_t passed = 0;
    for (const auto& r : results) passed += r.passed ? 1 : 0;
    std::cout << passed << "/" << results.size() << " acceptance criteria passed in " << seconds << " s\n";
    return passed == results.size() ? 0 : 1;
}
