#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sclt {

// One deterministic identity check: measured is compared against tolerance
// (passed = measured <= tolerance unless the check says otherwise).
struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

// MDE residuals on random (z, w), rho^z(0) closed form, saturation at small eta.
std::vector<CheckResult> check_mde(std::uint64_t seed = 1);
// Stability operator spectrum, beta-hat pair vs 4x4 eigensolve, lower-bound ratio.
std::vector<CheckResult> check_stability(std::uint64_t seed = 2);
// Two closed forms of the expectation correction; the eta-integral.
std::vector<CheckResult> check_closed_forms(std::uint64_t seed = 3);
// Polynomial integrals and E(z^k).
std::vector<CheckResult> check_quadrature();
// Signed vs explicit DBM drift.
std::vector<CheckResult> check_dbm_drift(std::uint64_t seed = 4);

std::vector<CheckResult> run_selftest();

}  // namespace sclt
