#pragma once

#include <cstdint>

namespace invmc::testing {

struct LemmaSuiteResult {
    int maps = 0;
    /// Targets inside [phi_lo, phi_hi] and how many lacked an accurate antecedent.
    int inside_checked = 0;
    int inside_failures = 0;
    /// Targets outside the interval under strictly monotone maps, and how many found one anyway.
    int outside_checked = 0;
    int outside_failures = 0;
    double max_residual = 0.0;
};

/// Random continuous monotone control maps on the arbitrage storage (additive
/// transition, controls in [-11.5, 11.5], dt = 1/200). Half the maps are
/// decreasing and span the whole control range, so that phi(0) = phi_lo and
/// phi(I_max) = phi_hi; the others are arbitrary monotone maps and only enter
/// the existence check.
LemmaSuiteResult run_lemma_suite(int maps, int targets_per_map, std::uint64_t seed);

}  // namespace invmc::testing
