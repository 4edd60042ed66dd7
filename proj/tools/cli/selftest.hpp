#pragma once

#include <string>
#include <vector>

namespace cvxpnpl::cli {

struct SelftestOptions {
    /// Mutation hook: negate the elimination matrix of the rank-4 solver.
    bool flip_d_sign = false;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Embedded invariant suite. Deterministic: every check draws from its own
/// fixed seed.
std::vector<CheckResult> run_selftest(const SelftestOptions &options = {});

} // namespace cvxpnpl::cli
