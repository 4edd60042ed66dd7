#pragma once

#include <iosfwd>

namespace cvxpnpl::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitSelftestFailure = 1,
    kExitInputError = 2,
    kExitSolverError = 3,
};

/// Entry point shared by the executable and the tests. Reads CVXPNPL_LOG for
/// the log level; log lines go to stderr.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace cvxpnpl::cli
