#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cvxpnpl {

enum class ErrorCode {
    DegenerateLine,
    ZeroGroundTruth,
    InsufficientCorrespondences,
    DegenerateConfiguration,
    InvalidTriple,
    SolverFailure,
    RankOutOfRange,
    BasisDegenerate,
    RankMismatch,
    NoRealRoots,
    SelectionDegenerate,
    GenerationExhausted,
    EmptySolutionSet,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable error code. Every failure raised by
/// the library is an instance of this type.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

} // namespace cvxpnpl
