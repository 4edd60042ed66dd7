#include "cvxpnpl/error.hpp"

namespace cvxpnpl {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::DegenerateLine:
        return "DegenerateLine";
    case ErrorCode::ZeroGroundTruth:
        return "ZeroGroundTruth";
    case ErrorCode::InsufficientCorrespondences:
        return "InsufficientCorrespondences";
    case ErrorCode::DegenerateConfiguration:
        return "DegenerateConfiguration";
    case ErrorCode::InvalidTriple:
        return "InvalidTriple";
    case ErrorCode::SolverFailure:
        return "SolverFailure";
    case ErrorCode::RankOutOfRange:
        return "RankOutOfRange";
    case ErrorCode::BasisDegenerate:
        return "BasisDegenerate";
    case ErrorCode::RankMismatch:
        return "RankMismatch";
    case ErrorCode::NoRealRoots:
        return "NoRealRoots";
    case ErrorCode::SelectionDegenerate:
        return "SelectionDegenerate";
    case ErrorCode::GenerationExhausted:
        return "GenerationExhausted";
    case ErrorCode::EmptySolutionSet:
        return "EmptySolutionSet";
    case ErrorCode::InvalidArgument:
        return "InvalidArgument";
    }
    return "Unknown";
}

} // namespace cvxpnpl
