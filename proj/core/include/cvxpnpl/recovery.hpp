#pragma once

#include "cvxpnpl/basis.hpp"
#include "cvxpnpl/geometry.hpp"
#include "cvxpnpl/sdp.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace cvxpnpl {

inline constexpr double kDefaultRankThreshold = 1e-4;
/// Candidates closer than this (degrees) are merged.
inline constexpr double kDuplicateRotationDeg = 1e-3;

/// Number of eigenvalues with λ/λmax above `threshold`, with 3 reported as 4.
/// Throws RankOutOfRange above 4 and InvalidArgument when Z is not PSD within
/// −1e-6.
int estimate_rank(const Mat10 &Z, double threshold = kDefaultRankThreshold);

/// Eliminates the homogeneous coordinate across the top-K eigenvectors of Z.
SolutionBasis normalize_basis(const Mat10 &Z, int K);

/// Same elimination on an explicit set of spanning vectors (columns).
/// Throws BasisDegenerate when the whole span has a vanishing last entry.
SolutionBasis normalize_basis(const Eigen::Matrix<double, 10, Eigen::Dynamic> &span);

/// Nearest proper rotation to unvec(v0[0..8]).
Mat3 recover_rank1(const Vec10 &v0);

struct SolveOptions {
    bool filter_cheirality = false;
    double rank_threshold = kDefaultRankThreshold;
    SdpSettings sdp;
};

struct PoseDiagnostics {
    /// ‖A vec(R)‖ for the returned rotation.
    double residual = 0.0;
    /// max_i |r̃ᵀQ_i r̃| of the candidate before projection onto SO(3).
    double constraint_violation = 0.0;
};

struct SolutionSet {
    std::vector<Pose> poses;
    std::vector<PoseDiagnostics> diagnostics;
    int K = 1;
    SdpStatus sdp_status = SdpStatus::Optimal;
    int sdp_iterations = 0;
    double sdp_objective = 0.0;
    double sdp_gap = 0.0;
    double sdp_primal_residual = 0.0;
    /// Moment matrix returned by the relaxation.
    Mat10 relaxation = Mat10::Zero();
    /// Set when the solver stopped early but the gap was small enough to use.
    bool early_stop = false;
};

/// Full pipeline: stack, eliminate translation, relax, solve, recover.
/// Throws whatever the stages raise; SolverFailure when the relaxation could
/// not be solved usefully; EmptySolutionSet when cheirality removes all poses.
SolutionSet solve(std::span<const PointCorrespondence> points, std::span<const LineCorrespondence> lines,
                  const SolveOptions &options = {});

} // namespace cvxpnpl
