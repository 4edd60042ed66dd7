#include "cvxpnpl/recovery.hpp"

#include "cvxpnpl/constraints.hpp"
#include "cvxpnpl/error.hpp"
#include "cvxpnpl/qcqp.hpp"
#include "cvxpnpl/quadric.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace cvxpnpl {

namespace {

using Span10 = Eigen::Matrix<double, 10, Eigen::Dynamic>;

// Early stops are usable when the gap is already this small.
constexpr double kEarlyStopGap = 1e-5;
// Largest principal angle (radians) at which the dual null space is trusted
// as a refinement of the primal eigenspace.
constexpr double kSubspaceAgreement = 1e-2;

Span10 top_eigenvectors(const Mat10 &Z, int K) {
    Eigen::SelfAdjointEigenSolver<Mat10> eig(0.5 * (Z + Z.transpose()));
    return eig.eigenvectors().rightCols(K).rowwise().reverse();
}

// Complementarity ZS = 0 puts the solution space in the null space of S. The
// dual slack converges to it much faster than the top eigenvectors of Z do
// on poorly separated instances, so it is preferred whenever both agree.
Span10 solution_span(const SdpSolution &sol, int K) {
    const Span10 primal = top_eigenvectors(sol.Z, K);
    Eigen::SelfAdjointEigenSolver<Mat10> eig(0.5 * (sol.S + sol.S.transpose()));
    const Span10 dual = eig.eigenvectors().leftCols(K);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(primal.transpose() * dual);
    if (svd.singularValues().minCoeff() > std::cos(kSubspaceAgreement))
        return dual;
    spdlog::debug("dual null space disagrees with primal eigenspace; using eigenvectors of Z");
    return primal;
}

double constraint_violation(const QcqpProblem &qcqp, const Vec10 &r_tilde) {
    double worst = 0.0;
    for (const auto &Q : qcqp.constraints)
        worst = std::max(worst, std::abs(quadratic_form(Q, r_tilde)));
    return worst;
}

} // namespace

int estimate_rank(const Mat10 &Z, double threshold) {
    if ((Z - Z.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, Z.cwiseAbs().maxCoeff()))
        throw Error(ErrorCode::InvalidArgument, "rank estimation needs a symmetric matrix");
    Eigen::SelfAdjointEigenSolver<Mat10> eig(0.5 * (Z + Z.transpose()), Eigen::EigenvaluesOnly);
    const auto &ev = eig.eigenvalues();
    if (ev(0) < -1e-6)
        throw Error(ErrorCode::InvalidArgument, "rank estimation needs a PSD matrix");
    const double top = ev(9);
    if (!(top > 0.0))
        throw Error(ErrorCode::RankOutOfRange, "relaxed solution is zero");
    int count = 0;
    for (int i = 0; i < 10; ++i)
        if (ev(i) / top > threshold)
            ++count;
    if (count > 4)
        throw Error(ErrorCode::RankOutOfRange, "relaxed solution has rank " + std::to_string(count) + " (> 4)");
    return count == 3 ? 4 : count;
}

SolutionBasis normalize_basis(const Mat10 &Z, int K) {
    if (K < 1 || K > 10)
        throw Error(ErrorCode::InvalidArgument, "basis size must be in 1..10");
    return normalize_basis(top_eigenvectors(Z, K));
}

SolutionBasis normalize_basis(const Span10 &span) {
    const auto K = span.cols();
    if (K < 1)
        throw Error(ErrorCode::InvalidArgument, "basis needs at least one vector");
    const Eigen::HouseholderQR<Span10> qr(span);
    const Span10 Q = qr.householderQ() * Eigen::MatrixXd::Identity(10, K);
    const Eigen::VectorXd h = Q.row(9).transpose();
    if (h.norm() < 1e-9)
        throw Error(ErrorCode::BasisDegenerate, "the span has no usable homogeneous coordinate");

    // Origin at the minimum-norm point with unit homogeneous coordinate. Unlike
    // a spanning vector it does not coincide with a solution, which would put
    // the solutions on coordinate planes and make the elimination degenerate.
    SolutionBasis basis;
    basis.K = static_cast<int>(K);
    basis.v0 = Q * h / h.squaredNorm();
    basis.v0(9) = 1.0;
    if (K == 1)
        return basis;

    // Directions: an orthonormal basis of the span restricted to h·x = 0.
    const Eigen::MatrixXd H = Eigen::HouseholderQR<Eigen::MatrixXd>(h).householderQ();
    const Eigen::MatrixXd dirs = Q * H.rightCols(K - 1);
    for (Eigen::Index k = 0; k < K - 1; ++k) {
        Vec10 v = dirs.col(k);
        v(9) = 0.0;
        basis.vk.push_back(v.normalized());
    }
    return basis;
}

Mat3 recover_rank1(const Vec10 &v0) { return nearest_rotation(unvec(v0.head<9>())); }

SolutionSet solve(std::span<const PointCorrespondence> points, std::span<const LineCorrespondence> lines,
                  const SolveOptions &options) {
    const StackedSystem sys = assemble(points, lines);
    const ReducedSystem rsys = reduce(sys);
    const QcqpProblem qcqp = build_problem(rsys.A);
    const SdpSolution sol = solve_sdp(make_sdp(qcqp), options.sdp);

    SolutionSet out;
    out.sdp_status = sol.status;
    out.sdp_iterations = sol.iterations;
    out.sdp_objective = sol.objective_value;
    out.sdp_gap = sol.gap;
    out.sdp_primal_residual = sol.primal_residual;
    out.relaxation = sol.Z;
    if (sol.status == SdpStatus::MaxIterations && sol.gap < kEarlyStopGap) {
        out.early_stop = true;
        spdlog::warn("relaxation stopped after {} iterations with gap {:.3g}; recovering anyway", sol.iterations,
                     sol.gap);
    } else if (sol.status != SdpStatus::Optimal) {
        throw Error(ErrorCode::SolverFailure, "relaxation solve ended with status " + std::string(to_string(sol.status)));
    }

    out.K = estimate_rank(sol.Z, options.rank_threshold);
    spdlog::debug("relaxation: {} iterations, objective {:.3g}, rank {}", sol.iterations, sol.objective_value, out.K);
    const SolutionBasis basis = normalize_basis(solution_span(sol, out.K));

    std::vector<Vec10> candidates;
    if (out.K == 1) {
        candidates.push_back(basis.v0);
    } else if (out.K == 2) {
        const QuadricSystem qs = build_system(basis);
        for (double a : solve_rank2(qs.G))
            candidates.push_back(basis.v0 + a * basis.vk[0]);
    } else {
        const QuadricSystem qs = build_system(basis);
        for (const Vec3 &abc : solve_rank4(qs.G).solutions)
            candidates.push_back(basis.v0 + abc(0) * basis.vk[0] + abc(1) * basis.vk[1] + abc(2) * basis.vk[2]);
    }

    for (const Vec10 &c : candidates) {
        const Mat3 R = recover_rank1(c);
        const Vec9 r = vec(R);
        const Pose pose(R, recover_translation(rsys, sys, r));
        const PoseDiagnostics diag{(rsys.A * r).norm(), constraint_violation(qcqp, c)};

        auto dup = std::find_if(out.poses.begin(), out.poses.end(), [&](const Pose &p) {
            return rotation_error_deg(p.rotation(), R) < kDuplicateRotationDeg;
        });
        if (dup == out.poses.end()) {
            out.poses.push_back(pose);
            out.diagnostics.push_back(diag);
        } else {
            auto &kept = out.diagnostics[static_cast<std::size_t>(dup - out.poses.begin())];
            if (diag.residual < kept.residual) {
                *dup = pose;
                kept = diag;
            }
        }
    }

    if (options.filter_cheirality) {
        std::vector<Pose> poses;
        std::vector<PoseDiagnostics> diags;
        for (std::size_t i = 0; i < out.poses.size(); ++i) {
            const bool in_front = std::all_of(points.begin(), points.end(), [&](const PointCorrespondence &pc) {
                return out.poses[i].transform(pc.p)(2) > 0.0;
            });
            if (in_front) {
                poses.push_back(out.poses[i]);
                diags.push_back(out.diagnostics[i]);
            }
        }
        if (poses.empty())
            throw Error(ErrorCode::EmptySolutionSet, "every candidate pose places a point behind the camera");
        out.poses = std::move(poses);
        out.diagnostics = std::move(diags);
    }
    return out;
}

} // namespace cvxpnpl
