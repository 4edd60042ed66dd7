#include "cvxpnpl/constraints.hpp"

#include "cvxpnpl/error.hpp"

#include <Eigen/Eigenvalues>

#include <string>

namespace cvxpnpl {

std::pair<Eigen::Matrix<double, 3, 9>, Eigen::Matrix3d> point_block(const PointCorrespondence &pc) {
    const Mat3 U = skew(pc.u);
    Eigen::Matrix<double, 3, 9> C;
    for (int k = 0; k < 3; ++k)
        C.middleCols<3>(3 * k) = pc.p[k] * U;
    return {C, U};
}

std::pair<Eigen::Matrix<double, 2, 9>, Eigen::Matrix<double, 2, 3>> line_block(const LineCorrespondence &lc) {
    Eigen::Matrix<double, 2, 9> C;
    Eigen::Matrix<double, 2, 3> N;
    const Vec3 *endpoints[2] = {&lc.lp1, &lc.lp2};
    for (int i = 0; i < 2; ++i) {
        for (int k = 0; k < 3; ++k)
            C.block<1, 3>(i, 3 * k) = (*endpoints[i])[k] * lc.ln.transpose();
        N.row(i) = lc.ln.transpose();
    }
    return {C, N};
}

bool configuration_supported(std::size_t n_points, std::size_t n_lines) {
    if (n_lines == 0)
        return n_points >= 3;
    return n_points + n_lines >= 4;
}

StackedSystem assemble(std::span<const PointCorrespondence> points, std::span<const LineCorrespondence> lines) {
    if (!configuration_supported(points.size(), lines.size()))
        throw Error(ErrorCode::InsufficientCorrespondences,
                    "insufficient correspondences: " + std::to_string(points.size()) + " points and " +
                        std::to_string(lines.size()) +
                        " lines (need >= 3 points, or >= 4 elements when lines are present)");

    StackedSystem sys;
    sys.n_points = static_cast<int>(points.size());
    sys.n_lines = static_cast<int>(lines.size());
    const Eigen::Index rows = 3 * sys.n_points + 2 * sys.n_lines;
    sys.C.resize(rows, 9);
    sys.N.resize(rows, 3);

    Eigen::Index row = 0;
    for (const auto &pc : points) {
        auto [C, N] = point_block(pc);
        sys.C.middleRows<3>(row) = C;
        sys.N.middleRows<3>(row) = N;
        row += 3;
    }
    for (const auto &lc : lines) {
        auto [C, N] = line_block(lc);
        sys.C.middleRows<2>(row) = C;
        sys.N.middleRows<2>(row) = N;
        row += 2;
    }
    return sys;
}

ReducedSystem reduce(const StackedSystem &sys) {
    ReducedSystem out;
    out.NtN = sys.N.transpose() * sys.N;

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(out.NtN, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues()(0);
    const double hi = eig.eigenvalues()(2);
    if (!(lo > 0.0) || hi / lo > kMaxNormalCondition)
        throw Error(ErrorCode::DegenerateConfiguration,
                    "NᵀN is singular or ill-conditioned (translation is not observable)");

    out.NtN_llt.compute(out.NtN);
    if (out.NtN_llt.info() != Eigen::Success)
        throw Error(ErrorCode::DegenerateConfiguration, "NᵀN factorization failed");

    out.A = sys.C - sys.N * out.NtN_llt.solve(sys.N.transpose() * sys.C);
    return out;
}

Vec3 recover_translation(const ReducedSystem &rsys, const StackedSystem &sys, const Vec9 &r) {
    return -rsys.NtN_llt.solve(sys.N.transpose() * (sys.C * r));
}

} // namespace cvxpnpl
