#pragma once

#include "cvxpnpl/geometry.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <span>
#include <utility>

namespace cvxpnpl {

using MatX9 = Eigen::Matrix<double, Eigen::Dynamic, 9>;
using MatX3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Homogeneous linear system C vec(R) + N t = 0 stacked over all
/// correspondences, points first (3 rows each) then lines (2 rows each).
struct StackedSystem {
    MatX9 C;
    MatX3 N;
    int n_points = 0;
    int n_lines = 0;
};

/// Translation-free system A vec(R) = 0 with A = (I − N(NᵀN)⁻¹Nᵀ) C.
struct ReducedSystem {
    MatX9 A;
    Eigen::Matrix3d NtN;
    Eigen::LLT<Eigen::Matrix3d> NtN_llt;
};

/// cond(NᵀN) above this is reported as DegenerateConfiguration.
inline constexpr double kMaxNormalCondition = 1e12;

/// (C_p, N_p) = (pᵀ ⊗ ⌊u⌋×, ⌊u⌋×).
std::pair<Eigen::Matrix<double, 3, 9>, Eigen::Matrix3d> point_block(const PointCorrespondence &pc);

/// Rows (l_pi ⊗ l_n)ᵀ for i = 1, 2 and N rows l_nᵀ.
std::pair<Eigen::Matrix<double, 2, 9>, Eigen::Matrix<double, 2, 3>> line_block(const LineCorrespondence &lc);

/// Points-only problems need n >= 3; anything with lines needs n + m >= 4.
bool configuration_supported(std::size_t n_points, std::size_t n_lines);

StackedSystem assemble(std::span<const PointCorrespondence> points, std::span<const LineCorrespondence> lines);

ReducedSystem reduce(const StackedSystem &sys);

/// Least-squares translation for a fixed rotation, −(NᵀN)⁻¹ Nᵀ C r.
Vec3 recover_translation(const ReducedSystem &rsys, const StackedSystem &sys, const Vec9 &r);

} // namespace cvxpnpl
