#pragma once

#include "cvxpnpl/basis.hpp"
#include "cvxpnpl/geometry.hpp"

#include <Eigen/Core>

#include <array>
#include <vector>

namespace cvxpnpl {

using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

/// The 21 rotation constraints restricted to r = V q, q = (α_1, …, α_{K−1}, 1),
/// each flattened to a row over the quadratic monomials of q.
///
/// K = 2: monomials (a², a, 1), G is 21×3.
/// K = 4: monomials (a², b², c², ab, ac, bc, a, b, c, 1), G is 21×10.
struct QuadricSystem {
    int K = 4;
    /// 9×K, columns [v1 … v_{K−1}, v0] without the homogeneous row.
    Eigen::MatrixXd V;
    Eigen::MatrixXd G;
};

/// Coefficients of vᵀPv over (a², b², c², ab, ac, bc, a, b, c, 1), v = (a, b, c, 1).
Eigen::Matrix<double, 10, 1> quad_to_linear_row(const Mat4 &P);
/// Coefficients of vᵀPv over (a², a, 1), v = (a, 1).
Eigen::Vector3d quad_to_linear_row(const Eigen::Matrix2d &P);

/// qᵀPq = (RᵀR)_ij − δ_ij at R = unvec(V q). 1 <= i <= j <= 3.
Eigen::MatrixXd build_pc(const Eigen::MatrixXd &V, int i, int j);
/// qᵀPq = (RRᵀ)_ij − δ_ij. 1 <= i <= j <= 3.
Eigen::MatrixXd build_pr(const Eigen::MatrixXd &V, int i, int j);
/// qᵀPq = e_lᵀ(R⁽ⁱ⁾ × R⁽ʲ⁾ − R⁽ᵏ⁾) for a cyclic (i, j, k). Throws InvalidTriple.
Eigen::MatrixXd build_pd(const Eigen::MatrixXd &V, int i, int j, int k, int l);

/// Throws InvalidArgument unless basis.K is 2 or 4.
QuadricSystem build_system(const SolutionBasis &basis);

/// Monomial vector matching the G column order.
Eigen::Matrix<double, 10, 1> monomials(double a, double b, double c);
Eigen::Vector3d monomials(double a);

/// Rank-1 G expected from the rank-2 path: σ₂/σ₁ must stay below this.
inline constexpr double kRank2SingularRatio = 1e-4;

/// Real roots of the averaged quadric, ascending. Throws RankMismatch when G
/// is not numerically rank 1 and NoRealRoots when the discriminant is clearly
/// negative.
std::vector<double> solve_rank2(const Eigen::MatrixXd &G);

/// Which monomial pair is eliminated and which unknown is held as a parameter.
/// `rows` index the quadratic block (0-based over a², b², c², ab, ac, bc).
struct Rank4Selection {
    int constant = 0;                 // 0 = a, 1 = b, 2 = c
    std::array<int, 3> rows{1, 2, 5}; // x², y², xy for the two free unknowns
};

/// Tried in order until one yields verified solutions.
const std::array<Rank4Selection, 3> &rank4_selections();

struct Rank4Options {
    /// Residual ‖G·monomials‖∞ a triple must meet to be kept.
    double verify_tol = 1e-5;
    /// Debug hook for mutation testing: negate D before use.
    bool flip_d_sign = false;
};

struct Rank4Result {
    /// Sorted by a, then b, then c.
    std::vector<Vec3> solutions;
    /// 6×4 map from (a, b, c, 1) to the quadratic monomials.
    Eigen::Matrix<double, 6, 4> D;
    /// Ascending coefficients of det M(t) for the selection that was used.
    std::array<double, 5> det_coefficients{};
    Rank4Selection selection;
};

/// D = −(G_LᵀG_L)⁻¹G_LᵀG_R. Throws RankMismatch if G_L is rank deficient.
Eigen::Matrix<double, 6, 4> elimination_matrix(const Eigen::MatrixXd &G);

/// M(t) for a selection, as polynomial entries: entry(r, c)[d] is the
/// coefficient of tᵈ.
using PolyMatrix3 = std::array<std::array<std::array<double, 3>, 3>, 3>;
PolyMatrix3 selection_matrix(const Eigen::Matrix<double, 6, 4> &D, const Rank4Selection &sel);
Eigen::Matrix3d evaluate(const PolyMatrix3 &M, double t);
std::array<double, 5> determinant_coefficients(const PolyMatrix3 &M);

/// Real roots of Σ c_d tᵈ via companion-matrix eigenvalues. Leading
/// coefficients below 1e-12 of the largest are dropped. Returns nothing for an
/// identically zero polynomial.
std::vector<double> real_polynomial_roots(const std::vector<double> &coefficients);

/// ‖G_L D q₁ + G_R q₁‖ for q₁ = (a, b, c, 1); vanishes at true solutions only
/// when D carries the correct sign.
double elimination_residual(const Eigen::MatrixXd &G, const Eigen::Matrix<double, 6, 4> &D, const Vec3 &abc);

/// Throws RankMismatch, SelectionDegenerate (every selection singular) or
/// NoRealRoots (no triple passes verification).
Rank4Result solve_rank4(const Eigen::MatrixXd &G, const Rank4Options &options = {});

} // namespace cvxpnpl
