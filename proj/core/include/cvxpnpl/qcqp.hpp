#pragma once

#include "cvxpnpl/constraints.hpp"
#include "cvxpnpl/geometry.hpp"

#include <array>
#include <string>
#include <vector>

namespace cvxpnpl {

enum class ConstraintKind { RowOrthogonality, ColumnOrthogonality, Determinant };

/// Identifies one quadratic rotation constraint. Indices are 1-based: (i, j)
/// for the orthogonality families, the cyclic triple (i, j, k) and component l
/// for the right-hand (determinant) family.
struct ConstraintLabel {
    ConstraintKind kind;
    int i = 0;
    int j = 0;
    int k = 0;
    int l = 0;

    std::string name() const;
    bool operator==(const ConstraintLabel &) const = default;
};

inline constexpr int kNumRotationConstraints = 21;

/// min r̃ᵀ Q0 r̃ s.t. r̃ᵀ Qi r̃ = 0 (i = 1..21), r̃₁₀ = 1.
struct QcqpProblem {
    Mat10 Q0;
    std::vector<Mat10> constraints;
    std::vector<ConstraintLabel> labels;
};

/// [[AᵀA, 0], [0, 0]].
Mat10 build_cost(const MatX9 &A);

/// r̃ᵀ M r̃ = (XXᵀ)_ij − δ_ij for r̃ = [vec(X); 1]. Requires 1 <= i <= j <= 3.
Mat10 build_row_orth(int i, int j);

/// r̃ᵀ M r̃ = (XᵀX)_ij − δ_ij. Requires 1 <= i <= j <= 3.
Mat10 build_col_orth(int i, int j);

/// r̃ᵀ M r̃ = e_lᵀ (X⁽ⁱ⁾ × X⁽ʲ⁾ − X⁽ᵏ⁾). Throws InvalidTriple unless (i, j, k)
/// is one of (1,2,3), (2,3,1), (3,1,2).
Mat10 build_det(int i, int j, int k, int l);

/// Labels of the 21 constraints in canonical order: row-orth (11,12,13,22,23,33),
/// col-orth (same), then determinant by triple and component l.
const std::array<ConstraintLabel, kNumRotationConstraints> &constraint_labels();

Mat10 build_constraint(const ConstraintLabel &label);

QcqpProblem build_problem(const MatX9 &A);

inline double quadratic_form(const Mat10 &M, const Vec10 &x) { return x.dot(M * x); }

} // namespace cvxpnpl
