#include "cvxpnpl/qcqp.hpp"

#include "cvxpnpl/error.hpp"

namespace cvxpnpl {

namespace {

void check_ordered_pair(int i, int j) {
    if (i < 1 || j > 3 || i > j)
        throw Error(ErrorCode::InvalidArgument, "orthogonality constraint indices must satisfy 1 <= i <= j <= 3");
}

Mat10 symmetrized(const Mat10 &M) { return 0.5 * (M + M.transpose()); }

bool is_cyclic(int i, int j, int k) {
    return (i == 1 && j == 2 && k == 3) || (i == 2 && j == 3 && k == 1) || (i == 3 && j == 1 && k == 2);
}

} // namespace

std::string ConstraintLabel::name() const {
    switch (kind) {
    case ConstraintKind::RowOrthogonality:
        return "row_orth_" + std::to_string(i) + std::to_string(j);
    case ConstraintKind::ColumnOrthogonality:
        return "col_orth_" + std::to_string(i) + std::to_string(j);
    case ConstraintKind::Determinant:
        return "det_" + std::to_string(i) + std::to_string(j) + std::to_string(k) + "_" + std::to_string(l);
    }
    return "unknown";
}

Mat10 build_cost(const MatX9 &A) {
    Mat10 Q = Mat10::Zero();
    Q.topLeftCorner<9, 9>() = A.transpose() * A;
    return symmetrized(Q);
}

Mat10 build_row_orth(int i, int j) {
    check_ordered_pair(i, j);
    // I₃ ⊗ E_ji: entry (j, i) of every diagonal 3×3 block.
    Mat10 M = Mat10::Zero();
    for (int block = 0; block < 3; ++block)
        M(3 * block + (j - 1), 3 * block + (i - 1)) = 1.0;
    M(9, 9) = (i == j) ? -1.0 : 0.0;
    return symmetrized(M);
}

Mat10 build_col_orth(int i, int j) {
    check_ordered_pair(i, j);
    // E_ij ⊗ I₃: identity in block (i, j).
    Mat10 M = Mat10::Zero();
    M.block<3, 3>(3 * (i - 1), 3 * (j - 1)) = Mat3::Identity();
    M(9, 9) = (i == j) ? -1.0 : 0.0;
    return symmetrized(M);
}

Mat10 build_det(int i, int j, int k, int l) {
    if (!is_cyclic(i, j, k))
        throw Error(ErrorCode::InvalidTriple, "determinant constraint requires a cyclic triple (i, j, k)");
    if (l < 1 || l > 3)
        throw Error(ErrorCode::InvalidArgument, "determinant constraint component l must be in 1..3");
    // E_ji ⊗ ⌊e_l⌋× in block (j, i), and −(e_k ⊗ e_l) as the linear term.
    Mat10 M = Mat10::Zero();
    M.block<3, 3>(3 * (j - 1), 3 * (i - 1)) = skew(Vec3::Unit(l - 1));
    M(3 * (k - 1) + (l - 1), 9) = -1.0;
    return symmetrized(M);
}

const std::array<ConstraintLabel, kNumRotationConstraints> &constraint_labels() {
    static const std::array<ConstraintLabel, kNumRotationConstraints> labels = [] {
        std::array<ConstraintLabel, kNumRotationConstraints> out{};
        std::size_t n = 0;
        for (auto kind : {ConstraintKind::RowOrthogonality, ConstraintKind::ColumnOrthogonality})
            for (int i = 1; i <= 3; ++i)
                for (int j = i; j <= 3; ++j)
                    out[n++] = ConstraintLabel{kind, i, j, 0, 0};
        const int triples[3][3] = {{1, 2, 3}, {2, 3, 1}, {3, 1, 2}};
        for (const auto &t : triples)
            for (int l = 1; l <= 3; ++l)
                out[n++] = ConstraintLabel{ConstraintKind::Determinant, t[0], t[1], t[2], l};
        return out;
    }();
    return labels;
}

Mat10 build_constraint(const ConstraintLabel &label) {
    switch (label.kind) {
    case ConstraintKind::RowOrthogonality:
        return build_row_orth(label.i, label.j);
    case ConstraintKind::ColumnOrthogonality:
        return build_col_orth(label.i, label.j);
    case ConstraintKind::Determinant:
        return build_det(label.i, label.j, label.k, label.l);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown constraint kind");
}

QcqpProblem build_problem(const MatX9 &A) {
    QcqpProblem problem;
    problem.Q0 = build_cost(A);
    problem.constraints.reserve(kNumRotationConstraints);
    problem.labels.reserve(kNumRotationConstraints);
    for (const auto &label : constraint_labels()) {
        problem.constraints.push_back(build_constraint(label));
        problem.labels.push_back(label);
    }
    return problem;
}

} // namespace cvxpnpl
