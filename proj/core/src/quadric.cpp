#include "cvxpnpl/quadric.hpp"

#include "cvxpnpl/error.hpp"
#include "cvxpnpl/qcqp.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace cvxpnpl {

namespace {

// 3×9 picking column i of R out of vec(R): (e_i ⊗ I₃)ᵀ.
Eigen::Matrix<double, 3, 9> column_selector(int i) {
    Eigen::Matrix<double, 3, 9> S = Eigen::Matrix<double, 3, 9>::Zero();
    S.block<3, 3>(0, 3 * (i - 1)) = Mat3::Identity();
    return S;
}

// 3×9 picking row i of R: (I₃ ⊗ e_i)ᵀ.
Eigen::Matrix<double, 3, 9> row_selector(int i) {
    Eigen::Matrix<double, 3, 9> S = Eigen::Matrix<double, 3, 9>::Zero();
    for (int c = 0; c < 3; ++c)
        S(c, 3 * c + (i - 1)) = 1.0;
    return S;
}

void check_basis(const Eigen::MatrixXd &V) {
    if (V.rows() != 9 || V.cols() < 2)
        throw Error(ErrorCode::InvalidArgument, "quadric basis must be 9×K with K >= 2");
}

Eigen::MatrixXd homogeneous_corner(Eigen::Index K, double value) {
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(K, K);
    E(K - 1, K - 1) = value;
    return E;
}

using Poly = std::array<double, 5>;

Poly poly(const std::array<double, 3> &p) { return {p[0], p[1], p[2], 0.0, 0.0}; }

Poly mul(const Poly &a, const Poly &b) {
    Poly out{};
    for (int i = 0; i < 5; ++i)
        for (int j = 0; i + j < 5; ++j)
            out[static_cast<std::size_t>(i + j)] += a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
    return out;
}

Poly add(const Poly &a, const Poly &b) {
    Poly out{};
    for (std::size_t i = 0; i < 5; ++i)
        out[i] = a[i] + b[i];
    return out;
}

Poly sub(const Poly &a, const Poly &b) {
    Poly out{};
    for (std::size_t i = 0; i < 5; ++i)
        out[i] = a[i] - b[i];
    return out;
}

Poly scale(const Poly &a, double s) {
    Poly out{};
    for (std::size_t i = 0; i < 5; ++i)
        out[i] = a[i] * s;
    return out;
}

std::array<double, 3> truncate(const Poly &p) { return {p[0], p[1], p[2]}; }

std::pair<int, int> free_unknowns(int constant) {
    switch (constant) {
    case 0:
        return {1, 2};
    case 1:
        return {0, 2};
    default:
        return {0, 1};
    }
}

// Gauss-Newton on all equations of G; the eliminated 3×3 system only sees a
// few of them, so its roots carry more rounding than the full system allows.
// Steps that do not reduce the residual are rejected.
Vec3 polish(const Eigen::MatrixXd &G, Vec3 abc) {
    auto residual = [&](const Vec3 &x) { return Eigen::VectorXd(G * monomials(x(0), x(1), x(2))); };
    Eigen::VectorXd r = residual(abc);
    for (int iter = 0; iter < 3; ++iter) {
        const double a = abc(0), b = abc(1), c = abc(2);
        Eigen::Matrix<double, 10, 3> dm = Eigen::Matrix<double, 10, 3>::Zero();
        dm.col(0) << 2 * a, 0, 0, b, c, 0, 1, 0, 0, 0;
        dm.col(1) << 0, 2 * b, 0, a, 0, c, 0, 1, 0, 0;
        dm.col(2) << 0, 0, 2 * c, 0, a, b, 0, 0, 1, 0;
        const Eigen::MatrixXd J = G * dm;
        const Vec3 next = abc + J.colPivHouseholderQr().solve(-r);
        const Eigen::VectorXd r_next = residual(next);
        if (!next.allFinite() || !(r_next.norm() < r.norm()))
            break;
        abc = next;
        r = r_next;
    }
    return abc;
}

} // namespace

Eigen::Matrix<double, 10, 1> quad_to_linear_row(const Mat4 &P) {
    Eigen::Matrix<double, 10, 1> row;
    row << P(0, 0), P(1, 1), P(2, 2), P(0, 1) + P(1, 0), P(0, 2) + P(2, 0), P(1, 2) + P(2, 1), P(0, 3) + P(3, 0),
        P(1, 3) + P(3, 1), P(2, 3) + P(3, 2), P(3, 3);
    return row;
}

Eigen::Vector3d quad_to_linear_row(const Eigen::Matrix2d &P) { return {P(0, 0), P(0, 1) + P(1, 0), P(1, 1)}; }

Eigen::MatrixXd build_pc(const Eigen::MatrixXd &V, int i, int j) {
    check_basis(V);
    if (i < 1 || j > 3 || i > j)
        throw Error(ErrorCode::InvalidArgument, "orthogonality indices must satisfy 1 <= i <= j <= 3");
    const Eigen::MatrixXd Ci = column_selector(i) * V;
    const Eigen::MatrixXd Cj = column_selector(j) * V;
    return Ci.transpose() * Cj - homogeneous_corner(V.cols(), i == j ? 1.0 : 0.0);
}

Eigen::MatrixXd build_pr(const Eigen::MatrixXd &V, int i, int j) {
    check_basis(V);
    if (i < 1 || j > 3 || i > j)
        throw Error(ErrorCode::InvalidArgument, "orthogonality indices must satisfy 1 <= i <= j <= 3");
    const Eigen::MatrixXd Ri = row_selector(i) * V;
    const Eigen::MatrixXd Rj = row_selector(j) * V;
    return Ri.transpose() * Rj - homogeneous_corner(V.cols(), i == j ? 1.0 : 0.0);
}

Eigen::MatrixXd build_pd(const Eigen::MatrixXd &V, int i, int j, int k, int l) {
    check_basis(V);
    const bool cyclic = (i == 1 && j == 2 && k == 3) || (i == 2 && j == 3 && k == 1) || (i == 3 && j == 1 && k == 2);
    if (!cyclic)
        throw Error(ErrorCode::InvalidTriple, "determinant constraint requires a cyclic triple (i, j, k)");
    if (l < 1 || l > 3)
        throw Error(ErrorCode::InvalidArgument, "determinant component l must be in 1..3");
    const Eigen::MatrixXd Ci = column_selector(i) * V;
    const Eigen::MatrixXd Cj = column_selector(j) * V;
    Eigen::MatrixXd P = Cj.transpose() * skew(Vec3::Unit(l - 1)) * Ci;
    // Linear term e_lᵀ R⁽ᵏ⁾ = wᵀq, written as q_last · wᵀq.
    const Eigen::RowVectorXd w = (column_selector(k) * V).row(l - 1);
    P.row(V.cols() - 1) -= w;
    return P;
}

QuadricSystem build_system(const SolutionBasis &basis) {
    if (basis.K != 2 && basis.K != 4)
        throw Error(ErrorCode::InvalidArgument, "quadric system needs K = 2 or K = 4");
    if (static_cast<int>(basis.vk.size()) != basis.K - 1)
        throw Error(ErrorCode::InvalidArgument, "basis must carry K - 1 direction vectors");

    QuadricSystem sys;
    sys.K = basis.K;
    sys.V.resize(9, basis.K);
    for (int k = 0; k < basis.K - 1; ++k)
        sys.V.col(k) = basis.vk[static_cast<std::size_t>(k)].head<9>();
    sys.V.col(basis.K - 1) = basis.v0.head<9>();

    const Eigen::Index cols = basis.K == 2 ? 3 : 10;
    sys.G.resize(kNumRotationConstraints, cols);
    Eigen::Index row = 0;
    for (const auto &label : constraint_labels()) {
        Eigen::MatrixXd P;
        switch (label.kind) {
        case ConstraintKind::RowOrthogonality:
            P = build_pr(sys.V, label.i, label.j);
            break;
        case ConstraintKind::ColumnOrthogonality:
            P = build_pc(sys.V, label.i, label.j);
            break;
        case ConstraintKind::Determinant:
            P = build_pd(sys.V, label.i, label.j, label.k, label.l);
            break;
        }
        if (basis.K == 2)
            sys.G.row(row++) = quad_to_linear_row(Eigen::Matrix2d(P)).transpose();
        else
            sys.G.row(row++) = quad_to_linear_row(Mat4(P)).transpose();
    }
    return sys;
}

Eigen::Matrix<double, 10, 1> monomials(double a, double b, double c) {
    Eigen::Matrix<double, 10, 1> m;
    m << a * a, b * b, c * c, a * b, a * c, b * c, a, b, c, 1.0;
    return m;
}

Eigen::Vector3d monomials(double a) { return {a * a, a, 1.0}; }

std::vector<double> solve_rank2(const Eigen::MatrixXd &G) {
    if (G.cols() != 3 || G.rows() == 0)
        throw Error(ErrorCode::InvalidArgument, "rank-2 system must have 3 columns");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
    const auto &sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(1) / sv(0) >= kRank2SingularRatio)
        throw Error(ErrorCode::RankMismatch, "rank-2 quadric system is not numerically rank 1");

    // Rows of a rank-1 matrix agree up to sign and scale; align the signs to
    // the largest row so that averaging does not cancel.
    Eigen::Index ref = 0;
    G.rowwise().norm().maxCoeff(&ref);
    const Eigen::RowVector3d anchor = G.row(ref);
    Eigen::RowVector3d g = Eigen::RowVector3d::Zero();
    for (Eigen::Index i = 0; i < G.rows(); ++i)
        g += G.row(i).dot(anchor) < 0.0 ? Eigen::RowVector3d(-G.row(i)) : Eigen::RowVector3d(G.row(i));
    g /= static_cast<double>(G.rows());
    g.normalize();

    const double qa = g(0), qb = g(1), qc = g(2);
    if (std::abs(qa) < 1e-12) {
        if (std::abs(qb) < 1e-12)
            throw Error(ErrorCode::NoRealRoots, "averaged quadric is constant");
        return {-qc / qb};
    }
    double disc = qb * qb - 4.0 * qa * qc;
    if (disc < -1e-6)
        throw Error(ErrorCode::NoRealRoots, "averaged quadric has complex roots (discriminant " +
                                                std::to_string(disc) + ")");
    disc = std::max(disc, 0.0);
    if (disc == 0.0)
        return {-qb / (2.0 * qa)};
    // Cancellation-free pair of roots.
    const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
    std::vector<double> roots{q / qa, qc / q};
    std::sort(roots.begin(), roots.end());
    return roots;
}

const std::array<Rank4Selection, 3> &rank4_selections() {
    static const std::array<Rank4Selection, 3> selections{{
        {0, {1, 2, 5}},
        {1, {0, 2, 4}},
        {2, {0, 1, 3}},
    }};
    return selections;
}

Eigen::Matrix<double, 6, 4> elimination_matrix(const Eigen::MatrixXd &G) {
    if (G.cols() != 10 || G.rows() < 6)
        throw Error(ErrorCode::InvalidArgument, "rank-4 system must be at least 6×10");
    const Eigen::MatrixXd GL = G.leftCols(6);
    const Eigen::MatrixXd GR = G.rightCols(4);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(GL);
    const auto &sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(5) / sv(0) < 1e-10)
        throw Error(ErrorCode::RankMismatch, "quadratic block of the rank-4 system is not rank 6");
    // G_L q₂ + G_R q₁ = 0, hence q₂ = −G_L⁺ G_R q₁.
    return -GL.colPivHouseholderQr().solve(GR);
}

PolyMatrix3 selection_matrix(const Eigen::Matrix<double, 6, 4> &D, const Rank4Selection &sel) {
    const auto [x, y] = free_unknowns(sel.constant);
    const int t = sel.constant;
    // Each selected row reads  m = k1·x + k2·y + k3(t).
    auto coefficients = [&](int row) {
        return std::array<Poly, 3>{Poly{D(row, x), 0, 0, 0, 0}, Poly{D(row, y), 0, 0, 0, 0},
                                   Poly{D(row, 3), D(row, t), 0, 0, 0}};
    };
    const auto [p1, p2, p3] = coefficients(sel.rows[0]); // x²
    const auto [q1, q2, q3] = coefficients(sel.rows[1]); // y²
    const auto [s1, s2, s3] = coefficients(sel.rows[2]); // xy

    PolyMatrix3 M{};
    // (x²)y = (xy)x
    M[0][0] = truncate(sub(sub(mul(p2, q1), mul(s1, s2)), s3));
    M[0][1] = truncate(sub(sub(add(add(mul(p1, s2), mul(p2, q2)), p3), mul(s1, p2)), mul(s2, s2)));
    M[0][2] = truncate(sub(sub(add(mul(p1, s3), mul(p2, q3)), mul(s1, p3)), mul(s2, s3)));
    // (y²)x = (xy)y
    M[1][0] = truncate(sub(sub(add(add(mul(q1, p1), mul(q2, s1)), q3), mul(s1, s1)), mul(s2, q1)));
    M[1][1] = truncate(sub(sub(mul(q1, p2), mul(s1, s2)), s3));
    M[1][2] = truncate(sub(sub(add(mul(q1, p3), mul(q2, s3)), mul(s1, s3)), mul(s2, q3)));
    // (x²)(y²) = (xy)², expanded then reduced with the three selected rows.
    const Poly alpha = sub(mul(p1, q1), mul(s1, s1));
    const Poly beta = sub(add(mul(p1, q2), mul(p2, q1)), scale(mul(s1, s2), 2.0));
    const Poly gamma = sub(mul(p2, q2), mul(s2, s2));
    const Poly delta = sub(add(mul(p1, q3), mul(p3, q1)), scale(mul(s1, s3), 2.0));
    const Poly eps = sub(add(mul(p2, q3), mul(p3, q2)), scale(mul(s2, s3), 2.0));
    const Poly zeta = sub(mul(p3, q3), mul(s3, s3));
    M[2][0] = truncate(add(add(add(mul(alpha, p1), mul(beta, s1)), mul(gamma, q1)), delta));
    M[2][1] = truncate(add(add(add(mul(alpha, p2), mul(beta, s2)), mul(gamma, q2)), eps));
    M[2][2] = truncate(add(add(add(mul(alpha, p3), mul(beta, s3)), mul(gamma, q3)), zeta));
    return M;
}

Eigen::Matrix3d evaluate(const PolyMatrix3 &M, double t) {
    Eigen::Matrix3d out;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            const auto &p = M[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            out(r, c) = p[0] + t * (p[1] + t * p[2]);
        }
    return out;
}

std::array<double, 5> determinant_coefficients(const PolyMatrix3 &M) {
    auto e = [&](int r, int c) { return poly(M[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]); };
    const Poly minor0 = sub(mul(e(1, 1), e(2, 2)), mul(e(1, 2), e(2, 1)));
    const Poly minor1 = sub(mul(e(1, 0), e(2, 2)), mul(e(1, 2), e(2, 0)));
    const Poly minor2 = sub(mul(e(1, 0), e(2, 1)), mul(e(1, 1), e(2, 0)));
    return add(sub(mul(e(0, 0), minor0), mul(e(0, 1), minor1)), mul(e(0, 2), minor2));
}

std::vector<double> real_polynomial_roots(const std::vector<double> &coefficients) {
    double largest = 0.0;
    for (double c : coefficients)
        largest = std::max(largest, std::abs(c));
    if (largest == 0.0)
        return {};
    auto degree = static_cast<Eigen::Index>(coefficients.size()) - 1;
    while (degree > 0 && std::abs(coefficients[static_cast<std::size_t>(degree)]) < 1e-12 * largest)
        --degree;
    if (degree == 0)
        return {};

    const double lead = coefficients[static_cast<std::size_t>(degree)];
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
    companion.diagonal(-1).setOnes();
    for (Eigen::Index i = 0; i < degree; ++i)
        companion(i, degree - 1) = -coefficients[static_cast<std::size_t>(i)] / lead;
    Eigen::EigenSolver<Eigen::MatrixXd> eig(companion, false);

    auto value_and_slope = [&](double t) {
        double p = 0.0, dp = 0.0;
        for (Eigen::Index i = degree; i >= 0; --i) {
            dp = dp * t + p;
            p = p * t + coefficients[static_cast<std::size_t>(i)];
        }
        return std::pair{p, dp};
    };

    std::vector<double> roots;
    for (Eigen::Index i = 0; i < degree; ++i) {
        const std::complex<double> z = eig.eigenvalues()(i);
        if (std::abs(z.imag()) > 1e-6 * (1.0 + std::abs(z.real())))
            continue;
        double t = z.real();
        // Two guarded Newton steps tighten well-separated roots.
        for (int it = 0; it < 2; ++it) {
            const auto [p, dp] = value_and_slope(t);
            if (dp == 0.0)
                break;
            const double next = t - p / dp;
            if (std::abs(value_and_slope(next).first) >= std::abs(p))
                break;
            t = next;
        }
        roots.push_back(t);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

double elimination_residual(const Eigen::MatrixXd &G, const Eigen::Matrix<double, 6, 4> &D, const Vec3 &abc) {
    const Vec4 q1(abc(0), abc(1), abc(2), 1.0);
    return (G.leftCols(6) * (D * q1) + G.rightCols(4) * q1).norm();
}

Rank4Result solve_rank4(const Eigen::MatrixXd &G, const Rank4Options &options) {
    Rank4Result result;
    result.D = elimination_matrix(G);
    if (options.flip_d_sign)
        result.D = -result.D;

    bool any_regular = false;
    bool have_best = false;
    for (const auto &sel : rank4_selections()) {
        const PolyMatrix3 M = selection_matrix(result.D, sel);
        const std::array<double, 5> det = determinant_coefficients(M);
        const std::vector<double> roots = real_polynomial_roots({det.begin(), det.end()});
        double det_scale = 0.0, entry_scale = 0.0;
        for (double c : det)
            det_scale = std::max(det_scale, std::abs(c));
        for (const auto &row : M)
            for (const auto &entry : row)
                for (double c : entry)
                    entry_scale = std::max(entry_scale, std::abs(c));
        // Identically singular up to rounding: the cubic products cancel.
        if (!(det_scale > 1e-13 * entry_scale * entry_scale * entry_scale))
            continue;
        any_regular = true;

        const auto [x, y] = free_unknowns(sel.constant);
        std::vector<Vec3> found;
        for (double t : roots) {
            const Eigen::Matrix3d Mt = evaluate(M, t);
            const Eigen::Vector2d xy = Mt.leftCols<2>().colPivHouseholderQr().solve(-Mt.col(2));
            Vec3 abc;
            abc(sel.constant) = t;
            abc(x) = xy(0);
            abc(y) = xy(1);
            if (!abc.allFinite())
                continue;
            abc = polish(G, abc);
            const double residual = (G * monomials(abc(0), abc(1), abc(2))).cwiseAbs().maxCoeff();
            if (residual >= options.verify_tol)
                continue;
            const bool duplicate =
                std::any_of(found.begin(), found.end(), [&](const Vec3 &f) { return (f - abc).norm() < 1e-9; });
            if (!duplicate)
                found.push_back(abc);
        }
        if (!have_best || found.size() > result.solutions.size()) {
            result.solutions = std::move(found);
            result.det_coefficients = det;
            result.selection = sel;
            have_best = true;
        }
        if (result.solutions.size() >= 4)
            break;
    }
    if (!any_regular)
        throw Error(ErrorCode::SelectionDegenerate, "every variable selection gives an identically singular system");
    if (result.solutions.empty())
        throw Error(ErrorCode::NoRealRoots, "no real solution of the rank-4 quadric system passed verification");
    std::sort(result.solutions.begin(), result.solutions.end(), [](const Vec3 &l, const Vec3 &r) {
        return std::lexicographical_compare(l.data(), l.data() + 3, r.data(), r.data() + 3);
    });
    return result;
}

} // namespace cvxpnpl
