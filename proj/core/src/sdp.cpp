#include "cvxpnpl/sdp.hpp"

#include "cvxpnpl/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace cvxpnpl {

namespace {

constexpr int kOrder = 10;
constexpr int kVecSize = kOrder * kOrder;

using Vec100 = Eigen::Matrix<double, kVecSize, 1>;
using MatB = Eigen::Matrix<double, kVecSize, Eigen::Dynamic>;

Vec100 flat(const Mat10 &M) { return Eigen::Map<const Vec100>(M.data()); }

Mat10 unflat(const Eigen::Ref<const Vec100> &v) {
    Mat10 M;
    Eigen::Map<Vec100>(M.data()) = v;
    return M;
}

Mat10 sym(const Mat10 &M) { return 0.5 * (M + M.transpose()); }

double min_eigenvalue(const Mat10 &M) {
    Eigen::SelfAdjointEigenSolver<Mat10> eig(sym(M), Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(0);
}

/// Largest α in (0, 1] keeping diag(v) + α D ⪰ 0, given v > 0.
double max_step(const Eigen::Matrix<double, kOrder, 1> &v, const Mat10 &D) {
    const Eigen::Matrix<double, kOrder, 1> inv_sqrt = v.cwiseSqrt().cwiseInverse();
    const Mat10 scaled = inv_sqrt.asDiagonal() * D * inv_sqrt.asDiagonal();
    const double lo = min_eigenvalue(scaled);
    if (lo >= -1.0)
        return 1.0;
    return -1.0 / lo;
}

/// Largest α in (0, 1] keeping M + α D ⪰ 0, given M = LLᵀ ≻ 0.
double max_step_chol(const Mat10 &L, const Mat10 &D) {
    const auto tri = L.triangularView<Eigen::Lower>();
    const Mat10 half = tri.solve(D);
    const Mat10 scaled = tri.solve(half.transpose());
    const double lo = min_eigenvalue(scaled);
    if (lo >= -1.0)
        return 1.0;
    return -1.0 / lo;
}

/// Equalities re-expressed in an orthonormal basis of their span.
struct ReducedConstraints {
    MatB basis;               // columns: flat(Ā_k), orthonormal
    Eigen::VectorXd rhs;      // b̄
    Eigen::MatrixXd to_original; // y = to_original * ȳ
    double inconsistency = 0.0;
};

ReducedConstraints reduce_constraints(const SdpProblem &problem) {
    const auto m = static_cast<Eigen::Index>(problem.equalities.size());
    MatB Bt(kVecSize, m);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        Bt.col(i) = flat(problem.equalities[static_cast<std::size_t>(i)]);
        b(i) = problem.rhs[static_cast<std::size_t>(i)];
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Bt, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd &sigma = svd.singularValues();
    const double cutoff = 1e-12 * std::max(1.0, sigma(0));
    Eigen::Index rank = 0;
    while (rank < sigma.size() && sigma(rank) > cutoff)
        ++rank;

    ReducedConstraints out;
    out.basis = svd.matrixU().leftCols(rank);
    const Eigen::MatrixXd W = svd.matrixV();
    out.rhs = (W.leftCols(rank).transpose() * b).cwiseQuotient(sigma.head(rank));
    out.to_original = W.leftCols(rank) * sigma.head(rank).cwiseInverse().asDiagonal();
    if (rank < m)
        out.inconsistency = (W.rightCols(m - rank).transpose() * b).norm() / (1.0 + b.norm());
    return out;
}

Mat10 adjoint(const MatB &basis, const Eigen::VectorXd &y) { return sym(unflat(basis * y)); }

} // namespace

std::string_view to_string(SdpStatus status) {
    switch (status) {
    case SdpStatus::Optimal:
        return "Optimal";
    case SdpStatus::MaxIterations:
        return "MaxIterations";
    case SdpStatus::Infeasible:
        return "Infeasible";
    case SdpStatus::NumericalFailure:
        return "NumericalFailure";
    }
    return "Unknown";
}

SdpProblem make_sdp(const QcqpProblem &qcqp) {
    SdpProblem sdp;
    sdp.objective = qcqp.Q0;
    sdp.equalities = qcqp.constraints;
    sdp.rhs.assign(qcqp.constraints.size(), 0.0);
    Mat10 corner = Mat10::Zero();
    corner(9, 9) = 1.0;
    sdp.equalities.push_back(corner);
    sdp.rhs.push_back(1.0);
    return sdp;
}

SdpSolution solve_sdp(const SdpProblem &problem, const SdpSettings &settings) {
    if (problem.equalities.empty() || problem.equalities.size() != problem.rhs.size())
        throw Error(ErrorCode::InvalidArgument, "SDP needs at least one equality and one rhs per equality");
    auto asymmetric = [](const Mat10 &M) { return (M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12; };
    if (asymmetric(problem.objective) ||
        std::any_of(problem.equalities.begin(), problem.equalities.end(), asymmetric))
        throw Error(ErrorCode::InvalidArgument, "SDP data matrices must be symmetric");

    const auto m = static_cast<Eigen::Index>(problem.equalities.size());
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i)
        b(i) = problem.rhs[static_cast<std::size_t>(i)];

    const double c_norm = problem.objective.norm();
    const double c_scale = c_norm > 0.0 ? c_norm : 1.0;
    const Mat10 C = problem.objective / c_scale;

    const ReducedConstraints rc = reduce_constraints(problem);
    const MatB &Ab = rc.basis;
    const Eigen::Index r = Ab.cols();

    SdpSolution sol;
    sol.y = Eigen::VectorXd::Zero(m);
    auto original_residual = [&](const Mat10 &X) {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < m; ++i)
            worst = std::max(worst,
                             std::abs((problem.equalities[static_cast<std::size_t>(i)].cwiseProduct(X)).sum() - b(i)));
        return worst;
    };
    auto finish = [&](const Mat10 &X, const Eigen::VectorXd &ybar, const Mat10 &S, SdpStatus status, int iters) {
        sol.Z = sym(X);
        sol.S = c_scale * sym(S);
        sol.y = c_scale * (rc.to_original * ybar);
        sol.objective_value = (problem.objective.cwiseProduct(sol.Z)).sum();
        sol.dual_objective = b.dot(sol.y);
        sol.primal_residual = original_residual(sol.Z);
        Mat10 Rd = problem.objective - sol.S;
        for (Eigen::Index i = 0; i < m; ++i)
            Rd -= sol.y(i) * problem.equalities[static_cast<std::size_t>(i)];
        sol.dual_residual = Rd.norm() / (1.0 + c_norm);
        sol.gap = std::abs(sol.objective_value - sol.dual_objective);
        sol.status = status;
        sol.iterations = iters;
        return sol;
    };

    Mat10 X = 10.0 * Mat10::Identity();
    Mat10 S = 10.0 * Mat10::Identity();
    Eigen::VectorXd y = Eigen::VectorXd::Zero(r);

    if (rc.inconsistency > settings.feasibility_tol)
        return finish(X, y, S, SdpStatus::Infeasible, 0);

    // Best iterate meeting the tolerance contract. Past that point the solver
    // keeps tightening the gap, and any breakdown falls back to this iterate.
    struct Snapshot {
        Mat10 X, S;
        Eigen::VectorXd y;
        int iter;
        double gap;
    };
    std::optional<Snapshot> accepted;
    int first_accepted = -1;
    auto stop = [&](SdpStatus status, int iter) {
        if (accepted)
            return finish(accepted->X, accepted->y, accepted->S, SdpStatus::Optimal, accepted->iter);
        return finish(X, y, S, status, iter);
    };

    for (int iter = 0;; ++iter) {
        const Eigen::VectorXd rp = rc.rhs - Ab.transpose() * flat(X);
        const Mat10 Rd = sym(C - S - adjoint(Ab, y));
        const double mu = (X.cwiseProduct(S)).sum() / kOrder;
        const double pobj = (C.cwiseProduct(X)).sum();
        const double dobj = rc.rhs.dot(y);

        // Termination is judged in the caller's units.
        const double obj = c_scale * pobj;
        const double gap_abs = c_scale * std::max(std::abs(pobj - dobj), kOrder * mu);
        const double dual_rel = c_scale * Rd.norm() / (1.0 + c_norm);
        if (original_residual(X) <= settings.feasibility_tol && dual_rel <= settings.feasibility_tol &&
            gap_abs <= settings.gap_tol * (1.0 + std::abs(obj))) {
            if (!accepted || gap_abs < accepted->gap)
                accepted = Snapshot{X, S, y, iter, gap_abs};
            if (first_accepted < 0)
                first_accepted = iter;
            if (gap_abs <= settings.refine_gap_tol * (1.0 + std::abs(obj)))
                return finish(X, y, S, SdpStatus::Optimal, iter);
        }
        // Near the floor of double precision the directions lose accuracy
        // and μ starts to climb again; stop once the gap no longer improves.
        if (accepted && (iter - first_accepted >= settings.refine_iterations || iter - accepted->iter >= 3))
            return stop(SdpStatus::Optimal, iter);

        // Primal infeasibility: ȳ with b̄ᵀȳ > 0 and Σ ȳ_k Ā_k ⪯ 0.
        if (dobj > 0.0) {
            const Eigen::SelfAdjointEigenSolver<Mat10> ray(adjoint(Ab, y), Eigen::EigenvaluesOnly);
            if (dobj > 1e3 && std::max(0.0, ray.eigenvalues()(kOrder - 1)) <= 1e-8 * dobj)
                return finish(X, y, S, SdpStatus::Infeasible, iter);
        }

        if (iter >= settings.max_iterations)
            return stop(SdpStatus::MaxIterations, iter);

        // Nesterov-Todd scaling: X = LLᵀ, LᵀSL = QΛ²Qᵀ, G = LQΛ^{-1/2}, so that
        // GᵀSG = G⁻¹XG⁻ᵀ = Λ.
        Eigen::LLT<Mat10> chol_x(X);
        if (chol_x.info() != Eigen::Success)
            return stop(SdpStatus::NumericalFailure, iter);
        const Mat10 L = chol_x.matrixL();
        Eigen::SelfAdjointEigenSolver<Mat10> eig(sym(L.transpose() * S * L));
        if (eig.info() != Eigen::Success || eig.eigenvalues()(0) <= 0.0)
            return stop(SdpStatus::NumericalFailure, iter);
        const Eigen::Matrix<double, kOrder, 1> lambda = eig.eigenvalues().cwiseSqrt();
        const Mat10 G = L * eig.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal();

        // Scaled constraint basis and its QR factor: the Schur complement is BᵀB.
        MatB B(kVecSize, r);
        for (Eigen::Index k = 0; k < r; ++k)
            B.col(k) = flat(G.transpose() * unflat(Ab.col(k)) * G);
        Eigen::HouseholderQR<MatB> qr(B);
        Eigen::MatrixXd R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
        const double diag_min = R.diagonal().cwiseAbs().minCoeff();
        const double diag_max = R.diagonal().cwiseAbs().maxCoeff();
        Eigen::LDLT<Eigen::MatrixXd> fallback;
        const bool use_fallback = !(diag_min > 1e-14 * diag_max);
        if (use_fallback) {
            const Eigen::MatrixXd M = B.transpose() * B;
            double reg = settings.regularization * std::max(1.0, M.diagonal().maxCoeff());
            for (int attempt = 0; attempt < 4; ++attempt, reg *= 100.0) {
                fallback.compute(M + reg * Eigen::MatrixXd::Identity(r, r));
                if (fallback.info() == Eigen::Success && fallback.isPositive())
                    break;
            }
            if (fallback.info() != Eigen::Success)
                return stop(SdpStatus::NumericalFailure, iter);
        }
        auto schur_solve = [&](const Eigen::VectorXd &h) -> Eigen::VectorXd {
            if (use_fallback)
                return fallback.solve(h);
            const Eigen::VectorXd z = R.transpose().triangularView<Eigen::Lower>().solve(h);
            return R.triangularView<Eigen::Upper>().solve(z);
        };

        const Mat10 Rd_scaled = G.transpose() * Rd * G;

        struct Direction {
            Mat10 dX_scaled, dS_scaled;
            Eigen::VectorXd dy;
        };
        // Solves ΔX̃ + ΔS̃ = Rc, ΔS̃ = R̃d − Σ Δy_k Ã_k, tr(Ã_k ΔX̃) = rp_k.
        auto direction = [&](const Mat10 &Rc) {
            Direction d;
            const Vec100 rhs_mat = flat(sym(Rc - Rd_scaled));
            d.dy = schur_solve(rp - B.transpose() * rhs_mat);
            d.dS_scaled = sym(Rd_scaled - unflat(B * d.dy));
            d.dX_scaled = sym(Rc - d.dS_scaled);
            return d;
        };
        auto inv_lyapunov = [&](const Mat10 &Rm) {
            Mat10 out;
            for (int i = 0; i < kOrder; ++i)
                for (int j = 0; j < kOrder; ++j)
                    out(i, j) = 2.0 * Rm(i, j) / (lambda(i) + lambda(j));
            return out;
        };

        const Mat10 V = lambda.asDiagonal();
        const Direction pred = direction(-V);
        const double ap = max_step(lambda, pred.dX_scaled);
        const double ad = max_step(lambda, pred.dS_scaled);
        const double mu_aff = ((V + ap * pred.dX_scaled).cwiseProduct(V + ad * pred.dS_scaled)).sum() / kOrder;
        const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), settings.min_centering, 1.0);

        const Mat10 second_order = sym(pred.dX_scaled * pred.dS_scaled);
        const Mat10 target = sigma * mu * Mat10::Identity() - V * V - second_order;
        const Direction corr = direction(inv_lyapunov(target));

        if (!corr.dy.allFinite())
            return stop(SdpStatus::NumericalFailure, iter);

        // Rebuilding ΔX through G amplifies rounding once μ is tiny; restore
        // tr(Ā_k ΔX) = rp_k exactly using the orthonormal basis. Step lengths are
        // then taken against the true iterates rather than the scaled ones.
        Mat10 dX = sym(G * corr.dX_scaled * G.transpose());
        dX += adjoint(Ab, rp - Ab.transpose() * flat(dX));
        const Mat10 dS = sym(Rd - adjoint(Ab, corr.dy));
        Eigen::LLT<Mat10> chol_s(S);
        if (chol_s.info() != Eigen::Success)
            return stop(SdpStatus::NumericalFailure, iter);
        const double step_p = std::min(1.0, settings.step_fraction * max_step_chol(L, dX));
        const double step_d = std::min(1.0, settings.step_fraction * max_step_chol(chol_s.matrixL(), dS));
        if (!(step_p > 1e-12) || !(step_d > 1e-12))
            return stop(SdpStatus::NumericalFailure, iter);

        X = sym(X + step_p * dX);
        S = sym(S + step_d * dS);
        y += step_d * corr.dy;
    }
}

CertificateReport certificate(const SdpSolution &sol, const SdpProblem &problem, double tol) {
    CertificateReport report;
    report.residuals.reserve(problem.equalities.size());
    for (std::size_t i = 0; i < problem.equalities.size(); ++i) {
        const double res = (problem.equalities[i].cwiseProduct(sol.Z)).sum() - problem.rhs[i];
        report.residuals.push_back(res);
        report.max_residual = std::max(report.max_residual, std::abs(res));
    }
    report.min_eigenvalue = min_eigenvalue(sol.Z);
    report.objective = (problem.objective.cwiseProduct(sol.Z)).sum();
    double dual = 0.0;
    if (sol.y.size() == static_cast<Eigen::Index>(problem.rhs.size()))
        for (std::size_t i = 0; i < problem.rhs.size(); ++i)
            dual += problem.rhs[i] * sol.y(static_cast<Eigen::Index>(i));
    else
        dual = std::numeric_limits<double>::quiet_NaN();
    report.gap = std::abs(report.objective - dual);
    report.feasible = report.max_residual <= tol;
    report.psd = report.min_eigenvalue >= -tol;
    report.gap_ok = report.gap <= tol * (1.0 + std::abs(report.objective));
    return report;
}

} // namespace cvxpnpl
