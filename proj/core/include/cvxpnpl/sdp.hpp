#pragma once

#include "cvxpnpl/geometry.hpp"
#include "cvxpnpl/qcqp.hpp"

#include <Eigen/Core>

#include <string_view>
#include <vector>

namespace cvxpnpl {

/// min tr(C Z)  s.t.  tr(A_i Z) = b_i,  Z ⪰ 0, for one dense 10×10 block.
struct SdpProblem {
    Mat10 objective;
    std::vector<Mat10> equalities;
    std::vector<double> rhs;
};

/// Shor relaxation of a QCQP: the 21 homogeneous constraints followed by the
/// corner constraint Z₁₀,₁₀ = 1.
SdpProblem make_sdp(const QcqpProblem &qcqp);

struct SdpSettings {
    double feasibility_tol = 1e-9;
    double gap_tol = 1e-9;
    int max_iterations = 100;
    /// Once the contract above holds, keep iterating (at most refine_iterations
    /// more) until the gap drops below refine_gap_tol·(1 + |objective|). A
    /// breakdown during this phase returns the last iterate within contract.
    double refine_gap_tol = 1e-12;
    int refine_iterations = 20;
    double regularization = 1e-12;
    /// Fraction of the distance to the cone boundary taken on each step.
    double step_fraction = 0.98;
    /// Floor on the Mehrotra centering parameter. Keeping iterates near the
    /// central path is what makes the top eigenvectors of Z accurate; without
    /// it they are only good to about the square root of the gap. 0.3 roughly
    /// doubles the iteration count of 0.1 and buys about two more digits.
    double min_centering = 0.3;
};

enum class SdpStatus { Optimal, MaxIterations, Infeasible, NumericalFailure };

std::string_view to_string(SdpStatus status);

struct SdpSolution {
    Mat10 Z = Mat10::Zero();
    Mat10 S = Mat10::Zero();
    /// Multipliers for the equalities, in problem order.
    Eigen::VectorXd y;
    double objective_value = 0.0;
    double dual_objective = 0.0;
    SdpStatus status = SdpStatus::NumericalFailure;
    int iterations = 0;
    /// max_i |tr(A_i Z) − b_i|.
    double primal_residual = 0.0;
    /// ‖C − S − Σ y_i A_i‖_F / (1 + ‖C‖_F).
    double dual_residual = 0.0;
    /// |primal − dual objective|, absolute.
    double gap = 0.0;
};

/// Primal-dual path-following interior point method (Nesterov-Todd scaling,
/// Mehrotra predictor-corrector, infeasible start). Deterministic.
///
/// Linearly dependent equalities are folded into an orthonormal basis before
/// iterating; inconsistent ones yield Infeasible. Throws InvalidArgument on
/// asymmetric data or an empty constraint list.
SdpSolution solve_sdp(const SdpProblem &problem, const SdpSettings &settings = {});

struct CertificateReport {
    std::vector<double> residuals;
    double max_residual = 0.0;
    double min_eigenvalue = 0.0;
    double gap = 0.0;
    double objective = 0.0;
    bool feasible = false;
    bool psd = false;
    bool gap_ok = false;

    bool within_contract() const { return feasible && psd && gap_ok; }
};

/// Post-solve check of a solution against the problem it claims to solve:
/// |tr(A_i Z) − b_i| <= tol, λmin(Z) >= −tol, gap <= tol·(1 + |objective|).
CertificateReport certificate(const SdpSolution &sol, const SdpProblem &problem, double tol = 1e-8);

} // namespace cvxpnpl
