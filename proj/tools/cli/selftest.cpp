#include "selftest.hpp"

#include "cvxpnpl/constraints.hpp"
#include "cvxpnpl/qcqp.hpp"
#include "cvxpnpl/quadric.hpp"
#include "cvxpnpl/recovery.hpp"
#include "cvxpnpl/rng.hpp"
#include "cvxpnpl/sdp.hpp"
#include "cvxpnpl/synth.hpp"

#include <Eigen/LU>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>

namespace cvxpnpl::cli {

namespace {

double worst_violation(const Mat3 &X) {
    Vec10 x;
    x << vec(X), 1.0;
    double worst = 0.0;
    for (const auto &label : constraint_labels())
        worst = std::max(worst, std::abs(quadratic_form(build_constraint(label), x)));
    return worst;
}

Scene scene_with(int n_points, int n_lines, std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.n_points = n_points;
    cfg.n_lines = n_lines;
    Rng rng(seed);
    return generate_scene(cfg, rng);
}

struct Problem {
    StackedSystem sys;
    ReducedSystem rsys;
};

Problem problem_for(const Scene &scene, const Observations &obs) {
    const CameraIntrinsics K;
    const auto pts = point_correspondences(scene, obs, K);
    const auto lns = line_correspondences(scene, obs, K);
    Problem p;
    p.sys = assemble(pts, lns);
    p.rsys = reduce(p.sys);
    return p;
}

SolutionBasis basis_from(const std::vector<Mat3> &rotations) {
    Eigen::Matrix<double, 10, Eigen::Dynamic> span(10, static_cast<Eigen::Index>(rotations.size()));
    for (std::size_t i = 0; i < rotations.size(); ++i)
        span.col(static_cast<Eigen::Index>(i)) << vec(rotations[i]), 1.0;
    return normalize_basis(span);
}

std::vector<Mat3> random_rotations(int count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Mat3> out;
    for (int i = 0; i < count; ++i)
        out.push_back(random_rotation(rng));
    return out;
}

// Largest distance from a true rotation to the nearest recovered one.
double worst_recovery(const std::vector<Mat3> &truth, const std::vector<Vec10> &found) {
    double worst = 0.0;
    for (const Mat3 &R : truth) {
        double best = INFINITY;
        for (const Vec10 &x : found)
            best = std::min(best, (x.head<9>() - vec(R)).norm());
        worst = std::max(worst, best);
    }
    return worst;
}

CheckResult rotation_constraints_satisfied(const SelftestOptions &) {
    Rng rng(101);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i)
        worst = std::max(worst, worst_violation(random_rotation(rng)));
    return {"", worst < 1e-8, fmt::format("max violation {:.2e} over 1000 rotations", worst)};
}

CheckResult reflections_violate_constraints(const SelftestOptions &) {
    Rng rng(102);
    double weakest = INFINITY;
    for (int i = 0; i < 1000; ++i) {
        const Mat3 R = random_rotation(rng);
        weakest = std::min(weakest, worst_violation(-R));
        weakest = std::min(weakest, worst_violation(R * Eigen::Vector3d(1, 1, -1).asDiagonal()));
    }
    return {"", weakest > 1e-3, fmt::format("smallest violation {:.3g} over 2000 reflections", weakest)};
}

CheckResult constraint_set_well_formed(const SelftestOptions &) {
    const auto &labels = constraint_labels();
    bool ok = labels.size() == static_cast<std::size_t>(kNumRotationConstraints);
    for (const auto &label : labels) {
        const Mat10 M = build_constraint(label);
        ok = ok && (M - M.transpose()).norm() == 0.0 && M.norm() > 0.0;
    }
    return {"", ok, fmt::format("{} symmetric nonzero constraint matrices", labels.size())};
}

CheckResult point_residual_vanishes(const SelftestOptions &) {
    const Scene scene = scene_with(6, 0, 103);
    const Problem p = problem_for(scene, scene.observed);
    const double res = (p.sys.C * scene.truth.r() + p.sys.N * scene.truth.translation()).norm();
    return {"", res < 1e-9, fmt::format("|C r + N t| = {:.2e} on 6 noiseless points", res)};
}

CheckResult line_residual_vanishes(const SelftestOptions &) {
    const Scene scene = scene_with(0, 5, 104);
    const Problem p = problem_for(scene, scene.observed);
    const double res = (p.sys.C * scene.truth.r() + p.sys.N * scene.truth.translation()).norm();
    return {"", res < 1e-9, fmt::format("|C r + N t| = {:.2e} on 5 noiseless lines", res)};
}

CheckResult translation_recovered(const SelftestOptions &) {
    const Scene scene = scene_with(3, 2, 105);
    const Problem p = problem_for(scene, scene.observed);
    const Vec3 t = recover_translation(p.rsys, p.sys, scene.truth.r());
    const double err = translation_error_rel(t, scene.truth.translation());
    const double ar = (p.rsys.A * scene.truth.r()).norm();
    return {"", err < 1e-9 && ar < 1e-9, fmt::format("relative error {:.2e}, |A r| = {:.2e}", err, ar)};
}

CheckResult sdp_certificate_holds(const SelftestOptions &) {
    const Scene scene = scene_with(10, 0, 106);
    const Problem p = problem_for(scene, scene.observed);
    const SdpProblem sdp = make_sdp(build_problem(p.rsys.A));
    const SdpSolution sol = solve_sdp(sdp);
    const CertificateReport cert = certificate(sol, sdp, 1e-8);
    return {"", sol.status == SdpStatus::Optimal && cert.within_contract(),
            fmt::format("{}: residual {:.2e}, min eigenvalue {:.2e}, gap {:.2e}", to_string(sol.status),
                        cert.max_residual, cert.min_eigenvalue, cert.gap)};
}

CheckResult sdp_lower_bound(const SelftestOptions &) {
    const Scene scene = scene_with(8, 2, 107);
    Rng rng(1107);
    const Observations noisy = apply_pixel_noise(scene.observed, 2.0, rng);
    const Problem p = problem_for(scene, noisy);
    const SdpSolution sol = solve_sdp(make_sdp(build_problem(p.rsys.A)));
    const double truth_cost = (p.rsys.A * scene.truth.r()).squaredNorm();
    return {"", sol.objective_value <= truth_cost + 1e-6,
            fmt::format("relaxed objective {:.4e} vs true-rotation cost {:.4e}", sol.objective_value, truth_cost)};
}

CheckResult relaxation_tight(const SelftestOptions &) {
    const Scene scene = scene_with(10, 0, 108);
    const CameraIntrinsics K;
    const SolutionSet set =
        solve(point_correspondences(scene, scene.observed, K), line_correspondences(scene, scene.observed, K));
    const double err = set.poses.empty() ? INFINITY : rotation_error_deg(set.poses[0].rotation(), scene.truth.rotation());
    return {"", set.K == 1 && set.poses.size() == 1 && err < 1e-4,
            fmt::format("rank {}, {} pose(s), rotation error {:.2e} deg", set.K, set.poses.size(), err)};
}

CheckResult quadric_rank2_round_trip(const SelftestOptions &) {
    const auto truth = random_rotations(2, 109);
    const SolutionBasis basis = basis_from(truth);
    std::vector<Vec10> found;
    for (double a : solve_rank2(build_system(basis).G))
        found.push_back(basis.point(Eigen::VectorXd::Constant(1, a)));
    const double worst = worst_recovery(truth, found);
    return {"", found.size() == 2 && worst < 1e-6,
            fmt::format("{} roots, worst rotation distance {:.2e}", found.size(), worst)};
}

CheckResult quadric_rank4_round_trip(const SelftestOptions &options) {
    const auto truth = random_rotations(4, 110);
    const SolutionBasis basis = basis_from(truth);
    Rank4Options opts;
    opts.flip_d_sign = options.flip_d_sign;
    std::vector<Vec10> found;
    for (const Vec3 &abc : solve_rank4(build_system(basis).G, opts).solutions)
        found.push_back(basis.point(abc));
    const double worst = worst_recovery(truth, found);
    return {"", found.size() == 4 && worst < 1e-6,
            fmt::format("{} solutions, worst rotation distance {:.2e}", found.size(), worst)};
}

CheckResult elimination_sign_correct(const SelftestOptions &options) {
    const auto truth = random_rotations(4, 111);
    const SolutionBasis basis = basis_from(truth);
    const QuadricSystem qs = build_system(basis);
    Eigen::Matrix<double, 6, 4> D = elimination_matrix(qs.G);
    if (options.flip_d_sign)
        D = -D;
    double worst = 0.0;
    for (const Mat3 &R : truth) {
        Vec10 x;
        x << vec(R), 1.0;
        const Eigen::VectorXd abc = basis.coordinates(x);
        worst = std::max(worst, elimination_residual(qs.G, D, Vec3(abc(0), abc(1), abc(2))));
    }
    return {"", worst < 1e-8, fmt::format("elimination residual at the true solutions {:.2e}", worst)};
}

CheckResult determinant_polynomial_consistent(const SelftestOptions &options) {
    const auto truth = random_rotations(4, 112);
    const QuadricSystem qs = build_system(basis_from(truth));
    Eigen::Matrix<double, 6, 4> D = elimination_matrix(qs.G);
    if (options.flip_d_sign)
        D = -D;
    double worst = 0.0;
    for (const auto &sel : rank4_selections()) {
        const PolyMatrix3 M = selection_matrix(D, sel);
        const auto coeffs = determinant_coefficients(M);
        double scale = 0.0;
        for (double c : coeffs)
            scale = std::max(scale, std::abs(c));
        for (double t : {-2.0, -0.5, 0.3, 1.7}) {
            double poly = 0.0;
            for (int d = 4; d >= 0; --d)
                poly = poly * t + coeffs[static_cast<std::size_t>(d)];
            const double direct = evaluate(M, t).determinant();
            worst = std::max(worst, std::abs(poly - direct) / (scale * std::pow(1.0 + std::abs(t), 4)));
        }
    }
    return {"", worst < 1e-9, fmt::format("relative mismatch against direct determinants {:.2e}", worst)};
}

CheckResult nearest_rotation_projects(const SelftestOptions &) {
    Rng rng(113);
    double fixed_point = 0.0, off = 0.0;
    bool proper = true;
    for (int i = 0; i < 200; ++i) {
        const Mat3 R = random_rotation(rng);
        fixed_point = std::max(fixed_point, (nearest_rotation(R) - R).norm());
        Mat3 noisy = R;
        for (int k = 0; k < 9; ++k)
            noisy(k) += rng.normal(0.0, 0.05);
        const Mat3 P = nearest_rotation(noisy);
        proper = proper && is_rotation(P, 1e-12);
        off = std::max(off, rotation_error_deg(P, R));
    }
    return {"", proper && fixed_point < 1e-12 && off < 20.0,
            fmt::format("fixed-point error {:.2e}, projections proper: {}", fixed_point, proper ? "yes" : "no")};
}

} // namespace

std::vector<CheckResult> run_selftest(const SelftestOptions &options) {
    using Check = std::function<CheckResult(const SelftestOptions &)>;
    const std::vector<std::pair<std::string, Check>> checks{
        {"rotation_constraints_satisfied", rotation_constraints_satisfied},
        {"reflections_violate_constraints", reflections_violate_constraints},
        {"constraint_set_well_formed", constraint_set_well_formed},
        {"point_residual_vanishes", point_residual_vanishes},
        {"line_residual_vanishes", line_residual_vanishes},
        {"translation_recovered", translation_recovered},
        {"sdp_certificate_holds", sdp_certificate_holds},
        {"sdp_lower_bound", sdp_lower_bound},
        {"relaxation_tight", relaxation_tight},
        {"quadric_rank2_round_trip", quadric_rank2_round_trip},
        {"quadric_rank4_round_trip", quadric_rank4_round_trip},
        {"elimination_sign_correct", elimination_sign_correct},
        {"determinant_polynomial_consistent", determinant_polynomial_consistent},
        {"nearest_rotation_projects", nearest_rotation_projects},
    };
    std::vector<CheckResult> results;
    for (const auto &[name, check] : checks) {
        CheckResult r;
        try {
            r = check(options);
        } catch (const std::exception &e) {
            r.passed = false;
            r.detail = std::string("threw: ") + e.what();
        }
        r.name = name;
        results.push_back(std::move(r));
    }
    return results;
}

} // namespace cvxpnpl::cli
