#include "cli.hpp"

#include "input.hpp"
#include "selftest.hpp"

#include "cvxpnpl/error.hpp"
#include "cvxpnpl/recovery.hpp"
#include "cvxpnpl/synth.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace cvxpnpl::cli {

namespace {

struct SolverFlags {
    bool filter_cheirality = false;
    double rank_threshold = kDefaultRankThreshold;
    double sdp_tol = SdpSettings{}.feasibility_tol;
    int sdp_max_iters = SdpSettings{}.max_iterations;

    void add_to(CLI::App &cmd) {
        cmd.add_flag("--filter-cheirality", filter_cheirality, "Drop poses that put a point behind the camera");
        cmd.add_option("--rank-threshold", rank_threshold, "Relative eigenvalue cutoff for the rank of Z")
            ->check(CLI::Range(1e-15, 1.0));
        cmd.add_option("--sdp-tol", sdp_tol, "Feasibility and gap tolerance of the SDP solver")
            ->check(CLI::Range(1e-15, 1.0));
        cmd.add_option("--sdp-max-iters", sdp_max_iters, "Iteration cap of the SDP solver")
            ->check(CLI::Range(1, 100000));
    }

    SolveOptions options() const {
        SolveOptions o;
        o.filter_cheirality = filter_cheirality;
        o.rank_threshold = rank_threshold;
        o.sdp.feasibility_tol = sdp_tol;
        o.sdp.gap_tol = sdp_tol;
        o.sdp.max_iterations = sdp_max_iters;
        return o;
    }
};

void configure_logging(std::ostream &err) {
    auto logger = std::make_shared<spdlog::logger>("cvxpnpl", std::make_shared<spdlog::sinks::stderr_color_sink_mt>());
    logger->set_level(spdlog::level::warn);
    if (const char *env = std::getenv("CVXPNPL_LOG"); env && *env) {
        const std::string name(env);
        const auto level = spdlog::level::from_str(name);
        if (level == spdlog::level::off && name != "off")
            err << "warning: unknown CVXPNPL_LOG level '" << name << "', using warn\n";
        else
            logger->set_level(level);
    }
    spdlog::set_default_logger(std::move(logger));
}

bool is_input_error(ErrorCode code) {
    return code == ErrorCode::InvalidArgument || code == ErrorCode::InsufficientCorrespondences ||
           code == ErrorCode::DegenerateLine;
}

nlohmann::json to_json(const Vec3 &v) { return {v(0), v(1), v(2)}; }

nlohmann::json solution_json(const SolutionSet &set, const std::optional<Pose> &truth) {
    nlohmann::json doc;
    doc["rank"] = set.K;
    doc["sdp"] = {{"status", std::string(to_string(set.sdp_status))},
                  {"iterations", set.sdp_iterations},
                  {"objective", set.sdp_objective},
                  {"gap", set.sdp_gap},
                  {"primal_residual", set.sdp_primal_residual},
                  {"early_stop", set.early_stop}};
    doc["poses"] = nlohmann::json::array();
    for (std::size_t i = 0; i < set.poses.size(); ++i) {
        const Pose &pose = set.poses[i];
        const Mat3 &R = pose.rotation();
        const Eigen::Vector4d q = quaternion_wxyz(R);
        nlohmann::json p;
        p["rotation"] = {to_json(R.row(0).transpose()), to_json(R.row(1).transpose()), to_json(R.row(2).transpose())};
        p["quaternion_wxyz"] = {q(0), q(1), q(2), q(3)};
        p["translation"] = to_json(pose.translation());
        p["residual"] = set.diagnostics[i].residual;
        p["constraint_violation"] = set.diagnostics[i].constraint_violation;
        if (truth) {
            p["rotation_error_deg"] = rotation_error_deg(R, truth->rotation());
            p["translation_error_rel"] = translation_error_rel(pose.translation(), truth->translation());
        }
        doc["poses"].push_back(std::move(p));
    }
    return doc;
}

void print_solution_text(std::ostream &out, const SolutionSet &set, const std::optional<Pose> &truth) {
    out << fmt::format("rank K = {}, {} pose(s)\n", set.K, set.poses.size());
    out << fmt::format("relaxation: {} after {} iterations, objective {:.6e}, gap {:.2e}{}\n",
                       to_string(set.sdp_status), set.sdp_iterations, set.sdp_objective, set.sdp_gap,
                       set.early_stop ? " (early stop)" : "");
    for (std::size_t i = 0; i < set.poses.size(); ++i) {
        const Pose &pose = set.poses[i];
        const Mat3 &R = pose.rotation();
        const Eigen::Vector4d q = quaternion_wxyz(R);
        out << fmt::format("\npose {}\n  rotation\n", i + 1);
        for (int r = 0; r < 3; ++r)
            out << fmt::format("    {:>15.12f} {:>15.12f} {:>15.12f}\n", R(r, 0), R(r, 1), R(r, 2));
        out << fmt::format("  quaternion (w x y z)  {:.12f} {:.12f} {:.12f} {:.12f}\n", q(0), q(1), q(2), q(3));
        const Vec3 &t = pose.translation();
        out << fmt::format("  translation           {:.12f} {:.12f} {:.12f}\n", t(0), t(1), t(2));
        out << fmt::format("  residual {:.3e}, constraint violation {:.3e}\n", set.diagnostics[i].residual,
                           set.diagnostics[i].constraint_violation);
        if (truth)
            out << fmt::format("  vs ground truth: rotation error {:.3e} deg, translation error {:.3e}\n",
                               rotation_error_deg(R, truth->rotation()),
                               translation_error_rel(t, truth->translation()));
    }
}

int cmd_solve(const std::string &path, const std::string &format, const SolverFlags &flags, std::ostream &out,
              std::ostream &err) {
    CorrespondenceInput in;
    try {
        in = load_correspondences(path);
    } catch (const InputError &e) {
        if (e.line() > 0)
            err << path << ':' << e.line() << ": " << e.what() << '\n';
        else
            err << path << ": " << e.what() << '\n';
        return kExitInputError;
    }

    SolutionSet set;
    try {
        set = solve(in.points, in.lines, flags.options());
    } catch (const Error &e) {
        err << path << ": " << e.what() << '\n';
        return is_input_error(e.code()) ? kExitInputError : kExitSolverError;
    }

    if (format == "structured")
        out << solution_json(set, in.ground_truth).dump(2) << '\n';
    else
        print_solution_text(out, set, in.ground_truth);
    return kExitOk;
}

struct BenchFlags {
    int n_points = 10;
    int n_lines = 0;
    std::vector<double> sigmas{0.0};
    int runs = 100;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool timing = false;
    unsigned jobs = 0;
};

int cmd_bench(const BenchFlags &flags, const SolverFlags &solver, std::ostream &out, std::ostream &err) {
    ScenarioConfig cfg;
    cfg.n_points = flags.n_points;
    cfg.n_lines = flags.n_lines;
    cfg.runs = flags.runs;
    cfg.seed = flags.seed;
    cfg.solver = solver.options();

    std::vector<BenchRecord> records;
    std::vector<BenchSummary> summaries;
    try {
        if (flags.sigmas.empty())
            throw Error(ErrorCode::InvalidArgument, "at least one sigma is required");
        for (double sigma : flags.sigmas) {
            cfg.noise_sigma = sigma;
            cfg.validate();
        }
        for (double sigma : flags.sigmas) {
            cfg.noise_sigma = sigma;
            BenchResult result = run_benchmark(cfg, flags.jobs);
            records.insert(records.end(), result.records.begin(), result.records.end());
            summaries.push_back(result.summary);
        }
    } catch (const Error &e) {
        err << "bench: " << e.what() << '\n';
        return is_input_error(e.code()) ? kExitInputError : kExitSolverError;
    }

    if (!flags.out_dir.empty()) {
        const std::filesystem::path dir(flags.out_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        std::ofstream trials(dir / "trials.csv", std::ios::binary);
        std::ofstream summary(dir / "summary.csv", std::ios::binary);
        if (ec || !trials || !summary) {
            err << "bench: cannot write CSV files under " << dir.string() << '\n';
            return kExitInputError;
        }
        write_trials_csv(trials, records, flags.timing);
        write_summary_csv(summary, summaries);
    }
    write_summary_csv(out, summaries);
    return kExitOk;
}

int cmd_selftest(const SelftestOptions &options, std::ostream &out, std::ostream &err) {
    const auto results = run_selftest(options);
    std::size_t width = 5;
    for (const auto &r : results)
        width = std::max(width, r.name.size());
    out << fmt::format("{:<{}}  result  detail\n", "check", width);
    std::vector<std::string> failed;
    for (const auto &r : results) {
        out << fmt::format("{:<{}}  {:<6}  {}\n", r.name, width, r.passed ? "PASS" : "FAIL", r.detail);
        if (!r.passed)
            failed.push_back(r.name);
    }
    out << fmt::format("{}/{} checks passed\n", results.size() - failed.size(), results.size());
    if (failed.empty())
        return kExitOk;
    err << "selftest failed: " << fmt::format("{}", fmt::join(failed, ", ")) << '\n';
    return kExitSelftestFailure;
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    configure_logging(err);

    CLI::App app("Camera pose from point and line correspondences via a semidefinite relaxation", "cvxpnpl");
    app.require_subcommand(1);

    SolverFlags solve_flags;
    std::string path;
    std::string format = "text";
    auto *solve_cmd = app.add_subcommand("solve", "Solve the pose for a correspondence file");
    solve_cmd->add_option("path", path, "YAML correspondence file")->required();
    solve_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "structured"}));
    solve_flags.add_to(*solve_cmd);

    SolverFlags bench_solver;
    BenchFlags bench;
    auto *bench_cmd = app.add_subcommand("bench", "Run the synthetic benchmark");
    bench_cmd->add_option("--n-points", bench.n_points, "Points per scene");
    bench_cmd->add_option("--n-lines", bench.n_lines, "Lines per scene");
    bench_cmd->add_option("--sigma", bench.sigmas, "Pixel noise levels, comma separated")->delimiter(',');
    bench_cmd->add_option("--runs", bench.runs, "Trials per noise level");
    bench_cmd->add_option("--seed", bench.seed, "Seed of the run");
    bench_cmd->add_option("--out", bench.out_dir, "Directory for trials.csv and summary.csv");
    bench_cmd->add_flag("--timing", bench.timing, "Record per-trial solve time (makes output nondeterministic)");
    bench_cmd->add_option("--jobs", bench.jobs, "Worker threads, 0 for all cores");
    bench_solver.add_to(*bench_cmd);

    SelftestOptions selftest;
    auto *selftest_cmd = app.add_subcommand("selftest", "Run the embedded invariant suite");
    selftest_cmd->add_flag("--inject-d-sign-flip", selftest.flip_d_sign)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInputError;
    }

    if (solve_cmd->parsed())
        return cmd_solve(path, format, solve_flags, out, err);
    if (bench_cmd->parsed())
        return cmd_bench(bench, bench_solver, out, err);
    return cmd_selftest(selftest, out, err);
}

} // namespace cvxpnpl::cli
