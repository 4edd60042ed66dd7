#include "cli.hpp"
#include "input.hpp"
#include "selftest.hpp"

#include "cvxpnpl/synth.hpp"
#include "support.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace cvxpnpl;
namespace fs = std::filesystem;

namespace {

const fs::path kData = CVXPNPL_TEST_DATA;

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "cvxpnpl");
    std::vector<const char *> argv;
    for (const auto &a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string data(const std::string &name) { return (kData / name).string(); }

} // namespace

TEST(Input, ReportsLineOfMalformedEntry) {
    try {
        cli::load_correspondences(data("malformed.yaml"));
        FAIL();
    } catch (const cli::InputError &e) {
        EXPECT_EQ(e.line(), 4);
        EXPECT_NE(std::string(e.what()).find("p must be a list of 3 numbers"), std::string::npos);
    }
}

TEST(Input, RejectsUnknownKeysAndMissingObservations) {
    auto line_of = [](const std::string &text) {
        try {
            cli::parse_correspondences(text);
        } catch (const cli::InputError &e) {
            return e.line();
        }
        return -1;
    };
    EXPECT_EQ(line_of("points:\n  - {p: [0, 0, 0], bearing: [0, 0, 1]}\nextra: 1\n"), 3);
    EXPECT_EQ(line_of("points:\n  - {p: [0, 0, 0]}\n"), 2);
    EXPECT_EQ(line_of("points:\n  - {p: [0, 0, 0], bearing: [0, 0, 1], pixel: [1, 2]}\n"), 2);
    EXPECT_EQ(line_of("points:\n  - {p: [0, 0, x], bearing: [0, 0, 1]}\n"), 2);
    EXPECT_EQ(line_of("points: [\n"), 2);
    EXPECT_EQ(line_of("points:\n  - {p: [0, 0, 0], bearing: [0, 0, 0]}\n"), 2);
}

TEST(Input, BearingsAndPixelsAgree) {
    ScenarioConfig cfg;
    cfg.n_points = 4;
    cfg.n_lines = 3;
    Rng rng(120);
    const Scene scene = generate_scene(cfg, rng);
    const cli::CorrespondenceInput in =
        cli::parse_correspondences(cli::emit_correspondences(scene, scene.observed, cfg.intrinsics));
    ASSERT_TRUE(in.intrinsics && in.ground_truth);
    const auto pts = point_correspondences(scene, scene.observed, cfg.intrinsics);
    const auto lns = line_correspondences(scene, scene.observed, cfg.intrinsics);
    ASSERT_EQ(in.points.size(), pts.size());
    ASSERT_EQ(in.lines.size(), lns.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        EXPECT_EQ(in.points[i].p, pts[i].p);
        EXPECT_LT((in.points[i].u - pts[i].u).norm(), 1e-15);
    }
    for (std::size_t i = 0; i < lns.size(); ++i)
        EXPECT_LT((in.lines[i].ln - lns[i].ln).norm(), 1e-15);
    EXPECT_LT((in.ground_truth->rotation() - scene.truth.rotation()).norm(), 1e-15);
}

TEST(Cli, SolveText) {
    const CliRun r = run_cli({"solve", data("ten_points.yaml")});
    EXPECT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_NE(r.out.find("rank K = 1, 1 pose(s)"), std::string::npos);
    EXPECT_NE(r.out.find("vs ground truth"), std::string::npos);
}

TEST(Cli, SolveStructuredMatchesTruth) {
    for (const char *file : {"ten_points.yaml", "six_lines.yaml", "mixed_noisy.yaml"}) {
        const CliRun r = run_cli({"solve", data(file), "--format", "structured"});
        ASSERT_EQ(r.code, cli::kExitOk) << file << r.err;
        const auto doc = nlohmann::json::parse(r.out);
        ASSERT_FALSE(doc["poses"].empty());
        const auto &pose = doc["poses"][0];
        const double tolerance = std::string(file) == "mixed_noisy.yaml" ? 5.0 : 1e-5;
        EXPECT_LT(pose["rotation_error_deg"].get<double>(), tolerance) << file;
        const auto q = pose["quaternion_wxyz"].get<std::vector<double>>();
        ASSERT_EQ(q.size(), 4u);
        EXPECT_GE(q[0], 0.0);
        EXPECT_EQ(doc["sdp"]["status"], "Optimal");
    }
}

TEST(Cli, CheiralityFilterKeepsSubset) {
    const CliRun all = run_cli({"solve", data("p3p.yaml"), "--format", "structured"});
    const CliRun front = run_cli({"solve", data("p3p.yaml"), "--format", "structured", "--filter-cheirality"});
    ASSERT_EQ(all.code, 0) << all.err;
    ASSERT_EQ(front.code, 0) << front.err;
    const auto a = nlohmann::json::parse(all.out)["poses"];
    const auto f = nlohmann::json::parse(front.out)["poses"];
    EXPECT_EQ(a.size(), 4u);
    EXPECT_EQ(f.size(), 2u);
    for (const auto &pose : f) {
        bool found = false;
        for (const auto &candidate : a)
            found = found || candidate["rotation"] == pose["rotation"];
        EXPECT_TRUE(found);
    }
}

TEST(Cli, BearingInputWithoutIntrinsics) {
    const CliRun r = run_cli({"solve", data("ten_bearings.yaml")});
    EXPECT_EQ(r.code, cli::kExitOk) << r.err;
}

TEST(Cli, InputErrorsExitTwo) {
    const CliRun malformed = run_cli({"solve", data("malformed.yaml")});
    EXPECT_EQ(malformed.code, cli::kExitInputError);
    EXPECT_NE(malformed.err.find("malformed.yaml:4:"), std::string::npos) << malformed.err;
    EXPECT_EQ(run_cli({"solve", data("insufficient.yaml")}).code, cli::kExitInputError);
    EXPECT_EQ(run_cli({"solve", data("missing_intrinsics.yaml")}).code, cli::kExitInputError);
    EXPECT_EQ(run_cli({"solve", data("does_not_exist.yaml")}).code, cli::kExitInputError);
    EXPECT_EQ(run_cli({"solve", data("ten_points.yaml"), "--format", "xml"}).code, cli::kExitInputError);
    EXPECT_EQ(run_cli({"bench", "--runs", "0"}).code, cli::kExitInputError);
    EXPECT_EQ(run_cli({"bench", "--n-points", "2"}).code, cli::kExitInputError);
    EXPECT_EQ(run_cli({"bench", "--sigma", "-1"}).code, cli::kExitInputError);
    EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitInputError);
}

TEST(Cli, SolverErrorsExitThree) {
    // A single iteration cannot reach the tolerance contract.
    const CliRun r = run_cli({"solve", data("ten_points.yaml"), "--sdp-max-iters", "1"});
    EXPECT_EQ(r.code, cli::kExitSolverError) << r.out;
}

TEST(Cli, BenchWritesCsvFiles) {
    const fs::path dir = fs::temp_directory_path() / "cvxpnpl_test_cli_bench";
    fs::remove_all(dir);
    const CliRun r = run_cli({"bench", "--n-points", "6", "--sigma", "0,1", "--runs", "5", "--seed", "3", "--out",
                           dir.string(), "--jobs", "2"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    std::ifstream summary(dir / "summary.csv");
    std::stringstream text;
    text << summary.rdbuf();
    EXPECT_EQ(text.str(), r.out);
    EXPECT_EQ(r.out.rfind(kSummaryCsvHeader, 0), 0u);
    std::ifstream trials(dir / "trials.csv");
    int lines = 0;
    for (std::string line; std::getline(trials, line);)
        ++lines;
    EXPECT_EQ(lines, 1 + 2 * 5);
    fs::remove_all(dir);
}

TEST(Selftest, AllChecksPass) {
    const auto results = cli::run_selftest({});
    EXPECT_GE(results.size(), 10u);
    for (const auto &check : results)
        EXPECT_TRUE(check.passed) << check.name << ": " << check.detail;
    EXPECT_EQ(run_cli({"selftest"}).code, cli::kExitOk);
}

TEST(Selftest, SignFlipIsCaught) {
    const CliRun r = run_cli({"selftest", "--inject-d-sign-flip"});
    EXPECT_EQ(r.code, cli::kExitSelftestFailure);
    EXPECT_NE(r.out.find("elimination_sign_correct"), std::string::npos);
}
