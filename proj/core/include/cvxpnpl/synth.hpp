#pragma once

#include "cvxpnpl/geometry.hpp"
#include "cvxpnpl/recovery.hpp"
#include "cvxpnpl/rng.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cvxpnpl {

struct ScenarioConfig {
    int n_points = 10;
    int n_lines = 0;
    double noise_sigma = 0.0; // pixels
    int runs = 100;
    std::uint64_t seed = 0;
    CameraIntrinsics intrinsics;
    SolveOptions solver;

    /// Throws InvalidArgument for runs < 1, negative sigma, negative counts or
    /// invalid intrinsics, and InsufficientCorrespondences below the minimum
    /// configuration.
    void validate() const;
};

struct Model3dLine {
    Vec3 p1;
    Vec3 p2;
};

/// Pixel observations of a scene: one pixel per point, two per line.
struct Observations {
    std::vector<Vec2> points;
    std::vector<std::array<Vec2, 2>> lines;
};

struct Scene {
    Pose truth;
    std::vector<Vec3> points;
    std::vector<Model3dLine> lines;
    Observations observed;
};

/// Half edge of the model cube and the translation box.
inline constexpr double kModelHalfExtent = 0.3;
inline constexpr std::array<double, 2> kTranslationX{-0.5, 0.5};
inline constexpr std::array<double, 2> kTranslationY{-0.5, 0.5};
inline constexpr std::array<double, 2> kTranslationZ{0.4, 2.0};
inline constexpr int kMaxGenerationAttempts = 1000;

/// Uniform rotation from a normalized 4-vector of standard normals.
Mat3 random_rotation(Rng &rng);

/// Random pose and geometry with every observation in front of the camera and
/// inside the image. Elements that fail are redrawn; a pose that cannot host
/// all of them is redrawn as a whole. Throws GenerationExhausted after
/// kMaxGenerationAttempts poses.
Scene generate_scene(const ScenarioConfig &cfg, Rng &rng);

/// Four lines, each meeting the model z-axis at a right angle. A half turn
/// about that axis maps every line onto itself, so the pose and the pose
/// composed with the half turn explain the observations equally well.
Scene generate_symmetric_line_scene(const CameraIntrinsics &K, Rng &rng);

/// Adds N(0, sigma²) to each pixel coordinate: points first, then both pixels
/// of each line, x before y.
Observations apply_pixel_noise(const Observations &obs, double sigma, Rng &rng);

/// Bearings and plane normals from pixel observations.
std::vector<PointCorrespondence> point_correspondences(const Scene &scene, const Observations &obs,
                                                       const CameraIntrinsics &K);
std::vector<LineCorrespondence> line_correspondences(const Scene &scene, const Observations &obs,
                                                     const CameraIntrinsics &K);

struct BenchRecord {
    int trial = 0;
    int n_points = 0;
    int n_lines = 0;
    double sigma = 0.0;
    double rot_err_deg = 0.0;
    double trans_err_rel = 0.0;
    int rank = 0;
    /// "ok" or the error code that ended the trial.
    std::string status = "ok";
    double solve_ms = 0.0;

    bool ok() const { return status == "ok"; }
};

struct BenchSummary {
    int n_points = 0;
    int n_lines = 0;
    double sigma = 0.0;
    int runs = 0;
    int failures = 0;
    double failure_rate = 0.0;
    /// NaN when every trial failed.
    double median_rot_err_deg = 0.0;
    double median_trans_err_rel = 0.0;
};

struct BenchResult {
    std::vector<BenchRecord> records;
    BenchSummary summary;
};

/// One trial, fully determined by (cfg.seed, trial).
BenchRecord run_trial(const ScenarioConfig &cfg, int trial);

/// Runs cfg.runs trials on `workers` threads (0: hardware concurrency).
/// Records come back in trial order whatever the thread count.
BenchResult run_benchmark(const ScenarioConfig &cfg, unsigned workers = 0);

BenchSummary summarize(const ScenarioConfig &cfg, const std::vector<BenchRecord> &records);

/// Median of the values; NaN for an empty input.
double median(std::vector<double> values);

inline constexpr const char *kTrialsCsvHeader = "trial,n_points,n_lines,sigma,rot_err_deg,trans_err_rel,rank,status,solve_ms";
inline constexpr const char *kSummaryCsvHeader =
    "n_points,n_lines,sigma,runs,failures,failure_rate,median_rot_err_deg,median_trans_err_rel";

/// solve_ms is left empty unless `timing` is set, so that identical seeds give
/// identical bytes. Failed trials leave the error and rank fields empty.
void write_trials_csv(std::ostream &out, const std::vector<BenchRecord> &records, bool timing = false,
                      bool header = true);
void write_summary_csv(std::ostream &out, const std::vector<BenchSummary> &summaries, bool header = true);

/// Shortest round-trip decimal form.
std::string format_double(double value);

} // namespace cvxpnpl
