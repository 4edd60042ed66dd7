#include "cvxpnpl/synth.hpp"

#include "cvxpnpl/constraints.hpp"
#include "cvxpnpl/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <thread>

namespace cvxpnpl {

namespace {

constexpr int kElementRetries = 100;
// Minimum camera-frame depth for an observation to count as visible.
constexpr double kMinDepth = 1e-6;

Vec3 random_model_point(Rng &rng) {
    return {rng.uniform(-kModelHalfExtent, kModelHalfExtent), rng.uniform(-kModelHalfExtent, kModelHalfExtent),
            rng.uniform(-kModelHalfExtent, kModelHalfExtent)};
}

Vec3 random_translation(Rng &rng) {
    return {rng.uniform(kTranslationX[0], kTranslationX[1]), rng.uniform(kTranslationY[0], kTranslationY[1]),
            rng.uniform(kTranslationZ[0], kTranslationZ[1])};
}

bool observe(const Pose &pose, const Vec3 &p, const CameraIntrinsics &K, Vec2 &pixel) {
    const Vec3 x = pose.transform(p);
    if (!(x.z() > kMinDepth))
        return false;
    pixel = project(x, K);
    return K.contains(pixel);
}

bool observe_line(const Pose &pose, const Model3dLine &line, const CameraIntrinsics &K, std::array<Vec2, 2> &pixels) {
    if (!observe(pose, line.p1, K, pixels[0]) || !observe(pose, line.p2, K, pixels[1]))
        return false;
    // The interpretation plane needs two distinct viewing rays.
    const Vec3 b1 = bearing_from_pixel(pixels[0], K);
    const Vec3 b2 = bearing_from_pixel(pixels[1], K);
    return b1.cross(b2).norm() >= 1e-6;
}

} // namespace

void ScenarioConfig::validate() const {
    if (runs < 1)
        throw Error(ErrorCode::InvalidArgument, "runs must be at least 1");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
        throw Error(ErrorCode::InvalidArgument, "noise sigma must be finite and non-negative");
    if (n_points < 0 || n_lines < 0)
        throw Error(ErrorCode::InvalidArgument, "correspondence counts must be non-negative");
    intrinsics.validate();
    if (!configuration_supported(static_cast<std::size_t>(n_points), static_cast<std::size_t>(n_lines)))
        throw Error(ErrorCode::InsufficientCorrespondences,
                    "insufficient correspondences: need n >= 3 points alone, or n + m >= 4 with lines");
}

Mat3 random_rotation(Rng &rng) {
    Eigen::Quaterniond q;
    do {
        q = Eigen::Quaterniond(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    } while (q.norm() < 1e-12);
    q.normalize();
    return q.toRotationMatrix();
}

Scene generate_scene(const ScenarioConfig &cfg, Rng &rng) {
    const CameraIntrinsics &K = cfg.intrinsics;
    for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
        Scene scene;
        scene.truth = Pose(random_rotation(rng), random_translation(rng));
        bool complete = true;
        for (int i = 0; i < cfg.n_points && complete; ++i) {
            complete = false;
            for (int r = 0; r < kElementRetries; ++r) {
                const Vec3 p = random_model_point(rng);
                Vec2 pixel;
                if (observe(scene.truth, p, K, pixel)) {
                    scene.points.push_back(p);
                    scene.observed.points.push_back(pixel);
                    complete = true;
                    break;
                }
            }
        }
        for (int i = 0; i < cfg.n_lines && complete; ++i) {
            complete = false;
            for (int r = 0; r < kElementRetries; ++r) {
                const Model3dLine line{random_model_point(rng), random_model_point(rng)};
                std::array<Vec2, 2> pixels;
                if ((line.p1 - line.p2).norm() > 1e-9 && observe_line(scene.truth, line, K, pixels)) {
                    scene.lines.push_back(line);
                    scene.observed.lines.push_back(pixels);
                    complete = true;
                    break;
                }
            }
        }
        if (complete)
            return scene;
    }
    throw Error(ErrorCode::GenerationExhausted,
                "no visible scene after " + std::to_string(kMaxGenerationAttempts) + " attempts");
}

Scene generate_symmetric_line_scene(const CameraIntrinsics &K, Rng &rng) {
    for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
        Scene scene;
        scene.truth = Pose(random_rotation(rng), random_translation(rng));
        bool complete = true;
        for (int i = 0; i < 4 && complete; ++i) {
            const double z = rng.uniform(-kModelHalfExtent, kModelHalfExtent);
            const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double half = rng.uniform(0.1, kModelHalfExtent);
            const Vec3 centre(0.0, 0.0, z);
            const Vec3 dir(std::cos(angle), std::sin(angle), 0.0);
            const Model3dLine line{centre - half * dir, centre + half * dir};
            std::array<Vec2, 2> pixels;
            complete = observe_line(scene.truth, line, K, pixels);
            if (complete) {
                scene.lines.push_back(line);
                scene.observed.lines.push_back(pixels);
            }
        }
        if (complete)
            return scene;
    }
    throw Error(ErrorCode::GenerationExhausted,
                "no visible symmetric line scene after " + std::to_string(kMaxGenerationAttempts) + " attempts");
}

Observations apply_pixel_noise(const Observations &obs, double sigma, Rng &rng) {
    if (!(sigma >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "noise sigma must be non-negative");
    Observations out = obs;
    if (sigma == 0.0)
        return out;
    for (Vec2 &px : out.points) {
        px.x() += rng.normal(0.0, sigma);
        px.y() += rng.normal(0.0, sigma);
    }
    for (auto &pair : out.lines)
        for (Vec2 &px : pair) {
            px.x() += rng.normal(0.0, sigma);
            px.y() += rng.normal(0.0, sigma);
        }
    return out;
}

std::vector<PointCorrespondence> point_correspondences(const Scene &scene, const Observations &obs,
                                                       const CameraIntrinsics &K) {
    std::vector<PointCorrespondence> out;
    out.reserve(scene.points.size());
    for (std::size_t i = 0; i < scene.points.size(); ++i)
        out.emplace_back(scene.points[i], bearing_from_pixel(obs.points[i], K));
    return out;
}

std::vector<LineCorrespondence> line_correspondences(const Scene &scene, const Observations &obs,
                                                     const CameraIntrinsics &K) {
    std::vector<LineCorrespondence> out;
    out.reserve(scene.lines.size());
    for (std::size_t i = 0; i < scene.lines.size(); ++i) {
        const Vec3 n =
            normal_from_bearings(bearing_from_pixel(obs.lines[i][0], K), bearing_from_pixel(obs.lines[i][1], K));
        out.emplace_back(scene.lines[i].p1, scene.lines[i].p2, n);
    }
    return out;
}

BenchRecord run_trial(const ScenarioConfig &cfg, int trial) {
    BenchRecord rec;
    rec.trial = trial;
    rec.n_points = cfg.n_points;
    rec.n_lines = cfg.n_lines;
    rec.sigma = cfg.noise_sigma;
    Rng rng(trial_seed(cfg.seed, static_cast<std::uint64_t>(trial)));
    try {
        const Scene scene = generate_scene(cfg, rng);
        const Observations noisy = apply_pixel_noise(scene.observed, cfg.noise_sigma, rng);
        const auto points = point_correspondences(scene, noisy, cfg.intrinsics);
        const auto lines = line_correspondences(scene, noisy, cfg.intrinsics);

        const auto start = std::chrono::steady_clock::now();
        const SolutionSet set = solve(points, lines, cfg.solver);
        rec.solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

        // Ambiguous sets are scored by the candidate closest to the truth.
        rec.rot_err_deg = std::numeric_limits<double>::infinity();
        for (const Pose &pose : set.poses) {
            const double err = rotation_error_deg(pose.rotation(), scene.truth.rotation());
            if (err < rec.rot_err_deg) {
                rec.rot_err_deg = err;
                rec.trans_err_rel = translation_error_rel(pose.translation(), scene.truth.translation());
            }
        }
        rec.rank = set.K;
    } catch (const Error &e) {
        rec.status = std::string(to_string(e.code()));
    }
    return rec;
}

BenchResult run_benchmark(const ScenarioConfig &cfg, unsigned workers) {
    cfg.validate();
    if (workers == 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(cfg.runs));

    BenchResult result;
    result.records.resize(static_cast<std::size_t>(cfg.runs));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i = next++; i < cfg.runs; i = next++)
            result.records[static_cast<std::size_t>(i)] = run_trial(cfg, i);
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(work);
    }
    result.summary = summarize(cfg, result.records);
    return result;
}

double median(std::vector<double> values) {
    if (values.empty())
        return std::numeric_limits<double>::quiet_NaN();
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    if (values.size() % 2 == 1)
        return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(values.begin(), mid);
    return 0.5 * (lower + upper);
}

BenchSummary summarize(const ScenarioConfig &cfg, const std::vector<BenchRecord> &records) {
    BenchSummary s;
    s.n_points = cfg.n_points;
    s.n_lines = cfg.n_lines;
    s.sigma = cfg.noise_sigma;
    s.runs = static_cast<int>(records.size());
    std::vector<double> rot, trans;
    for (const auto &r : records) {
        if (!r.ok()) {
            ++s.failures;
            continue;
        }
        rot.push_back(r.rot_err_deg);
        trans.push_back(r.trans_err_rel);
    }
    s.failure_rate = s.runs > 0 ? static_cast<double>(s.failures) / s.runs : 0.0;
    s.median_rot_err_deg = median(std::move(rot));
    s.median_trans_err_rel = median(std::move(trans));
    return s;
}

std::string format_double(double value) {
    if (std::isnan(value))
        return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void write_trials_csv(std::ostream &out, const std::vector<BenchRecord> &records, bool timing, bool header) {
    if (header)
        out << kTrialsCsvHeader << '\n';
    for (const auto &r : records) {
        out << r.trial << ',' << r.n_points << ',' << r.n_lines << ',' << format_double(r.sigma) << ',';
        if (r.ok())
            out << format_double(r.rot_err_deg) << ',' << format_double(r.trans_err_rel) << ',' << r.rank;
        else
            out << ",,";
        out << ',' << r.status << ',';
        if (timing)
            out << format_double(r.solve_ms);
        out << '\n';
    }
}

void write_summary_csv(std::ostream &out, const std::vector<BenchSummary> &summaries, bool header) {
    if (header)
        out << kSummaryCsvHeader << '\n';
    for (const auto &s : summaries)
        out << s.n_points << ',' << s.n_lines << ',' << format_double(s.sigma) << ',' << s.runs << ',' << s.failures
            << ',' << format_double(s.failure_rate) << ',' << format_double(s.median_rot_err_deg) << ','
            << format_double(s.median_trans_err_rel) << '\n';
}

} // namespace cvxpnpl
