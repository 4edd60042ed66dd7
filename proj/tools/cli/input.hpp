#pragma once

#include "cvxpnpl/geometry.hpp"
#include "cvxpnpl/synth.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvxpnpl::cli {

/// Malformed or invalid correspondence document. `line` is 1-based, 0 when the
/// problem is not tied to one place in the file.
class InputError : public std::runtime_error {
  public:
    InputError(const std::string &message, int line) : std::runtime_error(message), line_(line) {}
    int line() const noexcept { return line_; }

  private:
    int line_;
};

struct CorrespondenceInput {
    std::optional<CameraIntrinsics> intrinsics;
    std::vector<PointCorrespondence> points;
    std::vector<LineCorrespondence> lines;
    std::optional<Pose> ground_truth;
};

/// Parses a YAML correspondence document:
///
///   intrinsics: {fx, fy, cx, cy, width, height}     # optional
///   points: [{p: [x, y, z], pixel: [u, v]} | {p, bearing: [x, y, z]}, ...]
///   lines:  [{p1, p2, pixels: [[u1, v1], [u2, v2]]} | {p1, p2, normal}, ...]
///   ground_truth: {rotation: [[...], [...], [...]], translation: [...]}  # optional
///
/// Throws InputError with the offending line, including when the counts do
/// not form a supported configuration.
CorrespondenceInput parse_correspondences(const std::string &text);
CorrespondenceInput load_correspondences(const std::filesystem::path &path);

/// YAML document for a synthetic scene, pixels at full precision, with the
/// true pose embedded as ground_truth.
std::string emit_correspondences(const Scene &scene, const Observations &obs, const CameraIntrinsics &K);

} // namespace cvxpnpl::cli
