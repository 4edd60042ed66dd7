#include "input.hpp"

#include "cvxpnpl/constraints.hpp"
#include "cvxpnpl/error.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cvxpnpl::cli {

namespace {

int line_of(const YAML::Node &node) { return node.Mark().line + 1; }

[[noreturn]] void fail(const YAML::Node &node, const std::string &message) {
    throw InputError(message, line_of(node));
}

void check_keys(const YAML::Node &map, const std::set<std::string> &allowed, const std::string &what) {
    for (const auto &kv : map) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key))
            fail(kv.first, "unknown key '" + key + "' in " + what);
    }
}

double number(const YAML::Node &node, const std::string &what) {
    if (!node.IsScalar())
        fail(node, what + " must be a number");
    double v = 0.0;
    if (!YAML::convert<double>::decode(node, v) || !std::isfinite(v))
        fail(node, what + " must be a finite number, got '" + node.Scalar() + "'");
    return v;
}

template <int N> Eigen::Matrix<double, N, 1> vector_of(const YAML::Node &node, const std::string &what) {
    if (!node.IsSequence() || node.size() != static_cast<std::size_t>(N))
        fail(node, what + " must be a list of " + std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i)
        v(i) = number(node[static_cast<std::size_t>(i)], what);
    return v;
}

const YAML::Node require(const YAML::Node &map, const std::string &key, const std::string &what) {
    const YAML::Node child = map[key];
    if (!child)
        fail(map, what + " is missing '" + key + "'");
    return child;
}

CameraIntrinsics parse_intrinsics(const YAML::Node &node) {
    if (!node.IsMap())
        fail(node, "intrinsics must be a mapping");
    check_keys(node, {"fx", "fy", "cx", "cy", "width", "height"}, "intrinsics");
    CameraIntrinsics K;
    K.fx = number(require(node, "fx", "intrinsics"), "fx");
    K.fy = number(require(node, "fy", "intrinsics"), "fy");
    K.cx = number(require(node, "cx", "intrinsics"), "cx");
    K.cy = number(require(node, "cy", "intrinsics"), "cy");
    if (node["width"])
        K.width = static_cast<int>(number(node["width"], "width"));
    if (node["height"])
        K.height = static_cast<int>(number(node["height"], "height"));
    if (!K.valid())
        fail(node, "intrinsics need positive focal lengths and image size");
    return K;
}

// Exactly one of the two observation keys must be present.
std::string observation_key(const YAML::Node &entry, const std::string &pixel_key, const std::string &direct_key,
                            const std::string &what) {
    const bool has_pixel = static_cast<bool>(entry[pixel_key]);
    const bool has_direct = static_cast<bool>(entry[direct_key]);
    if (has_pixel == has_direct)
        fail(entry, what + " needs exactly one of '" + pixel_key + "' or '" + direct_key + "'");
    return has_pixel ? pixel_key : direct_key;
}

PointCorrespondence parse_point(const YAML::Node &entry, const std::optional<CameraIntrinsics> &K) {
    if (!entry.IsMap())
        fail(entry, "point entry must be a mapping");
    check_keys(entry, {"p", "pixel", "bearing"}, "point entry");
    const Vec3 p = vector_of<3>(require(entry, "p", "point entry"), "p");
    const std::string key = observation_key(entry, "pixel", "bearing", "point entry");
    try {
        if (key == "pixel") {
            if (!K)
                fail(entry[key], "pixel observations need intrinsics");
            return {p, bearing_from_pixel(vector_of<2>(entry[key], "pixel"), *K)};
        }
        return {p, vector_of<3>(entry[key], "bearing")};
    } catch (const Error &e) {
        fail(entry[key], e.what());
    }
}

LineCorrespondence parse_line(const YAML::Node &entry, const std::optional<CameraIntrinsics> &K) {
    if (!entry.IsMap())
        fail(entry, "line entry must be a mapping");
    check_keys(entry, {"p1", "p2", "pixels", "normal"}, "line entry");
    const Vec3 p1 = vector_of<3>(require(entry, "p1", "line entry"), "p1");
    const Vec3 p2 = vector_of<3>(require(entry, "p2", "line entry"), "p2");
    const std::string key = observation_key(entry, "pixels", "normal", "line entry");
    const YAML::Node obs = entry[key];
    try {
        if (key == "pixels") {
            if (!K)
                fail(obs, "pixel observations need intrinsics");
            if (!obs.IsSequence() || obs.size() != 2)
                fail(obs, "pixels must be a list of two [u, v] pairs");
            const Vec3 n = normal_from_bearings(bearing_from_pixel(vector_of<2>(obs[0], "pixel"), *K),
                                                bearing_from_pixel(vector_of<2>(obs[1], "pixel"), *K));
            return {p1, p2, n};
        }
        return {p1, p2, vector_of<3>(obs, "normal")};
    } catch (const Error &e) {
        fail(obs, e.what());
    }
}

Pose parse_ground_truth(const YAML::Node &node) {
    if (!node.IsMap())
        fail(node, "ground_truth must be a mapping");
    check_keys(node, {"rotation", "translation"}, "ground_truth");
    const YAML::Node rows = require(node, "rotation", "ground_truth");
    if (!rows.IsSequence() || rows.size() != 3)
        fail(rows, "rotation must be a list of three rows");
    Mat3 R;
    for (std::size_t i = 0; i < 3; ++i)
        R.row(static_cast<Eigen::Index>(i)) = vector_of<3>(rows[i], "rotation row").transpose();
    const Vec3 t = vector_of<3>(require(node, "translation", "ground_truth"), "translation");
    if (!is_rotation(R, 1e-6))
        fail(rows, "ground_truth rotation is not a proper rotation");
    return Pose(nearest_rotation(R), t);
}

const YAML::Node sequence(const YAML::Node &root, const std::string &key) {
    const YAML::Node node = root[key];
    if (node && !node.IsNull() && !node.IsSequence())
        fail(node, key + " must be a list");
    return node;
}

void append(std::ostringstream &out, const double *v, int n) {
    out << '[';
    for (int i = 0; i < n; ++i)
        out << (i ? ", " : "") << format_double(v[i]);
    out << ']';
}

} // namespace

CorrespondenceInput parse_correspondences(const std::string &text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException &e) {
        throw InputError(e.msg, e.mark.line + 1);
    }
    if (!root.IsMap())
        throw InputError("document must be a mapping with 'points' and/or 'lines'", root ? line_of(root) : 1);
    check_keys(root, {"intrinsics", "points", "lines", "ground_truth"}, "document");

    CorrespondenceInput in;
    if (root["intrinsics"])
        in.intrinsics = parse_intrinsics(root["intrinsics"]);
    if (const YAML::Node points = sequence(root, "points"); points && points.IsSequence())
        for (const auto &entry : points)
            in.points.push_back(parse_point(entry, in.intrinsics));
    if (const YAML::Node lines = sequence(root, "lines"); lines && lines.IsSequence())
        for (const auto &entry : lines)
            in.lines.push_back(parse_line(entry, in.intrinsics));
    if (root["ground_truth"])
        in.ground_truth = parse_ground_truth(root["ground_truth"]);

    if (!configuration_supported(in.points.size(), in.lines.size()))
        throw InputError("insufficient correspondences: " + std::to_string(in.points.size()) + " point(s) and " +
                             std::to_string(in.lines.size()) +
                             " line(s); need at least 3 points alone, or 4 correspondences with lines",
                         0);
    return in;
}

CorrespondenceInput load_correspondences(const std::filesystem::path &path) {
    std::ifstream file(path);
    if (!file)
        throw InputError("cannot open " + path.string(), 0);
    std::ostringstream text;
    text << file.rdbuf();
    return parse_correspondences(text.str());
}

std::string emit_correspondences(const Scene &scene, const Observations &obs, const CameraIntrinsics &K) {
    std::ostringstream out;
    out << "intrinsics: {fx: " << format_double(K.fx) << ", fy: " << format_double(K.fy)
        << ", cx: " << format_double(K.cx) << ", cy: " << format_double(K.cy) << ", width: " << K.width
        << ", height: " << K.height << "}\n";
    out << "ground_truth:\n  rotation:\n";
    for (int i = 0; i < 3; ++i) {
        const Vec3 row = scene.truth.rotation().row(i).transpose();
        out << "    - ";
        append(out, row.data(), 3);
        out << '\n';
    }
    out << "  translation: ";
    append(out, scene.truth.translation().data(), 3);
    out << '\n';

    out << "points:" << (scene.points.empty() ? " []" : "") << '\n';
    for (std::size_t i = 0; i < scene.points.size(); ++i) {
        out << "  - {p: ";
        append(out, scene.points[i].data(), 3);
        out << ", pixel: ";
        append(out, obs.points[i].data(), 2);
        out << "}\n";
    }
    out << "lines:" << (scene.lines.empty() ? " []" : "") << '\n';
    for (std::size_t i = 0; i < scene.lines.size(); ++i) {
        out << "  - {p1: ";
        append(out, scene.lines[i].p1.data(), 3);
        out << ", p2: ";
        append(out, scene.lines[i].p2.data(), 3);
        out << ", pixels: [";
        append(out, obs.lines[i][0].data(), 2);
        out << ", ";
        append(out, obs.lines[i][1].data(), 2);
        out << "]}\n";
    }
    return out.str();
}

} // namespace cvxpnpl::cli
