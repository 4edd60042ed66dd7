#include "cvxpnpl/geometry.hpp"

#include "cvxpnpl/error.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cvxpnpl {

Pose::Pose(const Mat3 &rotation, const Vec3 &translation) : rotation_(rotation), translation_(translation) {
    if (!is_rotation(rotation_))
        throw Error(ErrorCode::InvalidArgument, "pose rotation is not a proper rotation matrix");
    if (!translation_.allFinite())
        throw Error(ErrorCode::InvalidArgument, "pose translation is not finite");
}

Vec9 Pose::r() const { return vec(rotation_); }

Vec10 Pose::r_tilde() const {
    Vec10 out;
    out << vec(rotation_), 1.0;
    return out;
}

bool CameraIntrinsics::valid() const {
    return fx > 0 && fy > 0 && width > 0 && height > 0 && cx > 0 && cx < width && cy > 0 && cy < height;
}

void CameraIntrinsics::validate() const {
    if (!valid())
        throw Error(ErrorCode::InvalidArgument,
                    "camera intrinsics require fx, fy > 0, 0 < cx < width and 0 < cy < height");
}

bool CameraIntrinsics::contains(const Vec2 &pixel) const {
    return pixel.x() >= 0.0 && pixel.y() >= 0.0 && pixel.x() <= width && pixel.y() <= height;
}

PointCorrespondence::PointCorrespondence(const Vec3 &point, const Vec3 &bearing) : p(point) {
    const double norm = bearing.norm();
    if (!(norm > 0.0) || !point.allFinite())
        throw Error(ErrorCode::InvalidArgument, "point bearing must be finite and non-zero");
    u = bearing / norm;
}

LineCorrespondence::LineCorrespondence(const Vec3 &p1, const Vec3 &p2, const Vec3 &normal) : lp1(p1), lp2(p2) {
    const double norm = normal.norm();
    if (!(norm > 0.0) || !p1.allFinite() || !p2.allFinite())
        throw Error(ErrorCode::InvalidArgument, "line normal must be finite and non-zero");
    if (!((p1 - p2).norm() > 0.0))
        throw Error(ErrorCode::DegenerateLine, "3D line endpoints coincide");
    ln = normal / norm;
}

Mat3 skew(const Vec3 &v) {
    Mat3 out;
    out << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
    return out;
}

Vec9 vec(const Mat3 &m) { return Eigen::Map<const Vec9>(m.data()); }

Mat3 unvec(const Eigen::Ref<const Vec9> &v) {
    Vec9 copy = v;
    return Eigen::Map<const Mat3>(copy.data());
}

Vec3 bearing_from_pixel(const Vec2 &pixel, const CameraIntrinsics &K) {
    return Vec3((pixel.x() - K.cx) / K.fx, (pixel.y() - K.cy) / K.fy, 1.0).normalized();
}

Vec2 project(const Vec3 &x, const CameraIntrinsics &K) {
    return Vec2(K.fx * x.x() / x.z() + K.cx, K.fy * x.y() / x.z() + K.cy);
}

Vec3 normal_from_bearings(const Vec3 &u1, const Vec3 &u2) {
    const Vec3 n = u1.cross(u2);
    const double norm = n.norm();
    if (norm < 1e-10)
        throw Error(ErrorCode::DegenerateLine, "line bearings are parallel, the 2D segment collapses to a point");
    return n / norm;
}

Mat3 nearest_rotation(const Mat3 &m) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat3 &U = svd.matrixU();
    const Mat3 &V = svd.matrixV();
    Mat3 D = Mat3::Identity();
    D(2, 2) = (U * V.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    return U * D * V.transpose();
}

bool is_rotation(const Mat3 &m, double tol) {
    if (!m.allFinite())
        return false;
    return (m.transpose() * m - Mat3::Identity()).norm() <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

double rotation_error_deg(const Mat3 &R_est, const Mat3 &R_gt) {
    // atan2 keeps full relative accuracy for small angles, where acos of the
    // trace bottoms out near 1e-6 degrees.
    const Mat3 M = R_est.transpose() * R_gt;
    const double s = 0.5 * Vec3(M(2, 1) - M(1, 2), M(0, 2) - M(2, 0), M(1, 0) - M(0, 1)).norm();
    const double c = 0.5 * (M.trace() - 1.0);
    return std::atan2(s, c) * 180.0 / std::numbers::pi;
}

double translation_error_rel(const Vec3 &t_est, const Vec3 &t_gt) {
    const double denom = t_gt.norm();
    if (denom < 1e-12)
        throw Error(ErrorCode::ZeroGroundTruth, "ground-truth translation has zero norm");
    return (t_est - t_gt).norm() / denom;
}

Eigen::Vector4d quaternion_wxyz(const Mat3 &R) {
    Eigen::Quaterniond q(R);
    q.normalize();
    if (q.w() < 0.0)
        q.coeffs() = -q.coeffs();
    return {q.w(), q.x(), q.y(), q.z()};
}

} // namespace cvxpnpl
