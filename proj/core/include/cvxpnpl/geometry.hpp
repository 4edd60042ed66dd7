#pragma once

#include <Eigen/Core>

namespace cvxpnpl {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Vec10 = Eigen::Matrix<double, 10, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat10 = Eigen::Matrix<double, 10, 10>;

/// Rigid transform from the object frame to the camera frame: x_cam = R x_obj + t.
///
/// The constructor rejects matrices that are not proper rotations within
/// `kRotationTolerance` (Frobenius norm of RᵀR − I and |det R − 1|).
class Pose {
  public:
    static constexpr double kRotationTolerance = 1e-9;

    Pose() = default;
    Pose(const Mat3 &rotation, const Vec3 &translation);

    const Mat3 &rotation() const { return rotation_; }
    const Vec3 &translation() const { return translation_; }

    /// Column-major vectorization vec(R).
    Vec9 r() const;
    /// Homogenized [vec(R); 1].
    Vec10 r_tilde() const;

    Vec3 transform(const Vec3 &x) const { return rotation_ * x + translation_; }

  private:
    Mat3 rotation_ = Mat3::Identity();
    Vec3 translation_ = Vec3::Zero();
};

struct CameraIntrinsics {
    double fx = 525.0;
    double fy = 525.0;
    double cx = 319.5;
    double cy = 239.5;
    int width = 640;
    int height = 480;

    /// Published Kinect v1 calibration; the default for synthetic scenes.
    static CameraIntrinsics kinect_v1() { return {}; }

    bool valid() const;
    /// Throws InvalidArgument when `valid()` is false.
    void validate() const;

    bool contains(const Vec2 &pixel) const;
};

/// 3D point in the object frame paired with a unit bearing in the camera frame.
struct PointCorrespondence {
    Vec3 p;
    Vec3 u;

    /// Normalizes `bearing`; throws InvalidArgument on a zero bearing.
    PointCorrespondence(const Vec3 &point, const Vec3 &bearing);
};

/// 3D segment endpoints in the object frame paired with the unit normal of the
/// interpretation plane (camera center + observed 2D line) in the camera frame.
struct LineCorrespondence {
    Vec3 lp1;
    Vec3 lp2;
    Vec3 ln;

    /// Normalizes `normal`; throws InvalidArgument on a zero normal and
    /// DegenerateLine when the endpoints coincide.
    LineCorrespondence(const Vec3 &p1, const Vec3 &p2, const Vec3 &normal);
};

/// ⌊v⌋×, so that skew(v) * w == v.cross(w).
Mat3 skew(const Vec3 &v);

Vec9 vec(const Mat3 &m);
Mat3 unvec(const Eigen::Ref<const Vec9> &v);

Vec3 bearing_from_pixel(const Vec2 &pixel, const CameraIntrinsics &K);
/// Pinhole projection of a camera-frame point. Requires x.z() != 0.
Vec2 project(const Vec3 &x, const CameraIntrinsics &K);

/// Unit normal of the plane through the origin containing both bearings.
/// Throws DegenerateLine when ‖u1 × u2‖ < 1e-10.
Vec3 normal_from_bearings(const Vec3 &u1, const Vec3 &u2);

/// Frobenius-nearest proper rotation, U diag(1, 1, det(UVᵀ)) Vᵀ.
Mat3 nearest_rotation(const Mat3 &m);

bool is_rotation(const Mat3 &m, double tol = Pose::kRotationTolerance);

/// Angle of R_estᵀ R_gt in degrees, in [0, 180].
double rotation_error_deg(const Mat3 &R_est, const Mat3 &R_gt);

/// ‖t_est − t_gt‖ / ‖t_gt‖. Throws ZeroGroundTruth when ‖t_gt‖ < 1e-12.
double translation_error_rel(const Vec3 &t_est, const Vec3 &t_gt);

/// Unit quaternion (w, x, y, z) of a rotation, with w >= 0.
Eigen::Vector4d quaternion_wxyz(const Mat3 &R);

} // namespace cvxpnpl
