#pragma once

// Pinhole camera model, projection, distortion and ray construction.
//
// Conventions used throughout the project:
//  * CameraPose::R is the camera-to-world orientation and CameraPose::t is the
//    camera position in the world frame, so a world point X lands at
//    R^T (X - t) in the camera frame.
//  * Pixels have their origin at the top-left corner, u to the right, v down.
//  * Distortion is Brown-Conrady (k1, k2, p1, p2[, k3]) applied to normalized
//    image coordinates before K.

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <span>
#include <utility>
#include <vector>

namespace gaitanno {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Point3 = Eigen::Vector3d;

struct Pixel {
  double u = 0.0;
  double v = 0.0;

  Vec2 vec() const { return {u, v}; }
  static Pixel from(const Vec2& p) { return {p.x(), p.y()}; }
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double skew = 0.0;
  std::vector<double> dist;  // empty, or (k1, k2, p1, p2[, k3])

  Mat3 K() const;
  Mat3 K_inverse() const;
  // Throws InvalidArgument for non-positive focal lengths or non-finite values
  // and UnsupportedModel for a distortion vector whose length is not 0, 4 or 5.
  void validate() const;

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

struct CameraPose {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  bool is_valid(double tol = 1e-9) const;
  friend bool operator==(const CameraPose& a, const CameraPose& b) {
    return a.R == b.R && a.t == b.t;
  }
};

struct Ray {
  Point3 origin = Point3::Zero();
  Vec3 direction = Vec3::UnitZ();  // not necessarily unit length
};

// Elevation/azimuth description of a camera that looks towards the world
// origin from `position`.
struct SphericalExtrinsic {
  double theta_e = 0.0;
  double theta_a = 0.0;
  Point3 position = Point3::Zero();
};

inline constexpr double kDepthEpsilon = 1e-9;

bool is_rotation(const Mat3& R, double tol = 1e-9);
Mat3 skew(const Vec3& w);
Mat3 so3_exp(const Vec3& w);
Vec3 so3_log(const Mat3& R);
// Geodesic angle between two rotations, radians.
double rotation_distance(const Mat3& a, const Mat3& b);

Vec2 apply_distortion(const Vec2& normalized, std::span<const double> dist);
// d(distorted)/d(normalized).
Eigen::Matrix2d distortion_jacobian(const Vec2& normalized, std::span<const double> dist);
// Fixed-point inverse of apply_distortion: at most 10 iterations, stops once the
// update falls below 1e-10.
Vec2 remove_distortion(const Vec2& distorted, std::span<const double> dist);

Vec3 to_camera(const Point3& p, const CameraPose& pose);
// Camera-frame point to pixel. Throws PointBehindCamera for depth <= 1e-9.
Pixel project_camera_point(const Vec3& pc, const CameraIntrinsics& intr);
Pixel project(const Point3& p, const CameraIntrinsics& intr, const CameraPose& pose);

Ray pixel_ray(const Pixel& p, const CameraIntrinsics& intr, const CameraPose& pose);

// Projection together with its derivatives. The pose derivative is taken
// with respect to the local increment (w, dt) applied as
// R <- R * exp(w), t <- t + dt, columns ordered (w, dt).
struct ProjectionJacobian {
  Pixel pixel;
  Eigen::Matrix<double, 2, 6> d_pose;
  Eigen::Matrix<double, 2, 3> d_point;
};
ProjectionJacobian project_with_jacobian(const Point3& p, const CameraIntrinsics& intr,
                                         const CameraPose& pose);

// Applies a local increment (w, dt) to a pose, matching project_with_jacobian.
CameraPose retract(const CameraPose& pose, const Eigen::Matrix<double, 6, 1>& delta);

// R = Rz(theta_a) * Rx(theta_e).
Mat3 rotation_from_angles(double theta_e, double theta_a);

// Orientation of a camera at `t` assumed to look at the world origin, built
// from its elevation and azimuth angles:
//   theta_e = pi/2 - atan2(t_z, sqrt(t_x^2 + t_y^2))
//   theta_a = pi/2 - atan2(t_y, t_x)
// This only looks exactly at the origin for positions on the +Y axis; use
// look_at for an exact construction elsewhere. Throws ZeroPosition when |t| < 1e-12.
std::pair<CameraPose, SphericalExtrinsic> rotation_from_position(const Point3& t);

// Exact look-at pose. `image_down` is the world direction that should appear
// pointing down the image; the default (+Z) matches rotation_from_position on
// the +Y axis. Throws InvalidArgument if the viewing direction is parallel to
// image_down or position == target.
CameraPose look_at(const Point3& position, const Point3& target = Point3::Zero(),
                   const Vec3& image_down = Vec3::UnitZ());

// Distance from a point to the infinite line carrying a ray.
double point_ray_distance(const Point3& p, const Ray& ray);

}  // namespace gaitanno
