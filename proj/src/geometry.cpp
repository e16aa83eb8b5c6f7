#include "gaitanno/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gaitanno/error.hpp"

namespace gaitanno {
namespace {

struct DistortionCoeffs {
  double k1 = 0, k2 = 0, p1 = 0, p2 = 0, k3 = 0;
};

DistortionCoeffs unpack(std::span<const double> dist) {
  DistortionCoeffs c;
  if (dist.empty()) return c;
  if (dist.size() != 4 && dist.size() != 5) {
    fail(ErrorKind::UnsupportedModel,
         "distortion vector must have 0, 4 or 5 coefficients, got " + std::to_string(dist.size()));
  }
  c.k1 = dist[0];
  c.k2 = dist[1];
  c.p1 = dist[2];
  c.p2 = dist[3];
  if (dist.size() == 5) c.k3 = dist[4];
  return c;
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

Mat3 CameraIntrinsics::K() const {
  Mat3 K;
  K << fx, skew, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return K;
}

Mat3 CameraIntrinsics::K_inverse() const {
  Mat3 Ki;
  Ki << 1.0 / fx, -skew / (fx * fy), (skew * cy - cx * fy) / (fx * fy),
      0.0, 1.0 / fy, -cy / fy,
      0.0, 0.0, 1.0;
  return Ki;
}

void CameraIntrinsics::validate() const {
  if (!(finite(fx) && finite(fy) && finite(cx) && finite(cy) && finite(skew))) {
    fail(ErrorKind::InvalidArgument, "intrinsics contain non-finite values");
  }
  if (fx <= 0.0 || fy <= 0.0) {
    fail(ErrorKind::InvalidArgument, "focal lengths must be positive");
  }
  unpack(dist);
  for (double d : dist) {
    if (!finite(d)) fail(ErrorKind::InvalidArgument, "distortion coefficient is not finite");
  }
}

bool is_rotation(const Mat3& R, double tol) {
  if (!R.allFinite()) return false;
  const Mat3 err = R.transpose() * R - Mat3::Identity();
  if (err.cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(R.determinant() - 1.0) <= tol;
}

bool CameraPose::is_valid(double tol) const { return t.allFinite() && is_rotation(R, tol); }

Mat3 skew(const Vec3& w) {
  Mat3 S;
  S << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return S;
}

Mat3 so3_exp(const Vec3& w) {
  const double angle = w.norm();
  if (angle == 0.0) {
    return Mat3::Identity();
  }
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

Vec3 so3_log(const Mat3& R) {
  const Eigen::AngleAxisd aa(R);
  return aa.angle() * aa.axis();
}

double rotation_distance(const Mat3& a, const Mat3& b) {
  const Mat3 d = a.transpose() * b;
  const Vec3 v(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
  const double s = 0.5 * v.norm();
  const double c = 0.5 * (d.trace() - 1.0);
  return std::atan2(s, c);
}

Vec2 apply_distortion(const Vec2& n, std::span<const double> dist) {
  if (dist.empty()) {
    return n;
  }
  const DistortionCoeffs c = unpack(dist);
  const double x = n.x();
  const double y = n.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (c.k1 + r2 * (c.k2 + r2 * c.k3));
  return {x * radial + 2.0 * c.p1 * x * y + c.p2 * (r2 + 2.0 * x * x),
          y * radial + c.p1 * (r2 + 2.0 * y * y) + 2.0 * c.p2 * x * y};
}

Eigen::Matrix2d distortion_jacobian(const Vec2& n, std::span<const double> dist) {
  if (dist.empty()) {
    return Eigen::Matrix2d::Identity();
  }
  const DistortionCoeffs c = unpack(dist);
  const double x = n.x();
  const double y = n.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (c.k1 + r2 * (c.k2 + r2 * c.k3));
  // d(radial)/dx = dr * x, d(radial)/dy = dr * y
  const double dr = 2.0 * c.k1 + 4.0 * c.k2 * r2 + 6.0 * c.k3 * r2 * r2;
  Eigen::Matrix2d J;
  J(0, 0) = radial + dr * x * x + 2.0 * c.p1 * y + 6.0 * c.p2 * x;
  J(0, 1) = dr * x * y + 2.0 * c.p1 * x + 2.0 * c.p2 * y;
  J(1, 0) = dr * x * y + 2.0 * c.p1 * x + 2.0 * c.p2 * y;
  J(1, 1) = radial + dr * y * y + 6.0 * c.p1 * y + 2.0 * c.p2 * x;
  return J;
}

Vec2 remove_distortion(const Vec2& distorted, std::span<const double> dist) {
  if (dist.empty()) {
    return distorted;
  }
  const DistortionCoeffs c = unpack(dist);
  Vec2 n = distorted;
  for (int iter = 0; iter < 10; ++iter) {
    const double x = n.x();
    const double y = n.y();
    const double r2 = x * x + y * y;
    const double radial = 1.0 + r2 * (c.k1 + r2 * (c.k2 + r2 * c.k3));
    const double dx = 2.0 * c.p1 * x * y + c.p2 * (r2 + 2.0 * x * x);
    const double dy = c.p1 * (r2 + 2.0 * y * y) + 2.0 * c.p2 * x * y;
    const Vec2 next((distorted.x() - dx) / radial, (distorted.y() - dy) / radial);
    const double step = (next - n).norm();
    n = next;
    if (step < 1e-10) break;
  }
  return n;
}

Vec3 to_camera(const Point3& p, const CameraPose& pose) { return pose.R.transpose() * (p - pose.t); }

Pixel project_camera_point(const Vec3& pc, const CameraIntrinsics& intr) {
  if (!(pc.z() > kDepthEpsilon)) {
    fail(ErrorKind::PointBehindCamera, "camera-frame depth " + std::to_string(pc.z()));
  }
  const Vec2 n(pc.x() / pc.z(), pc.y() / pc.z());
  const Vec2 d = apply_distortion(n, intr.dist);
  return {intr.fx * d.x() + intr.skew * d.y() + intr.cx, intr.fy * d.y() + intr.cy};
}

Pixel project(const Point3& p, const CameraIntrinsics& intr, const CameraPose& pose) {
  return project_camera_point(to_camera(p, pose), intr);
}

Ray pixel_ray(const Pixel& p, const CameraIntrinsics& intr, const CameraPose& pose) {
  const double yd = (p.v - intr.cy) / intr.fy;
  const double xd = (p.u - intr.cx - intr.skew * yd) / intr.fx;
  const Vec2 n = remove_distortion(Vec2(xd, yd), intr.dist);
  return {pose.t, pose.R * Vec3(n.x(), n.y(), 1.0)};
}

ProjectionJacobian project_with_jacobian(const Point3& p, const CameraIntrinsics& intr,
                                         const CameraPose& pose) {
  const Mat3 Rt = pose.R.transpose();
  const Vec3 pc = Rt * (p - pose.t);
  ProjectionJacobian out;
  out.pixel = project_camera_point(pc, intr);

  const double iz = 1.0 / pc.z();
  const Vec2 n(pc.x() * iz, pc.y() * iz);
  Eigen::Matrix<double, 2, 3> dn_dpc;
  dn_dpc << iz, 0.0, -pc.x() * iz * iz, 0.0, iz, -pc.y() * iz * iz;
  Eigen::Matrix2d dpix_dd;
  dpix_dd << intr.fx, intr.skew, 0.0, intr.fy;
  const Eigen::Matrix<double, 2, 3> dpix_dpc = dpix_dd * distortion_jacobian(n, intr.dist) * dn_dpc;

  // pc(w) = exp(w)^T R^T (p - t) ~ pc + [pc]x w
  out.d_pose.leftCols<3>() = dpix_dpc * skew(pc);
  out.d_pose.rightCols<3>() = -dpix_dpc * Rt;
  out.d_point = dpix_dpc * Rt;
  return out;
}

CameraPose retract(const CameraPose& pose, const Eigen::Matrix<double, 6, 1>& delta) {
  CameraPose out;
  out.R = pose.R * so3_exp(delta.head<3>());
  out.t = pose.t + delta.tail<3>();
  return out;
}

Mat3 rotation_from_angles(double theta_e, double theta_a) {
  Mat3 Rz;
  Rz << std::cos(theta_a), -std::sin(theta_a), 0.0, std::sin(theta_a), std::cos(theta_a), 0.0, 0.0,
      0.0, 1.0;
  Mat3 Rx;
  Rx << 1.0, 0.0, 0.0, 0.0, std::cos(theta_e), -std::sin(theta_e), 0.0, std::sin(theta_e),
      std::cos(theta_e);
  return Rz * Rx;
}

std::pair<CameraPose, SphericalExtrinsic> rotation_from_position(const Point3& t) {
  if (!t.allFinite() || t.norm() < 1e-12) {
    fail(ErrorKind::ZeroPosition, "camera position must be non-zero and finite");
  }
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  SphericalExtrinsic s;
  s.theta_e = kHalfPi - std::atan2(t.z(), std::hypot(t.x(), t.y()));
  s.theta_a = kHalfPi - std::atan2(t.y(), t.x());
  s.position = t;
  CameraPose pose;
  pose.R = rotation_from_angles(s.theta_e, s.theta_a);
  pose.t = t;
  return {pose, s};
}

CameraPose look_at(const Point3& position, const Point3& target, const Vec3& image_down) {
  const Vec3 forward = target - position;
  if (forward.norm() < 1e-12) {
    fail(ErrorKind::InvalidArgument, "look_at: position coincides with target");
  }
  const Vec3 z = forward.normalized();
  const Vec3 x_raw = image_down.cross(z);
  if (x_raw.norm() < 1e-9) {
    fail(ErrorKind::InvalidArgument, "look_at: viewing direction parallel to image_down");
  }
  const Vec3 x = x_raw.normalized();
  const Vec3 y = z.cross(x);
  CameraPose pose;
  pose.R.col(0) = x;
  pose.R.col(1) = y;
  pose.R.col(2) = z;
  pose.t = position;
  return pose;
}

double point_ray_distance(const Point3& p, const Ray& ray) {
  const Vec3 d = ray.direction.normalized();
  const Vec3 rel = p - ray.origin;
  return (rel - rel.dot(d) * d).norm();
}

}  // namespace gaitanno
