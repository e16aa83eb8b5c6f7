#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gaitanno/error.hpp"
#include "gaitanno/geometry.hpp"
#include "test_util.hpp"

using namespace gaitanno;
using testutil::gaussian3;
using testutil::uniform;

namespace {

// Straight-line evaluation of the camera model, written out per coordinate.
Pixel oracle_project(const Point3& X, const CameraIntrinsics& k, const CameraPose& pose) {
  const Vec3 pc = pose.R.transpose() * (X - pose.t);
  double x = pc.x() / pc.z();
  double y = pc.y() / pc.z();
  if (!k.dist.empty()) {
    const double k1 = k.dist[0], k2 = k.dist[1], p1 = k.dist[2], p2 = k.dist[3];
    const double k3 = k.dist.size() > 4 ? k.dist[4] : 0.0;
    const double r2 = x * x + y * y;
    const double radial = 1 + k1 * r2 + k2 * r2 * r2 + k3 * r2 * r2 * r2;
    const double xd = x * radial + 2 * p1 * x * y + p2 * (r2 + 2 * x * x);
    const double yd = y * radial + p1 * (r2 + 2 * y * y) + 2 * p2 * x * y;
    x = xd;
    y = yd;
  }
  return {k.fx * x + k.skew * y + k.cx, k.fy * y + k.cy};
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace

TEST(So3, ExpLogRoundTrip) {
  std::mt19937_64 g(1);
  for (int i = 0; i < 200; ++i) {
    Vec3 w = gaussian3(g, 0.8);
    if (w.norm() > 3.0) w *= 3.0 / w.norm();
    const Mat3 R = so3_exp(w);
    EXPECT_TRUE(is_rotation(R));
    EXPECT_LT((so3_log(R) - w).norm(), 1e-10);
  }
  EXPECT_LT((so3_exp(Vec3::Zero()) - Mat3::Identity()).norm(), 1e-15);
  EXPECT_LT((so3_log(Mat3::Identity())).norm(), 1e-15);
}

TEST(So3, LogNearPi) {
  const Vec3 w = Vec3(1, 2, -1).normalized() * (M_PI - 1e-7);
  EXPECT_LT(rotation_distance(so3_exp(so3_log(so3_exp(w))), so3_exp(w)), 1e-8);
}

TEST(So3, RotationDistance) {
  const Mat3 a = so3_exp(Vec3(0.1, -0.2, 0.3));
  const Mat3 b = a * so3_exp(Vec3(0, 0, 0.25));
  EXPECT_NEAR(rotation_distance(a, b), 0.25, 1e-12);
}

TEST(Projection, MatchesOracleWithAndWithoutDistortion) {
  std::mt19937_64 g(2);
  for (const auto& k : {testutil::default_intrinsics(), testutil::distorted_intrinsics()}) {
    for (int i = 0; i < 500; ++i) {
      const CameraPose pose = testutil::random_pose(g);
      const Point3 X = gaussian3(g, 1.0);
      const Pixel a = project(X, k, pose);
      const Pixel b = oracle_project(X, k, pose);
      EXPECT_NEAR(a.u, b.u, 1e-9);
      EXPECT_NEAR(a.v, b.v, 1e-9);
    }
  }
}

TEST(Projection, PrincipalPointOnAxis) {
  const CameraIntrinsics k = testutil::distorted_intrinsics();
  const Pixel p = project_camera_point(Vec3(0, 0, 4), k);
  EXPECT_DOUBLE_EQ(p.u, k.cx);
  EXPECT_DOUBLE_EQ(p.v, k.cy);
}

TEST(Projection, BehindCameraThrows) {
  const CameraIntrinsics k = testutil::default_intrinsics();
  try {
    project_camera_point(Vec3(0, 0, 0), k);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PointBehindCamera);
  }
  EXPECT_THROW(project_camera_point(Vec3(0.1, 0, -1), k), Error);
}

TEST(Intrinsics, Validation) {
  CameraIntrinsics k = testutil::default_intrinsics();
  EXPECT_NO_THROW(k.validate());
  k.dist = {0.1, 0.2, 0.3};
  try {
    k.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedModel);
  }
  k.dist.clear();
  k.fx = 0.0;
  EXPECT_THROW(k.validate(), Error);
  const CameraIntrinsics d = testutil::distorted_intrinsics();
  EXPECT_LT((d.K() * d.K_inverse() - Mat3::Identity()).norm(), 1e-12);
}

TEST(Distortion, RemoveInvertsApply) {
  std::mt19937_64 g(3);
  const auto dist = testutil::distorted_intrinsics().dist;
  for (int i = 0; i < 1000; ++i) {
    const Vec2 n(uniform(g, -0.6, 0.6), uniform(g, -0.4, 0.4));
    const Vec2 back = remove_distortion(apply_distortion(n, dist), dist);
    EXPECT_LT((back - n).norm(), 1e-8);
  }
  const Vec2 n(0.3, -0.2);
  EXPECT_EQ(apply_distortion(n, {}), n);
  EXPECT_EQ(remove_distortion(n, {}), n);
}

TEST(Distortion, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 g(4);
  const auto dist = testutil::distorted_intrinsics().dist;
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const Vec2 n(uniform(g, -0.5, 0.5), uniform(g, -0.4, 0.4));
    const Eigen::Matrix2d J = distortion_jacobian(n, dist);
    for (int c = 0; c < 2; ++c) {
      Vec2 e = Vec2::Zero();
      e[c] = h;
      const Vec2 fd = (apply_distortion(n + e, dist) - apply_distortion(n - e, dist)) / (2 * h);
      for (int r = 0; r < 2; ++r) EXPECT_LT(rel_err(J(r, c), fd[r]), 1e-4);
    }
  }
}

TEST(Rays, PixelRayPassesThroughPoint) {
  std::mt19937_64 g(5);
  for (const auto& k : {testutil::default_intrinsics(), testutil::distorted_intrinsics()}) {
    for (int i = 0; i < 300; ++i) {
      const CameraPose pose = testutil::random_pose(g);
      const Point3 X = gaussian3(g, 0.8);
      const Ray r = pixel_ray(project(X, k, pose), k, pose);
      EXPECT_LT(point_ray_distance(X, r), 1e-7);
      EXPECT_LT((r.origin - pose.t).norm(), 1e-12);
      EXPECT_GT(r.direction.dot(X - pose.t), 0.0);
    }
  }
}

TEST(Jacobian, ProjectionMatchesCentralDifferences) {
  std::mt19937_64 g(6);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const CameraIntrinsics k = i % 2 ? testutil::distorted_intrinsics() : testutil::default_intrinsics();
    const CameraPose pose = testutil::random_pose(g);
    const Point3 X = gaussian3(g, 0.7);
    const ProjectionJacobian J = project_with_jacobian(X, k, pose);
    const Pixel p = project(X, k, pose);
    EXPECT_DOUBLE_EQ(J.pixel.u, p.u);
    EXPECT_DOUBLE_EQ(J.pixel.v, p.v);
    for (int c = 0; c < 6; ++c) {
      Eigen::Matrix<double, 6, 1> d = Eigen::Matrix<double, 6, 1>::Zero();
      d[c] = h;
      const Pixel a = project(X, k, retract(pose, d));
      const Pixel b = project(X, k, retract(pose, -d));
      EXPECT_LT(rel_err(J.d_pose(0, c), (a.u - b.u) / (2 * h)), 1e-4);
      EXPECT_LT(rel_err(J.d_pose(1, c), (a.v - b.v) / (2 * h)), 1e-4);
    }
    for (int c = 0; c < 3; ++c) {
      Vec3 e = Vec3::Zero();
      e[c] = h;
      const Pixel a = project(X + e, k, pose);
      const Pixel b = project(X - e, k, pose);
      EXPECT_LT(rel_err(J.d_point(0, c), (a.u - b.u) / (2 * h)), 1e-4);
      EXPECT_LT(rel_err(J.d_point(1, c), (a.v - b.v) / (2 * h)), 1e-4);
    }
  }
}

TEST(Retract, ZeroIsIdentityAndComposes) {
  std::mt19937_64 g(7);
  const CameraPose p = testutil::random_pose(g);
  EXPECT_EQ(retract(p, Eigen::Matrix<double, 6, 1>::Zero()), p);
  Eigen::Matrix<double, 6, 1> d;
  d << 0.1, -0.05, 0.2, 0.3, -0.1, 0.4;
  const CameraPose q = retract(p, d);
  EXPECT_LT((q.R - p.R * so3_exp(d.head<3>())).norm(), 1e-15);
  EXPECT_LT((q.t - (p.t + d.tail<3>())).norm(), 1e-15);
  EXPECT_TRUE(q.is_valid());
}

TEST(Angles, RotationFromAnglesIsRzRx) {
  const double e = 0.7, a = -0.4;
  Mat3 rz, rx;
  rz << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  rx << 1, 0, 0, 0, std::cos(e), -std::sin(e), 0, std::sin(e), std::cos(e);
  EXPECT_LT((rotation_from_angles(e, a) - rz * rx).norm(), 1e-15);
}

TEST(Angles, PositionOnPositiveYLooksAtOrigin) {
  for (double d : {5.0, 60.0, 250.0}) {
    const auto [pose, sph] = rotation_from_position(Point3(0, d, 0));
    EXPECT_NEAR(sph.theta_e, M_PI / 2, 1e-15);
    EXPECT_NEAR(sph.theta_a, 0.0, 1e-15);
    const Vec3 axis = pose.R.col(2);
    EXPECT_LT((axis - Vec3(0, -1, 0)).norm(), 1e-12);
    const Pixel c = project(Point3::Zero(), testutil::default_intrinsics(), pose);
    EXPECT_NEAR(c.u, 640.0, 1e-9);
    EXPECT_NEAR(c.v, 360.0, 1e-9);
    // Matches the exact look-at with the default image-down direction.
    EXPECT_LT(rotation_distance(pose.R, look_at(Point3(0, d, 0)).R), 1e-12);
  }
}

TEST(Angles, ElevationAndAzimuthFormulas) {
  std::mt19937_64 g(8);
  for (int i = 0; i < 100; ++i) {
    const Point3 t = gaussian3(g, 10.0);
    const auto [pose, sph] = rotation_from_position(t);
    EXPECT_DOUBLE_EQ(sph.theta_e, M_PI / 2 - std::atan2(t.z(), std::hypot(t.x(), t.y())));
    EXPECT_DOUBLE_EQ(sph.theta_a, M_PI / 2 - std::atan2(t.y(), t.x()));
    EXPECT_EQ(pose.t, t);
    EXPECT_TRUE(is_rotation(pose.R));
  }
}

TEST(Angles, ZeroPositionThrows) {
  try {
    rotation_from_position(Point3::Zero());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroPosition);
  }
}

TEST(LookAt, CentersTargetEverywhere) {
  std::mt19937_64 g(9);
  const CameraIntrinsics k = testutil::default_intrinsics();
  for (int i = 0; i < 200; ++i) {
    const Point3 target = gaussian3(g, 2.0);
    Point3 pos = target + gaussian3(g, 8.0);
    const CameraPose p = look_at(pos, target);
    EXPECT_TRUE(is_rotation(p.R));
    const Pixel c = project(target, k, p);
    EXPECT_NEAR(c.u, k.cx, 1e-8);
    EXPECT_NEAR(c.v, k.cy, 1e-8);
    // image_down = +Z: world +Z maps to increasing v.
    const Pixel below = project(target + Vec3(0, 0, 0.1), k, p);
    EXPECT_GT(below.v, c.v);
  }
  EXPECT_THROW(look_at(Point3(0, 0, 5), Point3::Zero()), Error);
  EXPECT_THROW(look_at(Point3(1, 2, 3), Point3(1, 2, 3)), Error);
}
