#include <gtest/gtest.h>

#include <random>

#include "gaitanno/error.hpp"
#include "gaitanno/triangulate.hpp"
#include "test_util.hpp"

using namespace gaitanno;
using testutil::gaussian3;

namespace {

// Literal normal-equation solve of the 9x3 three-ray system, built by hand.
Eigen::Vector3d oracle_params(const Ray& r1, const Ray& r2, const Ray& r3) {
  Eigen::Matrix<double, 9, 3> A = Eigen::Matrix<double, 9, 3>::Zero();
  Eigen::Matrix<double, 9, 1> b;
  A.block<3, 1>(0, 0) = r1.direction;
  A.block<3, 1>(0, 1) = -r2.direction;
  b.segment<3>(0) = r2.origin - r1.origin;
  A.block<3, 1>(3, 0) = r1.direction;
  A.block<3, 1>(3, 2) = -r3.direction;
  b.segment<3>(3) = r3.origin - r1.origin;
  A.block<3, 1>(6, 1) = r2.direction;
  A.block<3, 1>(6, 2) = -r3.direction;
  b.segment<3>(6) = r3.origin - r2.origin;
  return (A.transpose() * A).inverse() * A.transpose() * b;
}

std::vector<Ray> rays_to(const Point3& X, std::mt19937_64& g, int n, double jitter = 0.0) {
  std::vector<Ray> rays;
  for (int i = 0; i < n; ++i) {
    const Point3 o = X + gaussian3(g, 5.0);
    rays.push_back({o, (X - o + gaussian3(g, jitter)) * testutil::uniform(g, 0.5, 2.0)});
  }
  return rays;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(RaySystem, LayoutForThreeRays) {
  std::mt19937_64 g(21);
  const auto rays = rays_to(Point3(0, 0, 1), g, 3);
  const RaySystem s = build_ray_system(rays);
  ASSERT_EQ(s.A.rows(), 9);
  ASSERT_EQ(s.A.cols(), 3);
  EXPECT_EQ(Vec3(s.A.block<3, 1>(0, 0)), rays[0].direction);
  EXPECT_EQ(Vec3(s.A.block<3, 1>(0, 1)), -rays[1].direction);
  EXPECT_EQ(Vec3(s.A.block<3, 1>(6, 2)), -rays[2].direction);
  EXPECT_EQ(Vec3(s.b.segment<3>(3)), rays[2].origin - rays[0].origin);
  EXPECT_EQ(build_ray_system(rays_to(Point3::Zero(), g, 5)).A.rows(), 30);
}

TEST(Triangulate, MatchesNormalEquationOracle) {
  std::mt19937_64 g(22);
  for (int i = 0; i < 2000; ++i) {
    const auto rays = rays_to(gaussian3(g, 2.0), g, 3, 0.05);
    const TriangulationResult r = triangulate_rays(rays);
    const Eigen::Vector3d w = oracle_params(rays[0], rays[1], rays[2]);
    Point3 mean = Point3::Zero();
    double gap2 = 0;
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(r.per_ray_params[k], w[k], 1e-9 * std::max(1.0, std::abs(w[k])));
      mean += rays[k].origin + w[k] * rays[k].direction;
    }
    mean /= 3.0;
    for (int k = 0; k < 3; ++k) gap2 += (rays[k].origin + w[k] * rays[k].direction - mean).squaredNorm();
    EXPECT_LT((r.point - mean).norm(), 1e-9 * std::max(1.0, mean.norm()));
    EXPECT_NEAR(r.rms_ray_gap, std::sqrt(gap2 / 3.0), 1e-9);
    EXPECT_GE(r.condition, 1.0);
  }
}

TEST(Triangulate, NoiselessRoundTrip) {
  std::mt19937_64 g(23);
  const CameraIntrinsics k = testutil::distorted_intrinsics();
  for (int i = 0; i < 500; ++i) {
    const Point3 X = gaussian3(g, 0.7) + Point3(0, 0, 1);
    std::vector<Ray> rays;
    for (int c = 0; c < 3; ++c) {
      const CameraPose pose = testutil::random_pose(g, 8.0, Point3(0, 0, 1));
      rays.push_back(pixel_ray(project(X, k, pose), k, pose));
    }
    const TriangulationResult r = triangulate_rays(rays);
    EXPECT_LT((r.point - X).norm(), 1e-9);
    EXPECT_LT(r.rms_ray_gap, 1e-9);
  }
}

TEST(Triangulate, TwoRaysGiveMidpointOfCommonPerpendicular) {
  const Ray a{Point3(0, 0, 0), Vec3(1, 0, 0)};
  const Ray b{Point3(0, 1, 1), Vec3(0, 1, 0)};
  const TriangulationResult r = triangulate_rays(std::vector<Ray>{a, b});
  EXPECT_LT((r.point - Point3(0, 0, 0.5)).norm(), 1e-12);
  EXPECT_NEAR(r.rms_ray_gap, 0.5, 1e-12);
}

TEST(Triangulate, ParallelRaysAreDegenerate) {
  std::mt19937_64 g(24);
  for (int i = 0; i < 200; ++i) {
    const Vec3 d = gaussian3(g).normalized();
    std::vector<Ray> rays;
    for (int k = 0; k < 2 + i % 3; ++k) rays.push_back({gaussian3(g, 3.0), d * testutil::uniform(g, -2.0, 2.0)});
    EXPECT_EQ(kind_of([&] { triangulate_rays(rays); }), ErrorKind::DegenerateRays);
  }
}

TEST(Triangulate, TooFewRays) {
  const std::vector<Ray> one{{Point3::Zero(), Vec3::UnitX()}};
  EXPECT_EQ(kind_of([&] { triangulate_rays(one); }), ErrorKind::NotEnoughRays);
}

TEST(Triangulate, JointUsesConfidenceFloor) {
  std::mt19937_64 g(25);
  const CameraIntrinsics k = testutil::default_intrinsics();
  const Point3 X(0.2, -0.1, 1.2);
  CameraSet cams;
  std::vector<JointObservation> obs;
  for (int c = 0; c < 3; ++c) {
    const std::string id = "c" + std::to_string(c);
    cams[id] = {k, testutil::random_pose(g, 8.0, Point3(0, 0, 1))};
    Pixel p = project(X, k, cams[id].pose);
    if (c == 2) p.u += 40.0;  // bad detection, low confidence
    obs.push_back({id, p, c == 2 ? 0.3 : 0.9});
  }
  const TriangulationResult r = triangulate_joint(obs, cams);
  EXPECT_LT((r.point - X).norm(), 1e-9);
  EXPECT_EQ(r.per_ray_params.size(), 2u);

  obs[1].confidence = 0.1;
  EXPECT_EQ(kind_of([&] { triangulate_joint(obs, cams); }), ErrorKind::TooFewConfidentViews);
  obs[1].confidence = 0.9;
  obs[0].camera_id = "nope";
  EXPECT_EQ(kind_of([&] { triangulate_joint(obs, cams); }), ErrorKind::NotFound);
}

TEST(TriangulateSequence, NoiselessSceneRecoversTrack) {
  const auto s = testutil::small_scene(0.0, 0.0, 3, 2.0);
  const SkeletonTrack3D track = triangulate_sequence(s.render.session, s.rig.truth.camera_set(), {});
  ASSERT_EQ(track.instances.size(), s.truth.instances.size());
  std::size_t joints = 0;
  for (std::size_t i = 0; i < track.instances.size(); ++i) {
    for (std::size_t j = 0; j < track.schema.size(); ++j) {
      if (!track.instances[i].joints[j]) continue;
      ++joints;
      EXPECT_LT((track.instances[i].joints[j]->point - s.truth.instances[i].joints[j]->point).norm(), 1e-9);
    }
  }
  EXPECT_GT(joints, track.instances.size() * 30);
}

TEST(TriangulateSequence, MaxInstancesLimitsOutput) {
  const auto s = testutil::small_scene(1.0, 0.05, 4, 2.0);
  SequenceOptions o;
  o.max_instances = 17;
  EXPECT_EQ(triangulate_sequence(s.render.session, s.rig.truth.camera_set(), {}, o).instances.size(), 17u);
}
