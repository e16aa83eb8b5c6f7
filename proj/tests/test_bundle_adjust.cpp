#include <gtest/gtest.h>

#include <random>

#include "gaitanno/bundle_adjust.hpp"
#include "gaitanno/error.hpp"
#include "gaitanno/triangulate.hpp"
#include "test_util.hpp"

using namespace gaitanno;
using testutil::gaussian3;

namespace {

struct Random {
  BAProblem problem;
  std::vector<CameraPose> truth_cameras;
  std::vector<Point3> truth_points;
};

// Cameras around a point cloud; starting poses and points perturbed, pixels
// from the true geometry plus noise.
Random random_problem(std::mt19937_64& g, int n_cams, int n_points, double noise, double pose_sigma,
                      double point_sigma, bool distorted = false) {
  Random r;
  std::normal_distribution<double> px(0.0, noise);
  const CameraIntrinsics k = distorted ? testutil::distorted_intrinsics() : testutil::default_intrinsics();
  for (int c = 0; c < n_cams; ++c) {
    const CameraPose truth = testutil::random_pose(g, 7.0, Point3(0, 0, 1));
    r.truth_cameras.push_back(truth);
    CameraPose start = truth;
    if (c > 0) {
      start.R = start.R * so3_exp(gaussian3(g, pose_sigma));
      start.t += gaussian3(g, 10 * pose_sigma);
    }
    r.problem.cameras.push_back({"c" + std::to_string(c), k, start, c == 0});
  }
  for (int p = 0; p < n_points; ++p) {
    const Point3 X = Point3(0, 0, 1) + gaussian3(g, 0.5);
    r.truth_points.push_back(X);
    r.problem.points.push_back({p, X + gaussian3(g, point_sigma)});
  }
  for (int c = 0; c < n_cams; ++c) {
    for (int p = 0; p < n_points; ++p) {
      Pixel q = project(r.truth_points[p], k, r.truth_cameras[c]);
      if (noise > 0) {
        q.u += px(g);
        q.v += px(g);
      }
      r.problem.observations.push_back({static_cast<std::size_t>(c), static_cast<std::size_t>(p), q, 1.0});
    }
  }
  return r;
}

std::vector<CameraPose> poses_of(const BAProblem& p) {
  std::vector<CameraPose> out;
  for (const auto& c : p.cameras) out.push_back(c.pose);
  return out;
}

std::vector<Point3> points_of(const BAProblem& p) {
  std::vector<Point3> out;
  for (const auto& x : p.points) out.push_back(x.position);
  return out;
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

TEST(BundleAdjust, ObservationJacobianMatchesCentralDifferences) {
  std::mt19937_64 g(41);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const Random r = random_problem(g, 2, 1, 1.0, 0.02, 0.05, trial % 2 == 1);
    const auto cams = poses_of(r.problem);
    const auto pts = points_of(r.problem);
    const BAObservation& obs = r.problem.observations[1];
    const auto J = observation_jacobian(r.problem, obs, cams, pts);
    const auto residual = [&](const std::vector<CameraPose>& c, const std::vector<Point3>& p) {
      return compute_residuals(r.problem, c, p)[1];
    };
    for (int col = 0; col < 9; ++col) {
      auto cp = cams, cm = cams;
      auto pp = pts, pm = pts;
      if (col < 6) {
        Eigen::Matrix<double, 6, 1> d = Eigen::Matrix<double, 6, 1>::Zero();
        d[col] = h;
        cp[obs.camera] = retract(cams[obs.camera], d);
        cm[obs.camera] = retract(cams[obs.camera], -d);
      } else {
        pp[obs.point][col - 6] += h;
        pm[obs.point][col - 6] -= h;
      }
      const Vec2 fd = (residual(cp, pp) - residual(cm, pm)) / (2 * h);
      for (int row = 0; row < 2; ++row) {
        EXPECT_LT(std::abs(J(row, col) - fd[row]) / std::max(1.0, std::abs(fd[row])), 1e-4)
            << "trial " << trial << " col " << col;
      }
    }
  }
}

TEST(BundleAdjust, SchurStepEqualsDenseStep) {
  std::mt19937_64 g(42);
  for (int trial = 0; trial < 10; ++trial) {
    const Random r = random_problem(g, 4, 40, 1.0, 0.02, 0.03);
    const auto cams = poses_of(r.problem);
    const auto pts = points_of(r.problem);
    for (double lambda : {1e-4, 1e-1, 10.0}) {
      const Eigen::VectorXd a = lm_step(r.problem, cams, pts, lambda, StepSolver::Schur);
      const Eigen::VectorXd b = lm_step(r.problem, cams, pts, lambda, StepSolver::Dense);
      ASSERT_EQ(a.size(), 3 * 6 + 40 * 3);
      EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(BundleAdjust, NoiselessConvergesToZeroResidual) {
  std::mt19937_64 g(43);
  Random r = random_problem(g, 3, 60, 0.0, 0.02, 0.03);
  r.problem.scale_prior = ScalePrior{1, r.truth_cameras[1].t.norm(), 1e4};
  const BAResult res = optimize(r.problem);
  EXPECT_LT(res.report.mean_residual_after, 1e-6);
  EXPECT_GT(res.report.mean_residual_before, 1.0);
  EXPECT_TRUE(res.report.converged);
  for (std::size_t c = 0; c < res.cameras.size(); ++c) {
    EXPECT_LT(rotation_distance(res.cameras[c].R, r.truth_cameras[c].R), 1e-6);
    EXPECT_LT((res.cameras[c].t - r.truth_cameras[c].t).norm(), 1e-6);
  }
}

TEST(BundleAdjust, AcceptedStepsDecreaseCost) {
  std::mt19937_64 g(44);
  for (int trial = 0; trial < 5; ++trial) {
    const Random r = random_problem(g, 3, 50, 2.0, 0.03, 0.05);
    const BAResult res = optimize(r.problem);
    const auto& h = res.report.cost_history;
    ASSERT_GE(h.size(), 2u);
    EXPECT_EQ(h.front(), res.report.initial_cost);
    EXPECT_EQ(h.back(), res.report.final_cost);
    for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LT(h[i], h[i - 1]);
  }
}

TEST(BundleAdjust, FixedCameraIsBitIdentical) {
  std::mt19937_64 g(45);
  const Random r = random_problem(g, 3, 40, 1.0, 0.03, 0.05);
  const BAResult res = optimize(r.problem);
  EXPECT_EQ(res.cameras[0], r.problem.cameras[0].pose);
  EXPECT_EQ(res.report.fixed_camera, "c0");
  EXPECT_FALSE(res.report.auto_fixed);
}

TEST(BundleAdjust, ExtrinsicsOnlyKeepsPoints) {
  std::mt19937_64 g(46);
  const Random r = random_problem(g, 3, 40, 1.0, 0.03, 0.0);
  BAOptions o;
  o.optimize_points = false;
  const BAResult res = optimize(r.problem, o);
  ASSERT_EQ(res.points.size(), r.problem.points.size());
  for (std::size_t i = 0; i < res.points.size(); ++i) EXPECT_EQ(res.points[i], r.problem.points[i].position);
  EXPECT_LT(res.report.final_cost, res.report.initial_cost);
}

TEST(BundleAdjust, HuberLimitsOutlierInfluence) {
  std::mt19937_64 g(47);
  Random r = random_problem(g, 3, 60, 0.5, 0.02, 0.03);
  for (std::size_t i = 0; i < r.problem.observations.size(); i += 17) r.problem.observations[i].pixel.u += 80.0;
  const BAResult plain = optimize(r.problem);
  BAOptions o;
  o.huber_delta = 2.0;
  const BAResult robust = optimize(r.problem, o);
  const auto err = [&](const BAResult& res) {
    double e = 0;
    for (std::size_t c = 1; c < res.cameras.size(); ++c) e += rotation_distance(res.cameras[c].R, r.truth_cameras[c].R);
    return e;
  };
  EXPECT_LT(err(robust), err(plain));
}

TEST(BundleAdjust, ParallelAndSerialAgree) {
  std::mt19937_64 g(48);
  const Random r = random_problem(g, 4, 80, 1.0, 0.03, 0.05);
  BAOptions s, p;
  s.execution = Execution::Serial;
  p.execution = Execution::Parallel;
  const BAResult a = optimize(r.problem, s);
  const BAResult b = optimize(r.problem, p);
  EXPECT_EQ(a.report.iterations, b.report.iterations);
  EXPECT_NEAR(a.report.final_cost, b.report.final_cost, 1e-9 * a.report.final_cost);
  for (std::size_t c = 0; c < a.cameras.size(); ++c) EXPECT_LT((a.cameras[c].t - b.cameras[c].t).norm(), 1e-9);
}

TEST(BundleAdjust, ProgressCallbackSeesEveryIteration) {
  std::mt19937_64 g(49);
  const Random r = random_problem(g, 3, 30, 1.0, 0.03, 0.05);
  BAOptions o;
  int calls = 0;
  double last = std::numeric_limits<double>::infinity();
  o.progress = [&](int, double cost) {
    ++calls;
    EXPECT_LE(cost, last);
    last = cost;
  };
  const BAResult res = optimize(r.problem, o);
  EXPECT_GE(calls, 1);
  EXPECT_EQ(last, res.report.final_cost);
}

TEST(BundleAdjust, ValidateRejectsBadReferences) {
  std::mt19937_64 g(50);
  Random r = random_problem(g, 2, 5, 1.0, 0.01, 0.01);
  r.problem.observations[0].point = 99;
  EXPECT_EQ(kind_of([&] { r.problem.validate(); }), ErrorKind::InvalidArgument);
  Random q = random_problem(g, 2, 5, 1.0, 0.01, 0.01);
  q.problem.cameras[0].fixed = false;
  EXPECT_EQ(kind_of([&] { q.problem.validate(); }), ErrorKind::InvalidArgument);
}

TEST(BuildProblem, FromSyntheticScene) {
  const auto s = testutil::small_scene(1.0, 0.05, 5, 3.0);
  const SkeletonTrack3D track = triangulate_sequence(s.render.session, s.rig.initial.camera_set(), {});
  const BAProblem p = build_problem(s.render.session, s.rig.initial, track);
  EXPECT_NO_THROW(p.validate());
  EXPECT_TRUE(p.auto_fixed_camera.empty());
  ASSERT_EQ(p.cameras.size(), 3u);  // the long camera has no stream
  EXPECT_TRUE(p.cameras[0].fixed);
  ASSERT_TRUE(p.scale_prior.has_value());
  EXPECT_EQ(p.scale_prior->camera, 1u);
  EXPECT_DOUBLE_EQ(p.scale_prior->distance, s.rig.initial.cameras[1].pose.t.norm());
  for (std::size_t i = 1; i < p.observations.size(); ++i) {
    const auto& a = p.observations[i - 1];
    const auto& b = p.observations[i];
    EXPECT_TRUE(a.camera < b.camera || (a.camera == b.camera && p.points[a.point].id < p.points[b.point].id));
  }
  const int J = static_cast<int>(track.schema.size());
  for (const auto& pt : p.points) {
    const auto& est = track.instances[pt.id / J].joints[pt.id % J];
    ASSERT_TRUE(est.has_value());
    EXPECT_EQ(est->point, pt.position);
  }
}

TEST(BuildProblem, AutoFixesFirstCameraAndReportsIt) {
  const auto s = testutil::small_scene(1.0, 0.0, 6, 2.0);
  Rig rig = s.rig.initial;
  for (auto& c : rig.cameras) c.fixed = false;
  const SkeletonTrack3D track = triangulate_sequence(s.render.session, rig.camera_set(), {});
  const BAProblem p = build_problem(s.render.session, rig, track);
  EXPECT_EQ(p.auto_fixed_camera, "cam0");
  const BAResult res = optimize(p);
  EXPECT_TRUE(res.report.auto_fixed);
  EXPECT_EQ(res.report.fixed_camera, "cam0");
}

TEST(BuildProblem, MissingPoseThrows) {
  const auto s = testutil::small_scene(1.0, 0.0, 7, 1.0);
  Rig rig = s.rig.initial;
  rig.cameras.erase(rig.cameras.begin() + 2);
  const SkeletonTrack3D track = triangulate_sequence(s.render.session, s.rig.initial.camera_set(), {});
  EXPECT_EQ(kind_of([&] { build_problem(s.render.session, rig, track); }), ErrorKind::MissingInitialPose);
}

TEST(ApplyToRig, WritesPosesById) {
  const auto s = testutil::small_scene(1.0, 0.0, 8, 2.0);
  Rig rig = s.rig.initial;
  const SkeletonTrack3D track = triangulate_sequence(s.render.session, rig.camera_set(), {});
  const BAProblem p = build_problem(s.render.session, rig, track);
  const BAResult res = optimize(p);
  apply_to_rig(p, res, rig);
  for (std::size_t c = 0; c < p.cameras.size(); ++c) EXPECT_EQ(rig.find(p.cameras[c].id)->pose, res.cameras[c]);
  EXPECT_EQ(rig.find("long")->pose, s.rig.initial.find("long")->pose);
}
