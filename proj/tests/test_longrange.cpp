#include <gtest/gtest.h>

#include "gaitanno/error.hpp"
#include "gaitanno/longrange.hpp"
#include "gaitanno/synth.hpp"
#include "test_util.hpp"

using namespace gaitanno;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidArgument;
}

const SkeletonTrack3D& walk() {
  static const SkeletonTrack3D t = [] {
    WalkerSpec w;
    w.duration_s = 2.0;
    return gen_walker(w, 71);
  }();
  return t;
}

RigCamera long_camera_at(const CameraPose& pose) {
  RigCamera c;
  c.id = "long";
  c.role = "long";
  c.intrinsics = testutil::default_intrinsics();
  c.pose = pose;
  return c;
}

}  // namespace

TEST(Nudge, ZeroDeltasReproduceAngleConstruction) {
  const Point3 t(0.4, 58.0, 0.3);
  const NudgeState s = make_nudge_state(t);
  const auto [pose, sph] = rotation_from_position(t);
  EXPECT_EQ(s.base.theta_e, sph.theta_e);
  EXPECT_EQ(s.base.theta_a, sph.theta_a);
  EXPECT_EQ(nudged_pose(s), pose);
}

TEST(Nudge, DeltasAddToAnglesAndMoveAlongAxis) {
  NudgeState s = make_nudge_state(Point3(0, 60, 0));
  s.d_theta_e = 0.01;
  s.d_theta_a = -0.02;
  s.d_d = 2.5;
  const CameraPose p = nudged_pose(s);
  EXPECT_LT((p.R - rotation_from_angles(s.base.theta_e + 0.01, s.base.theta_a - 0.02)).norm(), 1e-15);
  EXPECT_LT((p.t - Point3(0, 62.5, 0)).norm(), 1e-12);
  s.placement_axis = PlacementAxis::NegX;
  EXPECT_LT((nudged_pose(s).t - Point3(-2.5, 60, 0)).norm(), 1e-12);
}

TEST(Nudge, ThetaDeltasMoveSkeletonVerticallyAndHorizontally) {
  const NudgeState s0 = make_nudge_state(Point3(0, 60, 0));
  const CameraIntrinsics k = testutil::default_intrinsics();
  const Point3 X(0, 0, 1);
  const Pixel p0 = project(X, k, nudged_pose(s0));
  NudgeState se = s0;
  se.d_theta_e = 0.005;
  const Pixel pe = project(X, k, nudged_pose(se));
  EXPECT_GT(std::abs(pe.v - p0.v), 1.0);
  EXPECT_LT(std::abs(pe.u - p0.u), 1e-9);
  NudgeState sa = s0;
  sa.d_theta_a = 0.005;
  const Pixel pa = project(X, k, nudged_pose(sa));
  EXPECT_GT(std::abs(pa.u - p0.u), 1.0);
  // Off the optical axis a pan changes depth, so v moves only to second order.
  EXPECT_LT(std::abs(pa.v - p0.v), 1e-3 * std::abs(pa.u - p0.u));
}

TEST(Nudge, ValidateBoundsAngles) {
  NudgeState s = make_nudge_state(Point3(0, 60, 0));
  s.d_theta_e = 0.5;
  EXPECT_NO_THROW(s.validate());
  s.d_theta_e = 0.51;
  EXPECT_EQ(kind_of([&] { s.validate(); }), ErrorKind::InvalidArgument);
  s.d_theta_e = 0.0;
  s.d_d = std::nan("");
  EXPECT_EQ(kind_of([&] { s.validate(); }), ErrorKind::InvalidArgument);
}

TEST(Nudge, AxisStrings) {
  for (auto a : {PlacementAxis::PosX, PlacementAxis::NegX, PlacementAxis::PosY, PlacementAxis::NegY}) {
    EXPECT_EQ(placement_axis_from_string(to_string(a)), a);
  }
  EXPECT_EQ(kind_of([] { placement_axis_from_string("Z"); }), ErrorKind::InvalidArgument);
}

TEST(Grid, SizeAndHalfCount) {
  GridSpec g;
  EXPECT_EQ(g.theta.half_count(), 25);
  EXPECT_EQ(g.distance.half_count(), 20);
  EXPECT_EQ(g.size(), 51u * 51u * 41u);
  GridAxis bad{1.0, 0.0};
  EXPECT_EQ(kind_of([&] { bad.half_count(); }), ErrorKind::EmptyGrid);
}

TEST(GridRefine, RecoversKnownPerturbation) {
  const NudgeState s0 = make_nudge_state(Point3(0, 60, 0));
  NudgeState truth = s0;
  truth.d_theta_e = 0.02;
  truth.d_theta_a = -0.01;
  truth.d_d = 3.0;
  const RigCamera cam = long_camera_at(nudged_pose(truth));
  const auto labels = gen_box_labels(walk(), cam);
  GridRefineOptions o;
  o.camera_id = "long";
  const GridRefineResult r = grid_refine(walk(), labels, cam.intrinsics, s0, o);
  EXPECT_NEAR(r.state.d_theta_e, 0.02, 1e-12);
  EXPECT_NEAR(r.state.d_theta_a, -0.01, 1e-12);
  // Scale changes of one distance step move keypoints by a fraction of a
  // pixel, so the containment plateau spans several steps along d.
  EXPECT_LE(std::abs(r.state.d_d - 3.0), 1.0);
  EXPECT_DOUBLE_EQ(r.containment, 100.0);
  EXPECT_FALSE(r.flagged);
  EXPECT_EQ(r.frames, labels.size());
  EXPECT_EQ(r.grid_points, GridSpec{}.size());
  EXPECT_DOUBLE_EQ(containment_for_state(walk(), labels, cam.intrinsics, r.state, o), r.containment);
}

TEST(GridRefine, ZeroPerturbationReturnsZeroDeltas) {
  const NudgeState s0 = make_nudge_state(Point3(0, 60, 0));
  const RigCamera cam = long_camera_at(nudged_pose(s0));
  const auto labels = gen_box_labels(walk(), cam);
  const GridRefineResult r = grid_refine(walk(), labels, cam.intrinsics, s0);
  EXPECT_EQ(r.state.d_theta_e, 0.0);
  EXPECT_EQ(r.state.d_theta_a, 0.0);
  EXPECT_EQ(r.state.d_d, 0.0);
  EXPECT_DOUBLE_EQ(r.containment, 100.0);
}

TEST(GridRefine, SerialAndParallelAgree) {
  const NudgeState s0 = make_nudge_state(Point3(0.3, 59, 0.2));
  const RigCamera cam = long_camera_at(look_at(Point3(0, 60, 0)));
  const auto labels = gen_box_labels(walk(), cam);
  GridRefineOptions a, b;
  a.grid.theta = {0.01, 0.002};
  a.grid.distance = {1.0, 0.25};
  b.grid = a.grid;
  a.execution = Execution::Serial;
  const GridRefineResult ra = grid_refine(walk(), labels, cam.intrinsics, s0, a);
  const GridRefineResult rb = grid_refine(walk(), labels, cam.intrinsics, s0, b);
  EXPECT_EQ(ra.state, rb.state);
  EXPECT_EQ(ra.containment, rb.containment);
}

TEST(GridRefine, NoReachableBoxesIsFlagged) {
  const NudgeState s0 = make_nudge_state(Point3(0, 60, 0));
  const RigCamera cam = long_camera_at(nudged_pose(s0));
  auto labels = gen_box_labels(walk(), cam);
  for (auto& l : labels) l.rect = Rect{5000, 5000, 5010, 5010};
  GridRefineOptions o;
  o.grid.theta = {0.004, 0.002};
  o.grid.distance = {0.5, 0.25};
  const GridRefineResult r = grid_refine(walk(), labels, cam.intrinsics, s0, o);
  EXPECT_TRUE(r.flagged);
  EXPECT_EQ(r.containment, 0.0);
  EXPECT_EQ(r.state.d_theta_e, 0.0);
}

TEST(GridRefine, Errors) {
  const NudgeState s0 = make_nudge_state(Point3(0, 60, 0));
  const RigCamera cam = long_camera_at(nudged_pose(s0));
  auto labels = gen_box_labels(walk(), cam);
  const std::vector<BoxLabel> few(labels.begin(), labels.begin() + 9);
  EXPECT_EQ(kind_of([&] { grid_refine(walk(), few, cam.intrinsics, s0); }), ErrorKind::NoLabels);
  GridRefineOptions o;
  o.grid.theta.step = 0.0;
  EXPECT_EQ(kind_of([&] { grid_refine(walk(), labels, cam.intrinsics, s0, o); }), ErrorKind::EmptyGrid);
  GridRefineOptions off;
  off.frame_offset = 100000;
  EXPECT_EQ(kind_of([&] { grid_refine(walk(), labels, cam.intrinsics, s0, off); }), ErrorKind::NotFound);
  GridRefineOptions other;
  other.camera_id = "elsewhere";
  EXPECT_EQ(kind_of([&] { grid_refine(walk(), labels, cam.intrinsics, s0, other); }), ErrorKind::NoLabels);
}

TEST(GridRefine, FrameOffsetShiftsLabelLookup) {
  const NudgeState s0 = make_nudge_state(Point3(0, 60, 0));
  const RigCamera cam = long_camera_at(nudged_pose(s0));
  LabelOptions lo;
  lo.frame_offset = 14;
  const auto labels = gen_box_labels(walk(), cam, lo);
  EXPECT_EQ(labels.front().frame_idx, walk().instances.front().instance + 14);
  GridRefineOptions o;
  o.frame_offset = 14;
  o.grid.theta = {0.004, 0.002};
  o.grid.distance = {0.5, 0.25};
  EXPECT_DOUBLE_EQ(grid_refine(walk(), labels, cam.intrinsics, s0, o).containment, 100.0);
}
