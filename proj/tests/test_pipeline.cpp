#include <gtest/gtest.h>

#include "gaitanno/error.hpp"
#include "gaitanno/pipeline.hpp"
#include "test_util.hpp"

using namespace gaitanno;

namespace {

struct Setup {
  testutil::SmallScene scene;
  std::vector<BoxLabel> labels;
};

const Setup& setup() {
  static const Setup s = [] {
    Setup x;
    x.scene = testutil::small_scene(2.0, 0.05, 111, 8.0);
    x.labels = gen_box_labels(x.scene.truth, *x.scene.rig.truth.long_camera());
    return x;
  }();
  return s;
}

PipelineOptions fast() {
  PipelineOptions o;
  o.grid.theta = {0.02, 0.002};
  o.grid.distance = {2.0, 0.25};
  return o;
}

}  // namespace

TEST(Offsets, RecoversInjectedDelay) {
  const auto& sc = setup().scene;
  RenderOptions ro;
  ro.noise_sigma = 2.0;
  ro.dropout = 0.05;
  ro.seed = 5;
  ro.offsets = {{"cam1", 14}, {"cam2", -6}};
  CaptureSession session = render_detections(sc.truth, sc.close, ro).session;
  session.offsets.clear();
  const FrameOffsets est = estimate_offsets(session, sc.rig.truth.camera_set());
  EXPECT_EQ(est.at("cam0"), 0);
  EXPECT_EQ(est.at("cam1"), 14);
  EXPECT_EQ(est.at("cam2"), -6);
}

TEST(Offsets, NoOverlapWhenStreamsNeverMeet) {
  const auto& sc = setup().scene;
  RenderOptions ro;
  ro.offsets = {{"cam1", 5000}};
  CaptureSession session = render_detections(sc.truth, sc.close, ro).session;
  try {
    estimate_offsets(session, sc.rig.truth.camera_set());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoOverlap);
  }
}

TEST(ReprojectTrack, AppliesFrameOffset) {
  const auto& sc = setup().scene;
  const RigCamera* lc = sc.rig.truth.long_camera();
  const auto kp = reproject_track(sc.truth, lc->id, lc->intrinsics, lc->pose, 14);
  ASSERT_EQ(kp.size(), sc.truth.instances.size());
  EXPECT_EQ(kp[3].frame_idx, sc.truth.instances[3].instance + 14);
  EXPECT_EQ(kp[3].points.size(), 33u);
  EXPECT_EQ(kp[3].points[2], project(sc.truth.instances[3].joints[2]->point, lc->intrinsics, lc->pose));
}

TEST(Pipeline, EndToEndOnShortWalk) {
  const auto& s = setup();
  const PipelineResult r = run_pipeline(s.scene.render.session, s.scene.rig.initial, s.labels, fast());
  ASSERT_TRUE(r.ba.has_value());
  EXPECT_LT(r.ba->mean_residual_after, r.ba->mean_residual_before);
  EXPECT_EQ(r.ba_track.instances.size(), s.scene.truth.instances.size());
  EXPECT_EQ(r.track.instances.size(), s.scene.truth.instances.size());
  ASSERT_TRUE(r.longrange.has_value());
  EXPECT_GT(r.longrange->containment, 90.0);
  EXPECT_EQ(*r.rig.longrange, r.longrange->state);
  EXPECT_EQ(r.rig.long_camera()->pose, nudged_pose(r.longrange->state));
  const ContainmentResult c = bbox_containment(r.long_keypoints, s.labels);
  EXPECT_DOUBLE_EQ(c.percentage, r.longrange->containment);
  EXPECT_EQ(r.error.cameras.size(), 3u);
  EXPECT_EQ(r.rig.find("cam0")->pose, s.scene.rig.initial.find("cam0")->pose);
}

TEST(Pipeline, DeterministicAcrossRunsAndExecutionModes) {
  const auto& s = setup();
  PipelineOptions a = fast(), b = fast();
  b.execution = Execution::Serial;
  const PipelineResult r1 = run_pipeline(s.scene.render.session, s.scene.rig.initial, s.labels, a);
  const PipelineResult r2 = run_pipeline(s.scene.render.session, s.scene.rig.initial, s.labels, a);
  EXPECT_EQ(r1.track, r2.track);
  EXPECT_EQ(r1.ba, r2.ba);
  EXPECT_EQ(r1.rig, r2.rig);
  EXPECT_EQ(r1.error, r2.error);
  const PipelineResult r3 = run_pipeline(s.scene.render.session, s.scene.rig.initial, s.labels, b);
  EXPECT_EQ(r1.longrange->state, r3.longrange->state);
  EXPECT_NEAR(r1.ba->final_cost, r3.ba->final_cost, 1e-9 * r1.ba->final_cost);
}

TEST(Pipeline, WithoutLabelsLongCameraKeepsInitialPose) {
  const auto& s = setup();
  PipelineOptions o = fast();
  o.bundle_adjust = false;
  const PipelineResult r = run_pipeline(s.scene.render.session, s.scene.rig.initial, {}, o);
  EXPECT_FALSE(r.ba.has_value());
  EXPECT_FALSE(r.longrange.has_value());
  EXPECT_EQ(r.rig, s.scene.rig.initial);
  EXPECT_EQ(r.long_keypoints.size(), r.track.instances.size());
}
