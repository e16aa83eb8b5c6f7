#pragma once

// Synthetic scenes with known ground truth: a walking marker skeleton, a
// camera rig around it and noisy detections rendered through the rig.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gaitanno/eval.hpp"
#include "gaitanno/geometry.hpp"
#include "gaitanno/longrange.hpp"
#include "gaitanno/rig.hpp"
#include "gaitanno/session.hpp"

namespace gaitanno {

struct WalkerSpec {
  std::size_t joints = 33;  // 33 uses the marker skeleton, other counts a rigid column
  double height = 1.75;     // meters
  double semi_major = 3.0;  // elliptic path along world x, meters
  double semi_minor = 1.5;  // along world y
  double speed = 1.3;       // m/s
  double duration_s = 120.0;
  double frame_rate = 30.0;
  double stride_length = 1.4;  // meters walked per gait cycle

  void validate() const;
  std::size_t instances() const;
};

// Marker pairs whose distance the walker keeps constant.
std::vector<std::pair<std::size_t, std::size_t>> walker_bones(const WalkerSpec& spec);

// Deterministic per seed; the seed picks the starting point on the path and
// the gait phase.
SkeletonTrack3D gen_walker(const WalkerSpec& spec, std::uint64_t seed);

struct RigSpec {
  std::size_t close_cameras = 3;
  double radius = 8.0;
  std::vector<double> heights{1.6, 2.0, 2.4};  // cycled when shorter than close_cameras
  double first_azimuth = -1.5707963267948966;  // radians, about world z
  Point3 target{0.0, 0.0, 1.0};                // close cameras look here
  bool long_camera = true;
  double long_distance = 60.0;
  PlacementAxis long_axis = PlacementAxis::PosY;
  CameraIntrinsics intrinsics{900.0, 900.0, 640.0, 360.0, 0.0, {}};
  int width = 1280;
  int height = 720;
  // Tape-measure error of the initial poses: per-axis position noise and,
  // for close cameras, a random rotation of this angular scale.
  double position_sigma = 0.0;
  double rotation_sigma = 0.0;
  double long_position_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthRig {
  Rig truth;    // exact look-at poses; the first close camera is fixed
  Rig initial;  // perturbed; the fixed camera keeps its true pose
};

// Close camera ids are "cam0".."camN-1", the long camera is "long".
// Initial close poses look exactly at the target from the perturbed position;
// the initial long pose is the elevation/azimuth construction at its
// perturbed position, recorded as the rig's NudgeState.
SynthRig gen_rig(const RigSpec& spec);

struct RenderOptions {
  double noise_sigma = 0.0;  // pixels, per axis
  double dropout = 0.0;      // probability of dropping a detection
  std::uint64_t seed = 0;
  FrameOffsets offsets;      // frame_idx = instance + offset
  double frame_rate = 30.0;
};

struct RenderResult {
  CaptureSession session;
  std::vector<DetectionStream> truth;  // exact projections of every in-frame joint
};

// One stream per camera. A detection is dropped when its uniform draw u is
// below the dropout rate; kept detections get confidence 1 - 0.5 u. Joints
// behind the camera or outside the image are omitted.
RenderResult render_detections(const SkeletonTrack3D& track, const std::vector<RigCamera>& cameras,
                               const RenderOptions& opts);

struct LabelOptions {
  double inflate = 0.1;     // fractional growth of width and height
  std::size_t every = 1;    // label every n-th instance
  int frame_offset = 0;     // frame_idx = instance + frame_offset
  std::string subject = "synthetic";
};

// Ground-truth boxes: bounding rectangle of the exactly projected joints.
std::vector<BoxLabel> gen_box_labels(const SkeletonTrack3D& track, const RigCamera& camera,
                                     const LabelOptions& opts = {});

}  // namespace gaitanno
