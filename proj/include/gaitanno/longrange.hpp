#pragma once

#include <span>
#include <string>
#include <string_view>

#include "gaitanno/eval.hpp"
#include "gaitanno/execution.hpp"
#include "gaitanno/geometry.hpp"
#include "gaitanno/session.hpp"

namespace gaitanno {

// World axis the long-range camera sits on; Δd moves the camera along it.
enum class PlacementAxis { PosX, NegX, PosY, NegY };

std::string_view to_string(PlacementAxis axis);
PlacementAxis placement_axis_from_string(std::string_view s);
Vec3 axis_vector(PlacementAxis axis);

// Three interpretable nudges on top of the elevation/azimuth initial estimate:
// d_theta_e moves the reprojected skeleton vertically, d_theta_a horizontally,
// and d_d (meters along the placement axis) scales it.
struct NudgeState {
  SphericalExtrinsic base;
  double d_theta_e = 0.0;
  double d_theta_a = 0.0;
  double d_d = 0.0;
  PlacementAxis placement_axis = PlacementAxis::PosY;

  void validate() const;  // |d_theta_*| <= 0.5 rad, finite values
};

inline constexpr double kMaxAngleNudge = 0.5;

NudgeState make_nudge_state(const Point3& position, PlacementAxis axis = PlacementAxis::PosY);

// R = Rz(theta_a + d_theta_a) * Rx(theta_e + d_theta_e), t = position + d_d * axis.
CameraPose nudged_pose(const NudgeState& state);

// Symmetric grid j * step for j in [-n, n], n = round(half_range / step).
struct GridAxis {
  double half_range = 0.0;
  double step = 1.0;

  int half_count() const;
  double value(int j) const { return static_cast<double>(j) * step; }
};

struct GridSpec {
  GridAxis theta{0.05, 0.002};  // applied to both d_theta_e and d_theta_a
  GridAxis distance{5.0, 0.25};

  std::size_t size() const;
};

struct GridRefineOptions {
  GridSpec grid;
  std::string camera_id;  // labels for other cameras are ignored; empty keeps all
  int frame_offset = 0;   // label frame_idx = track instance + frame_offset
  Execution execution = Execution::Parallel;
};

struct GridRefineResult {
  NudgeState state;
  double containment = 0.0;  // percent of labeled keypoints inside their boxes
  bool flagged = false;      // no grid point contained any keypoint
  std::size_t frames = 0;
  std::size_t grid_points = 0;
};

// Exhaustive search over (d_theta_e, d_theta_a, d_d) offsets from state0's
// deltas, maximizing bounding-box containment. Ties go to the smallest
// |d_theta_e| + |d_theta_a| + |d_d| / 10. Throws NoLabels (fewer than 10
// labeled frames), EmptyGrid and NotFound (label without a track instance).
GridRefineResult grid_refine(const SkeletonTrack3D& track, std::span<const BoxLabel> boxes,
                             const CameraIntrinsics& intr, const NudgeState& state0,
                             const GridRefineOptions& opts = {});

// Containment of the reprojected track for a single state, same rules as grid_refine.
double containment_for_state(const SkeletonTrack3D& track, std::span<const BoxLabel> boxes,
                             const CameraIntrinsics& intr, const NudgeState& state,
                             const GridRefineOptions& opts = {});

}  // namespace gaitanno
