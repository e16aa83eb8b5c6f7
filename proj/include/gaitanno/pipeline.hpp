#pragma once

// The outdoor annotation pipeline: triangulate the close cameras with their
// initial extrinsics, bundle-adjust, re-triangulate every instance with the
// refined extrinsics, align the long-range camera and reproject the track
// into it.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaitanno/bundle_adjust.hpp"
#include "gaitanno/eval.hpp"
#include "gaitanno/execution.hpp"
#include "gaitanno/longrange.hpp"
#include "gaitanno/rig.hpp"
#include "gaitanno/session.hpp"
#include "gaitanno/triangulate.hpp"

namespace gaitanno {

// Reprojection of every instance into one camera; frame_idx = instance +
// frame_offset. Joints that are gaps or behind the camera are skipped.
std::vector<FrameKeypoints> reproject_track(const SkeletonTrack3D& track, const std::string& camera_id,
                                            const CameraIntrinsics& intr, const CameraPose& pose,
                                            int frame_offset = 0);

struct OffsetSearchOptions {
  int window = 20;              // candidates -window..window
  std::size_t instances = 200;  // instances scored per candidate
  TriangulationOptions triangulation;
};

// Integer frame offsets relative to the first session camera, each chosen to
// minimize the mean two-view ray gap against that camera. Throws NoOverlap
// when a camera never overlaps the reference.
FrameOffsets estimate_offsets(const CaptureSession& session, const CameraSet& cameras,
                              const OffsetSearchOptions& opts = {});

struct PipelineOptions {
  std::size_t ba_instances = 400;  // instances triangulated for bundle adjustment
  TriangulationOptions triangulation;
  BuildOptions build;
  BAOptions ba;
  bool bundle_adjust = true;
  GridSpec grid;
  Execution execution = Execution::Parallel;
};

struct PipelineResult {
  Rig rig;                      // refined close cameras and long camera
  SkeletonTrack3D ba_track;     // triangulated with the initial extrinsics
  SkeletonTrack3D track;        // re-triangulated with the refined extrinsics
  std::optional<BAReport> ba;
  std::optional<GridRefineResult> longrange;
  ErrorReport error;            // close cameras, refined extrinsics
  std::vector<FrameKeypoints> long_keypoints;
};

// `long_labels` are the boxes used to align the long camera; with none, the
// long camera keeps its initial pose. Offsets come from the session.
PipelineResult run_pipeline(const CaptureSession& session, const Rig& initial,
                            std::span<const BoxLabel> long_labels, const PipelineOptions& opts = {});

}  // namespace gaitanno
