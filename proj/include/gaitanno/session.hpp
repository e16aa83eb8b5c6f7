#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gaitanno/geometry.hpp"

namespace gaitanno {

// Ordered list of joint (marker) names. Detection and track files refer to
// joints by these names; everything in memory refers to them by index.
struct JointSchema {
  std::vector<std::string> names;

  std::size_t size() const { return names.size(); }
  std::optional<std::size_t> index_of(const std::string& name) const;

  // 33 Plug-in-Gait style markers used by the synthetic walker.
  static JointSchema gait33();

  friend bool operator==(const JointSchema&, const JointSchema&) = default;
};

struct Detection {
  double u = 0.0;
  double v = 0.0;
  double confidence = 1.0;

  Pixel pixel() const { return {u, v}; }
  friend bool operator==(const Detection&, const Detection&) = default;
};

struct Frame {
  std::int64_t frame_idx = 0;
  double timestamp_ms = 0.0;
  std::vector<std::optional<Detection>> joints;  // one slot per schema joint

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct DetectionStream {
  std::string camera_id;
  std::vector<Frame> frames;  // ordered by frame_idx

  const Frame* find(std::int64_t frame_idx) const;
  friend bool operator==(const DetectionStream&, const DetectionStream&) = default;
};

struct CameraInfo {
  std::string id;
  CameraIntrinsics intrinsics;
  int width = 1280;
  int height = 720;

  friend bool operator==(const CameraInfo&, const CameraInfo&) = default;
};

struct CameraModel {
  CameraIntrinsics intrinsics;
  CameraPose pose;
};
using CameraSet = std::map<std::string, CameraModel>;

using FrameOffsets = std::map<std::string, int>;

struct CaptureSession {
  std::string subject;
  JointSchema schema;
  std::vector<CameraInfo> cameras;
  std::vector<DetectionStream> streams;  // parallel to cameras
  FrameOffsets offsets;                  // missing entries mean 0

  // Checks stream/camera pairing, joint slot counts and strictly increasing
  // timestamps and frame indices. Throws InvalidArgument.
  void validate() const;
  const DetectionStream* stream(const std::string& camera_id) const;
  int offset(const std::string& camera_id) const;
};

// One synchronized time instance: instance k pairs frame (k + offset_c) of
// every camera c.
struct SyncInstance {
  std::int64_t k = 0;
  double time_ms = 0.0;                  // timestamp of the first camera's frame
  std::vector<std::size_t> frame_index;  // position in each stream's frame vector
};

// Throws NoOverlap when no instance has a frame in every camera.
std::vector<SyncInstance> align_frames(const CaptureSession& session, const FrameOffsets& offsets);

struct JointEstimate {
  Point3 point = Point3::Zero();
  double rms_ray_gap = 0.0;
  double condition = 0.0;
  int views = 0;

  friend bool operator==(const JointEstimate& a, const JointEstimate& b) {
    return a.point == b.point && a.rms_ray_gap == b.rms_ray_gap && a.condition == b.condition &&
           a.views == b.views;
  }
};

struct TrackInstance {
  std::int64_t instance = 0;
  double time_ms = 0.0;
  std::vector<std::optional<JointEstimate>> joints;  // std::nullopt is a gap

  friend bool operator==(const TrackInstance&, const TrackInstance&) = default;
};

struct SkeletonTrack3D {
  JointSchema schema;
  std::vector<TrackInstance> instances;

  void validate() const;  // strictly increasing times, slot counts match schema
  const TrackInstance* find(std::int64_t instance) const;
  friend bool operator==(const SkeletonTrack3D&, const SkeletonTrack3D&) = default;
};

}  // namespace gaitanno
