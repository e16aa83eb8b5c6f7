#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gaitanno/geometry.hpp"
#include "gaitanno/longrange.hpp"
#include "gaitanno/session.hpp"

namespace gaitanno {

struct RigCamera {
  std::string id;
  CameraIntrinsics intrinsics;
  int width = 1280;
  int height = 720;
  CameraPose pose;
  bool fixed = false;          // gauge anchor for bundle adjustment
  std::string role = "close";  // "close" or "long"

  CameraInfo info() const { return {id, intrinsics, width, height}; }
  friend bool operator==(const RigCamera&, const RigCamera&) = default;
};

struct Rig {
  std::vector<RigCamera> cameras;
  FrameOffsets offsets;
  std::optional<NudgeState> longrange;  // refinement state of the role == "long" camera

  const RigCamera* find(const std::string& id) const;
  RigCamera* find(const std::string& id);
  const RigCamera* long_camera() const;
  RigCamera* long_camera() { return const_cast<RigCamera*>(std::as_const(*this).long_camera()); }
  CameraSet camera_set() const;
  // Unique ids, valid intrinsics and rotations. Throws InvalidArgument.
  void validate() const;
};

bool operator==(const NudgeState& a, const NudgeState& b);
bool operator==(const Rig& a, const Rig& b);

}  // namespace gaitanno
