#include "gaitanno/rig.hpp"

#include <set>

#include "gaitanno/error.hpp"

namespace gaitanno {

const RigCamera* Rig::find(const std::string& id) const {
  for (const auto& c : cameras) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

RigCamera* Rig::find(const std::string& id) {
  for (auto& c : cameras) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

const RigCamera* Rig::long_camera() const {
  for (const auto& c : cameras) {
    if (c.role == "long") return &c;
  }
  return nullptr;
}

CameraSet Rig::camera_set() const {
  CameraSet set;
  for (const auto& c : cameras) set[c.id] = CameraModel{c.intrinsics, c.pose};
  return set;
}

void Rig::validate() const {
  std::set<std::string> ids;
  for (const auto& c : cameras) {
    if (c.id.empty()) fail(ErrorKind::InvalidArgument, "camera with empty id");
    if (!ids.insert(c.id).second) fail(ErrorKind::InvalidArgument, "duplicate camera id '" + c.id + "'");
    c.intrinsics.validate();
    if (c.width <= 0 || c.height <= 0) {
      fail(ErrorKind::InvalidArgument, "camera '" + c.id + "' has a non-positive image size");
    }
    if (!c.pose.is_valid()) fail(ErrorKind::InvalidArgument, "camera '" + c.id + "' pose is not a rotation");
    if (c.role != "close" && c.role != "long") {
      fail(ErrorKind::InvalidArgument, "camera '" + c.id + "' has unknown role '" + c.role + "'");
    }
  }
  for (const auto& [id, off] : offsets) {
    if (!ids.count(id)) fail(ErrorKind::InvalidArgument, "offset for unknown camera '" + id + "'");
  }
  if (longrange) longrange->validate();
}

bool operator==(const NudgeState& a, const NudgeState& b) {
  return a.base.theta_e == b.base.theta_e && a.base.theta_a == b.base.theta_a &&
         a.base.position == b.base.position && a.d_theta_e == b.d_theta_e &&
         a.d_theta_a == b.d_theta_a && a.d_d == b.d_d && a.placement_axis == b.placement_axis;
}

bool operator==(const Rig& a, const Rig& b) {
  return a.cameras == b.cameras && a.offsets == b.offsets && a.longrange == b.longrange;
}

}  // namespace gaitanno
