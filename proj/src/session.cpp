#include "gaitanno/session.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gaitanno/error.hpp"

namespace gaitanno {

std::optional<std::size_t> JointSchema::index_of(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

JointSchema JointSchema::gait33() {
  return JointSchema{{"LFHD", "RFHD", "LBHD", "RBHD", "C7",   "T10",  "CLAV", "STRN", "RBAK",
                      "LSHO", "LELB", "LWRA", "LWRB", "LFIN", "RSHO", "RELB", "RWRA", "RWRB",
                      "RFIN", "LASI", "RASI", "LPSI", "RPSI", "LTHI", "LKNE", "LANK", "LHEE",
                      "LTOE", "RTHI", "RKNE", "RANK", "RHEE", "RTOE"}};
}

const Frame* DetectionStream::find(std::int64_t frame_idx) const {
  const auto it = std::lower_bound(frames.begin(), frames.end(), frame_idx,
                                   [](const Frame& f, std::int64_t idx) { return f.frame_idx < idx; });
  if (it == frames.end() || it->frame_idx != frame_idx) return nullptr;
  return &*it;
}

void CaptureSession::validate() const {
  if (streams.size() != cameras.size()) {
    fail(ErrorKind::InvalidArgument, "session has " + std::to_string(cameras.size()) +
                                         " cameras but " + std::to_string(streams.size()) +
                                         " detection streams");
  }
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    cameras[c].intrinsics.validate();
    const DetectionStream& s = streams[c];
    if (s.camera_id != cameras[c].id) {
      fail(ErrorKind::InvalidArgument, "stream " + std::to_string(c) + " belongs to camera '" +
                                           s.camera_id + "', expected '" + cameras[c].id + "'");
    }
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      const Frame& f = s.frames[i];
      if (f.joints.size() != schema.size()) {
        fail(ErrorKind::InvalidArgument, "camera '" + s.camera_id + "' frame " +
                                             std::to_string(f.frame_idx) + " has " +
                                             std::to_string(f.joints.size()) + " joint slots");
      }
      if (i > 0 && (f.frame_idx <= s.frames[i - 1].frame_idx ||
                    f.timestamp_ms <= s.frames[i - 1].timestamp_ms)) {
        fail(ErrorKind::InvalidArgument, "camera '" + s.camera_id +
                                             "' frames are not strictly increasing at frame " +
                                             std::to_string(f.frame_idx));
      }
    }
  }
}

const DetectionStream* CaptureSession::stream(const std::string& camera_id) const {
  for (const auto& s : streams) {
    if (s.camera_id == camera_id) return &s;
  }
  return nullptr;
}

int CaptureSession::offset(const std::string& camera_id) const {
  const auto it = offsets.find(camera_id);
  return it == offsets.end() ? 0 : it->second;
}

std::vector<SyncInstance> align_frames(const CaptureSession& session, const FrameOffsets& offsets) {
  if (session.streams.empty()) {
    fail(ErrorKind::EmptySession, "session has no detection streams");
  }
  std::vector<int> off(session.streams.size(), 0);
  for (std::size_t c = 0; c < session.streams.size(); ++c) {
    const auto it = offsets.find(session.streams[c].camera_id);
    if (it != offsets.end()) off[c] = it->second;
  }

  std::int64_t k_lo = std::numeric_limits<std::int64_t>::min();
  std::int64_t k_hi = std::numeric_limits<std::int64_t>::max();
  for (std::size_t c = 0; c < session.streams.size(); ++c) {
    const auto& frames = session.streams[c].frames;
    if (frames.empty()) {
      fail(ErrorKind::NoOverlap, "camera '" + session.streams[c].camera_id + "' has no frames");
    }
    k_lo = std::max(k_lo, frames.front().frame_idx - off[c]);
    k_hi = std::min(k_hi, frames.back().frame_idx - off[c]);
  }

  std::vector<SyncInstance> out;
  for (std::int64_t k = k_lo; k <= k_hi; ++k) {
    SyncInstance inst;
    inst.k = k;
    inst.frame_index.reserve(session.streams.size());
    bool complete = true;
    for (std::size_t c = 0; c < session.streams.size(); ++c) {
      const DetectionStream& s = session.streams[c];
      const Frame* f = s.find(k + off[c]);
      if (f == nullptr) {
        complete = false;
        break;
      }
      inst.frame_index.push_back(static_cast<std::size_t>(f - s.frames.data()));
    }
    if (!complete) continue;
    inst.time_ms = session.streams[0].frames[inst.frame_index[0]].timestamp_ms;
    out.push_back(std::move(inst));
  }
  if (out.empty()) {
    fail(ErrorKind::NoOverlap, "frame offsets leave no common instances");
  }
  return out;
}

void SkeletonTrack3D::validate() const {
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const TrackInstance& inst = instances[i];
    if (inst.joints.size() != schema.size()) {
      fail(ErrorKind::InvalidArgument, "track instance " + std::to_string(inst.instance) + " has " +
                                           std::to_string(inst.joints.size()) + " joint slots");
    }
    if (!std::isfinite(inst.time_ms) || (i > 0 && inst.time_ms <= instances[i - 1].time_ms)) {
      fail(ErrorKind::InvalidArgument, "track times are not strictly increasing at instance " +
                                           std::to_string(inst.instance));
    }
  }
}

const TrackInstance* SkeletonTrack3D::find(std::int64_t instance) const {
  const auto it = std::lower_bound(
      instances.begin(), instances.end(), instance,
      [](const TrackInstance& t, std::int64_t k) { return t.instance < k; });
  if (it == instances.end() || it->instance != instance) return nullptr;
  return &*it;
}

}  // namespace gaitanno
