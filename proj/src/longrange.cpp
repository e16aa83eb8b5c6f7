#include "gaitanno/longrange.hpp"

#include <cmath>
#include <limits>

#include "gaitanno/error.hpp"
#include "gaitanno/kernels.hpp"

namespace gaitanno {
namespace {

struct LabeledJoints {
  std::vector<Point3> points;
  std::vector<std::uint32_t> rect_index;
  std::vector<Rect> rects;
};

LabeledJoints collect_labeled(const SkeletonTrack3D& track, std::span<const BoxLabel> boxes,
                              const GridRefineOptions& opts) {
  LabeledJoints out;
  for (const BoxLabel& box : boxes) {
    if (!opts.camera_id.empty() && box.camera_id != opts.camera_id) continue;
    const std::int64_t instance = box.frame_idx - opts.frame_offset;
    const TrackInstance* inst = track.find(instance);
    if (inst == nullptr) {
      fail(ErrorKind::NotFound, "label for frame " + std::to_string(box.frame_idx) +
                                    " has no track instance " + std::to_string(instance));
    }
    const auto r = static_cast<std::uint32_t>(out.rects.size());
    out.rects.push_back(box.rect);
    for (const auto& j : inst->joints) {
      if (!j) continue;
      out.points.push_back(j->point);
      out.rect_index.push_back(r);
    }
  }
  return out;
}

std::vector<std::uint32_t> run_grid(const kernels::ContainmentGridProblem& p, Execution exec) {
  return exec == Execution::Serial ? kernels::containment_grid_serial(p)
                                   : kernels::containment_grid_omp(p);
}

double tie_metric(const Eigen::Vector3d& d) {
  return std::abs(d.x()) + std::abs(d.y()) + std::abs(d.z()) / 10.0;
}

}  // namespace

std::string_view to_string(PlacementAxis axis) {
  switch (axis) {
    case PlacementAxis::PosX: return "+X";
    case PlacementAxis::NegX: return "-X";
    case PlacementAxis::PosY: return "+Y";
    case PlacementAxis::NegY: return "-Y";
  }
  return "?";
}

PlacementAxis placement_axis_from_string(std::string_view s) {
  if (s == "+X" || s == "X") return PlacementAxis::PosX;
  if (s == "-X") return PlacementAxis::NegX;
  if (s == "+Y" || s == "Y") return PlacementAxis::PosY;
  if (s == "-Y") return PlacementAxis::NegY;
  fail(ErrorKind::InvalidArgument, "unknown placement axis '" + std::string(s) + "'");
}

Vec3 axis_vector(PlacementAxis axis) {
  switch (axis) {
    case PlacementAxis::PosX: return Vec3::UnitX();
    case PlacementAxis::NegX: return -Vec3::UnitX();
    case PlacementAxis::PosY: return Vec3::UnitY();
    case PlacementAxis::NegY: return -Vec3::UnitY();
  }
  return Vec3::UnitY();
}

void NudgeState::validate() const {
  const bool finite = std::isfinite(d_theta_e) && std::isfinite(d_theta_a) && std::isfinite(d_d) &&
                      std::isfinite(base.theta_e) && std::isfinite(base.theta_a) &&
                      base.position.allFinite();
  if (!finite) fail(ErrorKind::InvalidArgument, "nudge state has non-finite values");
  if (std::abs(d_theta_e) > kMaxAngleNudge || std::abs(d_theta_a) > kMaxAngleNudge) {
    fail(ErrorKind::InvalidArgument, "angle nudges are limited to 0.5 rad");
  }
}

NudgeState make_nudge_state(const Point3& position, PlacementAxis axis) {
  NudgeState s;
  s.base = rotation_from_position(position).second;
  s.placement_axis = axis;
  return s;
}

CameraPose nudged_pose(const NudgeState& state) {
  CameraPose pose;
  pose.R = rotation_from_angles(state.base.theta_e + state.d_theta_e, state.base.theta_a + state.d_theta_a);
  pose.t = state.base.position + state.d_d * axis_vector(state.placement_axis);
  return pose;
}

int GridAxis::half_count() const {
  if (!(step > 0.0) || !(half_range >= 0.0)) fail(ErrorKind::EmptyGrid, "grid axis needs step > 0");
  return static_cast<int>(std::lround(half_range / step));
}

std::size_t GridSpec::size() const {
  const auto nt = static_cast<std::size_t>(2 * theta.half_count() + 1);
  const auto nd = static_cast<std::size_t>(2 * distance.half_count() + 1);
  return nt * nt * nd;
}

GridRefineResult grid_refine(const SkeletonTrack3D& track, std::span<const BoxLabel> boxes,
                             const CameraIntrinsics& intr, const NudgeState& state0,
                             const GridRefineOptions& opts) {
  state0.validate();
  LabeledJoints labeled = collect_labeled(track, boxes, opts);
  if (labeled.rects.size() < 10) {
    fail(ErrorKind::NoLabels, "grid refinement needs at least 10 labeled frames, got " +
                                  std::to_string(labeled.rects.size()));
  }
  const int nt = opts.grid.theta.half_count();
  const int nd = opts.grid.distance.half_count();

  kernels::ContainmentGridProblem p;
  p.intrinsics = intr;
  p.base = state0;
  p.deltas.reserve(opts.grid.size());
  for (int ie = -nt; ie <= nt; ++ie) {
    for (int ia = -nt; ia <= nt; ++ia) {
      for (int id = -nd; id <= nd; ++id) {
        const Eigen::Vector3d d(state0.d_theta_e + opts.grid.theta.value(ie),
                                state0.d_theta_a + opts.grid.theta.value(ia),
                                state0.d_d + opts.grid.distance.value(id));
        if (std::abs(d.x()) > kMaxAngleNudge || std::abs(d.y()) > kMaxAngleNudge) continue;
        p.deltas.push_back(d);
      }
    }
  }
  if (p.deltas.empty()) fail(ErrorKind::EmptyGrid, "grid has no admissible points");
  p.points = std::move(labeled.points);
  p.rect_index = std::move(labeled.rect_index);
  p.rects = std::move(labeled.rects);

  const std::vector<std::uint32_t> counts = run_grid(p, opts.execution);
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] > counts[best] ||
        (counts[i] == counts[best] && tie_metric(p.deltas[i]) < tie_metric(p.deltas[best]))) {
      best = i;
    }
  }

  GridRefineResult out;
  out.state = state0;
  out.state.d_theta_e = p.deltas[best].x();
  out.state.d_theta_a = p.deltas[best].y();
  out.state.d_d = p.deltas[best].z();
  out.frames = p.rects.size();
  out.grid_points = p.deltas.size();
  out.containment = p.points.empty() ? 0.0
                                     : 100.0 * static_cast<double>(counts[best]) /
                                           static_cast<double>(p.points.size());
  out.flagged = counts[best] == 0;
  return out;
}

double containment_for_state(const SkeletonTrack3D& track, std::span<const BoxLabel> boxes,
                             const CameraIntrinsics& intr, const NudgeState& state,
                             const GridRefineOptions& opts) {
  state.validate();
  LabeledJoints labeled = collect_labeled(track, boxes, opts);
  if (labeled.rects.empty()) fail(ErrorKind::NoLabels, "no bounding-box labels");
  if (labeled.points.empty()) return 0.0;
  kernels::ContainmentGridProblem p;
  p.intrinsics = intr;
  p.base = state;
  p.deltas = {Eigen::Vector3d(state.d_theta_e, state.d_theta_a, state.d_d)};
  p.points = std::move(labeled.points);
  p.rect_index = std::move(labeled.rect_index);
  p.rects = std::move(labeled.rects);
  const auto counts = kernels::containment_grid_serial(p);
  return 100.0 * static_cast<double>(counts[0]) / static_cast<double>(p.points.size());
}

}  // namespace gaitanno
