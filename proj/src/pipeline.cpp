#include "gaitanno/pipeline.hpp"

#include <limits>

#include "gaitanno/error.hpp"

namespace gaitanno {

std::vector<FrameKeypoints> reproject_track(const SkeletonTrack3D& track, const std::string& camera_id,
                                            const CameraIntrinsics& intr, const CameraPose& pose,
                                            int frame_offset) {
  std::vector<FrameKeypoints> out;
  out.reserve(track.instances.size());
  for (const TrackInstance& inst : track.instances) {
    FrameKeypoints fk{camera_id, inst.instance + frame_offset, {}};
    for (const auto& j : inst.joints) {
      if (!j) continue;
      const Vec3 pc = to_camera(j->point, pose);
      if (pc.z() > kDepthEpsilon) fk.points.push_back(project_camera_point(pc, intr));
    }
    out.push_back(std::move(fk));
  }
  return out;
}

FrameOffsets estimate_offsets(const CaptureSession& session, const CameraSet& cameras,
                              const OffsetSearchOptions& opts) {
  if (session.cameras.empty()) fail(ErrorKind::EmptySession, "session has no cameras");
  const auto model = [&](const std::string& id) -> const CameraModel& {
    const auto it = cameras.find(id);
    if (it == cameras.end()) fail(ErrorKind::NotFound, "no calibration for camera '" + id + "'");
    return it->second;
  };
  constexpr std::size_t kMinPairs = 30;
  const DetectionStream& ref = session.streams[0];
  const CameraModel& ref_model = model(session.cameras[0].id);
  const std::size_t n_ref = std::min(ref.frames.size(), opts.instances);

  FrameOffsets out;
  out[session.cameras[0].id] = 0;
  for (std::size_t c = 1; c < session.cameras.size(); ++c) {
    const CameraModel& m = model(session.cameras[c].id);
    const DetectionStream& stream = session.streams[c];
    double best_score = std::numeric_limits<double>::infinity();
    int best = 0;
    for (int o = -opts.window; o <= opts.window; ++o) {
      double sum = 0.0;
      std::size_t pairs = 0;
      for (std::size_t i = 0; i < n_ref; ++i) {
        const Frame& fr = ref.frames[i];
        const Frame* fc = stream.find(fr.frame_idx + o);
        if (fc == nullptr) continue;
        for (std::size_t j = 0; j < session.schema.size(); ++j) {
          const auto& a = fr.joints[j];
          const auto& b = fc->joints[j];
          if (!a || !b || a->confidence < opts.triangulation.confidence_floor ||
              b->confidence < opts.triangulation.confidence_floor) {
            continue;
          }
          const Ray rays[2] = {pixel_ray(a->pixel(), ref_model.intrinsics, ref_model.pose),
                               pixel_ray(b->pixel(), m.intrinsics, m.pose)};
          try {
            sum += triangulate_rays(rays, opts.triangulation.max_condition).rms_ray_gap;
            ++pairs;
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegenerateRays) throw;
          }
        }
      }
      if (pairs < kMinPairs) continue;
      const double score = sum / static_cast<double>(pairs);
      if (score < best_score || (score == best_score && std::abs(o) < std::abs(best))) {
        best_score = score;
        best = o;
      }
    }
    if (!std::isfinite(best_score)) {
      fail(ErrorKind::NoOverlap, "camera '" + session.cameras[c].id + "' never overlaps the reference camera");
    }
    out[session.cameras[c].id] = best;
  }
  return out;
}

PipelineResult run_pipeline(const CaptureSession& session, const Rig& initial,
                            std::span<const BoxLabel> long_labels, const PipelineOptions& opts) {
  session.validate();
  PipelineResult out;
  out.rig = initial;

  SequenceOptions seq;
  seq.triangulation = opts.triangulation;
  seq.execution = opts.execution;
  seq.max_instances = opts.ba_instances;
  out.ba_track = triangulate_sequence(session, initial.camera_set(), session.offsets, seq);

  if (opts.bundle_adjust) {
    BuildOptions build = opts.build;
    build.confidence_floor = opts.triangulation.confidence_floor;
    const BAProblem problem = build_problem(session, initial, out.ba_track, build);
    BAOptions ba = opts.ba;
    ba.execution = opts.execution;
    const BAResult result = optimize(problem, ba);
    apply_to_rig(problem, result, out.rig);
    out.ba = result.report;
  }

  seq.max_instances = 0;
  const CameraSet refined = out.rig.camera_set();
  out.track = triangulate_sequence(session, refined, session.offsets, seq);
  out.error = error_report(session, refined, out.track, ErrorReportOptions{opts.triangulation.confidence_floor, 0.5});

  if (const RigCamera* lc = out.rig.long_camera()) {
    const int offset = out.rig.offsets.count(lc->id) ? out.rig.offsets.at(lc->id) : 0;
    if (!long_labels.empty()) {
      const NudgeState state0 = out.rig.longrange ? *out.rig.longrange : make_nudge_state(lc->pose.t);
      GridRefineOptions gopts;
      gopts.grid = opts.grid;
      gopts.camera_id = lc->id;
      gopts.frame_offset = offset;
      gopts.execution = opts.execution;
      out.longrange = grid_refine(out.track, long_labels, lc->intrinsics, state0, gopts);
      out.rig.longrange = out.longrange->state;
      out.rig.find(lc->id)->pose = nudged_pose(out.longrange->state);
    }
    const RigCamera* lc2 = out.rig.long_camera();
    out.long_keypoints = reproject_track(out.track, lc2->id, lc2->intrinsics, lc2->pose, offset);
  }
  return out;
}

}  // namespace gaitanno
