#include "gaitanno/triangulate.hpp"

#include <cmath>
#include <limits>

#include "gaitanno/error.hpp"
#include "gaitanno/kernels.hpp"

namespace gaitanno {

RaySystem build_ray_system(std::span<const Ray> rays) {
  const Eigen::Index n = static_cast<Eigen::Index>(rays.size());
  const Eigen::Index pairs = n * (n - 1) / 2;
  RaySystem sys;
  sys.A = Eigen::MatrixXd::Zero(3 * pairs, n);
  sys.b = Eigen::VectorXd::Zero(3 * pairs);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      sys.A.block<3, 1>(row, i) = rays[i].direction;
      sys.A.block<3, 1>(row, j) = -rays[j].direction;
      sys.b.segment<3>(row) = rays[j].origin - rays[i].origin;
      row += 3;
    }
  }
  return sys;
}

TriangulationResult triangulate_rays(std::span<const Ray> rays, double max_condition) {
  if (rays.size() < 2) {
    fail(ErrorKind::NotEnoughRays, "need at least 2 rays, got " + std::to_string(rays.size()));
  }
  for (const Ray& r : rays) {
    if (!r.origin.allFinite() || !r.direction.allFinite() || r.direction.norm() == 0.0) {
      fail(ErrorKind::InvalidArgument, "ray with non-finite origin or zero direction");
    }
  }
  const RaySystem sys = build_ray_system(rays);

  const Eigen::VectorXd sv = sys.A.jacobiSvd().singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  const double ratio = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  const double condition = ratio * ratio;
  if (!(condition <= max_condition)) {
    fail(ErrorKind::DegenerateRays, "condition number of A^T A is " + std::to_string(condition));
  }

  const Eigen::VectorXd w = sys.A.colPivHouseholderQr().solve(sys.b);

  TriangulationResult out;
  out.condition = condition;
  out.per_ray_params.assign(w.data(), w.data() + w.size());
  std::vector<Point3> ends(rays.size());
  Point3 sum = Point3::Zero();
  for (std::size_t i = 0; i < rays.size(); ++i) {
    ends[i] = rays[i].origin + w(static_cast<Eigen::Index>(i)) * rays[i].direction;
    sum += ends[i];
  }
  out.point = sum / static_cast<double>(rays.size());
  double sq = 0.0;
  for (const Point3& e : ends) sq += (e - out.point).squaredNorm();
  out.rms_ray_gap = std::sqrt(sq / static_cast<double>(rays.size()));
  return out;
}

TriangulationResult triangulate_joint(std::span<const JointObservation> obs, const CameraSet& cameras,
                                      const TriangulationOptions& opts) {
  std::vector<Ray> rays;
  rays.reserve(obs.size());
  for (const JointObservation& o : obs) {
    if (o.confidence < 0.0 || o.confidence > 1.0) {
      fail(ErrorKind::InvalidArgument, "confidence outside [0, 1]");
    }
    if (o.confidence < opts.confidence_floor) continue;
    const auto it = cameras.find(o.camera_id);
    if (it == cameras.end()) {
      fail(ErrorKind::NotFound, "unknown camera '" + o.camera_id + "'");
    }
    rays.push_back(pixel_ray(o.pixel, it->second.intrinsics, it->second.pose));
  }
  if (rays.size() < 2) {
    fail(ErrorKind::TooFewConfidentViews,
         std::to_string(rays.size()) + " confident view(s), need at least 2");
  }
  return triangulate_rays(rays, opts.max_condition);
}

SkeletonTrack3D triangulate_sequence(const CaptureSession& session, const CameraSet& cameras,
                                     const FrameOffsets& offsets, const SequenceOptions& opts) {
  if (session.streams.empty() || session.schema.size() == 0) {
    fail(ErrorKind::EmptySession, "session has no streams or an empty joint schema");
  }
  for (const CameraInfo& cam : session.cameras) {
    if (cameras.find(cam.id) == cameras.end()) {
      fail(ErrorKind::NotFound, "no calibration for camera '" + cam.id + "'");
    }
  }
  std::vector<SyncInstance> instances = align_frames(session, offsets);
  if (opts.max_instances > 0 && instances.size() > opts.max_instances) {
    instances.resize(opts.max_instances);
  }

  SkeletonTrack3D track;
  track.schema = session.schema;
  track.instances = opts.execution == Execution::Serial
                        ? kernels::triangulate_instances_serial(session, instances, cameras,
                                                                opts.triangulation)
                        : kernels::triangulate_instances_omp(session, instances, cameras,
                                                             opts.triangulation);
  return track;
}

}  // namespace gaitanno
