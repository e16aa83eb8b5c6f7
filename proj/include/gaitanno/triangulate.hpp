#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "gaitanno/execution.hpp"
#include "gaitanno/geometry.hpp"
#include "gaitanno/session.hpp"

namespace gaitanno {

struct JointObservation {
  std::string camera_id;
  Pixel pixel;
  double confidence = 1.0;
};

struct TriangulationResult {
  Point3 point = Point3::Zero();
  std::vector<double> per_ray_params;  // w_i, one per input ray
  double rms_ray_gap = 0.0;            // RMS distance of the ray end points from `point`
  double condition = 0.0;              // condition number of A^T A
};

struct TriangulationOptions {
  double confidence_floor = 0.5;
  double max_condition = 1e12;
};

// Stacked pairwise system A w = b. For every ray pair (i, j), i < j, in
// lexicographic order, three rows encode k_i + w_i c_i = k_j + w_j c_j:
//   A[rows, i] = c_i, A[rows, j] = -c_j, b[rows] = k_j - k_i.
// For three rays this is the 9x3 system with row blocks (1,2), (1,3), (2,3).
struct RaySystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};
RaySystem build_ray_system(std::span<const Ray> rays);

// Least-squares intersection of n >= 2 rays; the returned point is the mean
// of the end points k_i + w_i c_i. Throws NotEnoughRays and DegenerateRays
// (condition number of A^T A above max_condition, e.g. parallel rays).
TriangulationResult triangulate_rays(std::span<const Ray> rays, double max_condition = 1e12);

// Turns every observation above the confidence floor into a ray and
// intersects them. Throws TooFewConfidentViews, NotFound for an unknown
// camera, and whatever triangulate_rays throws.
TriangulationResult triangulate_joint(std::span<const JointObservation> obs, const CameraSet& cameras,
                                      const TriangulationOptions& opts = {});

struct SequenceOptions {
  TriangulationOptions triangulation;
  std::size_t max_instances = 0;  // 0 means all synchronized instances
  Execution execution = Execution::Parallel;
};

// One track instance per synchronized time instance; joints that cannot be
// triangulated (fewer than two confident views, degenerate rays) are gaps.
// Throws EmptySession.
SkeletonTrack3D triangulate_sequence(const CaptureSession& session, const CameraSet& cameras,
                                     const FrameOffsets& offsets, const SequenceOptions& opts = {});

}  // namespace gaitanno
