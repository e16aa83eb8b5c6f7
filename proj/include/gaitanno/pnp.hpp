#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaitanno/geometry.hpp"

namespace gaitanno {

// One hand-clicked (3D marker, 2D pixel) pair.
struct Correspondence {
  Point3 world = Point3::Zero();
  Pixel image;
  std::string marker_id;

  friend bool operator==(const Correspondence& a, const Correspondence& b) {
    return a.world == b.world && a.image == b.image && a.marker_id == b.marker_id;
  }
};

struct PnPOptions {
  // When set, correspondences whose residual exceeds factor * median after the
  // first refinement are dropped and the pose is solved once more.
  std::optional<double> outlier_factor;
  int max_iterations = 100;
};

struct PnPResult {
  CameraPose pose;
  double mean_residual = 0.0;  // mean pixel distance over the used correspondences
  std::vector<std::string> rejected;
};

struct RefineReport {
  std::vector<double> cost_history;  // initial cost, then one entry per accepted step
  int iterations = 0;
  bool converged = false;
};

// DLT on undistorted normalized coordinates followed by Levenberg-Marquardt.
// Throws InsufficientPoints (< 6), DegenerateConfiguration (coplanar points or
// an ill-conditioned DLT system) and Divergence.
PnPResult solve_pnp(std::span<const Correspondence> corrs, const CameraIntrinsics& intr,
                    const PnPOptions& opts = {});

// Linear pose estimate only.
CameraPose dlt_pose(std::span<const Correspondence> corrs, const CameraIntrinsics& intr);

// Levenberg-Marquardt polish over axis-angle + translation increments. The
// returned pose never has a larger reprojection cost than `initial`.
CameraPose refine_pose(const CameraPose& initial, std::span<const Correspondence> corrs,
                       const CameraIntrinsics& intr, int max_iterations = 100,
                       RefineReport* report = nullptr);

// Sum of squared pixel residuals.
double reprojection_cost(const CameraPose& pose, std::span<const Correspondence> corrs,
                         const CameraIntrinsics& intr);

// Derivative of the residual (observed - projected) of one correspondence
// with respect to the pose increment used by retract().
Eigen::Matrix<double, 2, 6> residual_jacobian(const CameraPose& pose, const Correspondence& corr,
                                              const CameraIntrinsics& intr);

}  // namespace gaitanno
