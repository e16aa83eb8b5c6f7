#pragma once

// Levenberg-Marquardt bundle adjustment over camera extrinsics and 3D points.
//
// Cameras are parameterized by the local increment (w, dt) of retract();
// intrinsics are never optimized. The normal equations are reduced to the
// camera blocks with a Schur complement over the 3x3 point blocks.

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gaitanno/execution.hpp"
#include "gaitanno/geometry.hpp"
#include "gaitanno/rig.hpp"
#include "gaitanno/session.hpp"

namespace gaitanno {

struct BACamera {
  std::string id;
  CameraIntrinsics intrinsics;
  CameraPose pose;
  bool fixed = false;
};

struct BAPoint {
  std::int64_t id = 0;  // instance * joint_count + joint
  Point3 position = Point3::Zero();
};

struct BAObservation {
  std::size_t camera = 0;
  std::size_t point = 0;
  Pixel pixel;
  double weight = 1.0;
};

// Soft constraint w * (|t_camera| - distance)^2 pinning the scale gauge.
struct ScalePrior {
  std::size_t camera = 0;
  double distance = 0.0;
  double weight = 1e4;
};

struct BAProblem {
  std::vector<BACamera> cameras;
  std::vector<BAPoint> points;
  std::vector<BAObservation> observations;  // sorted by (camera, point id)
  std::optional<ScalePrior> scale_prior;
  std::string auto_fixed_camera;  // set when build_problem had to pick the anchor

  // References in range, >= 1 fixed camera, finite data. Throws InvalidArgument.
  void validate() const;
};

struct BuildOptions {
  double confidence_floor = 0.5;
  std::string fixed_camera;  // empty: use rig flags, else the first camera
  bool scale_prior = true;
  double scale_prior_weight = 1e4;
};

// One observation per confident detection of a triangulated joint; points seen
// by fewer than two cameras are left out. Only cameras present in the session
// take part. Throws MissingInitialPose.
BAProblem build_problem(const CaptureSession& session, const Rig& initial, const SkeletonTrack3D& track,
                        const BuildOptions& opts = {});

struct BAOptions {
  int max_iterations = 200;
  double function_tolerance = 1e-10;  // relative cost change
  double gradient_tolerance = 1e-10;  // max-norm of the gradient
  double initial_lambda = 1e-4;
  double max_lambda = 1e12;
  bool optimize_points = true;
  std::optional<double> huber_delta;  // pixels; plain least squares when unset
  Execution execution = Execution::Parallel;
  std::function<void(int iteration, double cost)> progress;
};

struct BAReport {
  double initial_cost = 0.0;  // sum of weighted squared pixel residuals (+ prior)
  double final_cost = 0.0;
  std::vector<double> cost_history;  // initial cost, then every accepted step
  double mean_residual_before = 0.0;  // mean pixel distance
  double mean_residual_after = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string termination;
  std::string fixed_camera;
  bool auto_fixed = false;
  std::size_t observations = 0;
  std::size_t points = 0;

  friend bool operator==(const BAReport&, const BAReport&) = default;
};

struct BAResult {
  std::vector<CameraPose> cameras;
  std::vector<Point3> points;
  BAReport report;
};

// Throws Divergence (damping above max_lambda without an accepted step) and
// NumericalFailure (non-finite cost).
BAResult optimize(const BAProblem& problem, const BAOptions& opts = {});

// observed - projected for every observation, in problem.observations order.
std::vector<Vec2> compute_residuals(const BAProblem& problem, std::span<const CameraPose> cameras,
                                    std::span<const Point3> points);

// Derivative of one observation's residual w.r.t. (camera increment, point).
Eigen::Matrix<double, 2, 9> observation_jacobian(const BAProblem& problem, const BAObservation& obs,
                                                 std::span<const CameraPose> cameras,
                                                 std::span<const Point3> points);

enum class StepSolver { Schur, Dense };

// One damped Gauss-Newton step at the given state. The result stacks the
// increments of the free cameras (6 each, problem order) followed by all
// points (3 each). Exposed to check the Schur path against the dense solve.
Eigen::VectorXd lm_step(const BAProblem& problem, std::span<const CameraPose> cameras,
                        std::span<const Point3> points, double lambda, StepSolver solver,
                        const BAOptions& opts = {});

// Writes optimized poses back into a rig by camera id.
void apply_to_rig(const BAProblem& problem, const BAResult& result, Rig& rig);

}  // namespace gaitanno
