#pragma once

// Data-parallel hot loops. Each kernel has a straightforward serial reference
// and an OpenMP version; the tests hold them against each other and the
// benchmark target times them.
//
// The OpenMP versions reduce over a fixed number of chunks (kChunks) merged in
// chunk order, so their results do not depend on the thread count.

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gaitanno/bundle_adjust.hpp"
#include "gaitanno/eval.hpp"
#include "gaitanno/longrange.hpp"
#include "gaitanno/session.hpp"
#include "gaitanno/triangulate.hpp"

namespace gaitanno::kernels {

inline constexpr std::size_t kChunks = 64;

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat63 = Eigen::Matrix<double, 6, 3>;

// ---- triangulation over synchronized instances ----------------------------

std::vector<TrackInstance> triangulate_instances_serial(const CaptureSession& session,
                                                        std::span<const SyncInstance> instances,
                                                        const CameraSet& cameras,
                                                        const TriangulationOptions& opts);
std::vector<TrackInstance> triangulate_instances_omp(const CaptureSession& session,
                                                     std::span<const SyncInstance> instances,
                                                     const CameraSet& cameras,
                                                     const TriangulationOptions& opts);

// ---- bundle adjustment ----------------------------------------------------

struct BALayout {
  std::vector<int> free_index;             // per camera, -1 when fixed
  int n_free = 0;
  std::vector<std::size_t> point_begin;    // CSR offsets into obs_by_point, size points + 1
  std::vector<std::size_t> obs_by_point;   // observation indices grouped by point
  std::vector<int> free_of;                // free camera index per obs_by_point entry, -1 when fixed
  bool optimize_points = true;
};

BALayout make_layout(const BAProblem& problem, bool optimize_points);

struct BALinearization {
  double cost = 0.0;
  std::vector<Mat6> U;         // per free camera
  std::vector<Vec6> g_camera;  // per free camera
  std::vector<Eigen::Matrix3d> V;
  std::vector<Eigen::Vector3d> g_point;
  std::vector<Mat63> W;        // parallel to obs_by_point; zero for fixed cameras
};

BALinearization ba_linearize_serial(const BAProblem& problem, const BALayout& layout,
                                    std::span<const CameraPose> cameras, std::span<const Point3> points,
                                    std::optional<double> huber_delta);
BALinearization ba_linearize_omp(const BAProblem& problem, const BALayout& layout,
                                 std::span<const CameraPose> cameras, std::span<const Point3> points,
                                 std::optional<double> huber_delta);

struct ReducedSystem {
  Eigen::MatrixXd S;    // 6 n_free square
  Eigen::VectorXd rhs;
};

// Damped (Marquardt) reduced camera system.
ReducedSystem schur_reduce_serial(const BALayout& layout, const BALinearization& lin, double lambda);
ReducedSystem schur_reduce_omp(const BALayout& layout, const BALinearization& lin, double lambda);

// Point increments given the camera increments.
std::vector<Eigen::Vector3d> back_substitute_serial(const BALayout& layout, const BALinearization& lin,
                                                    const Eigen::VectorXd& delta_cameras, double lambda);
std::vector<Eigen::Vector3d> back_substitute_omp(const BALayout& layout, const BALinearization& lin,
                                                 const Eigen::VectorXd& delta_cameras, double lambda);

// Robustified cost; +inf when any point falls behind its camera.
double ba_cost_serial(const BAProblem& problem, std::span<const CameraPose> cameras,
                      std::span<const Point3> points, std::optional<double> huber_delta);
double ba_cost_omp(const BAProblem& problem, std::span<const CameraPose> cameras,
                   std::span<const Point3> points, std::optional<double> huber_delta);

// Marquardt scaling of a diagonal entry.
inline double damping_diagonal(double d) { return d < 1e-6 ? 1e-6 : (d > 1e32 ? 1e32 : d); }

// ---- long-range containment grid -------------------------------------------

struct ContainmentGridProblem {
  CameraIntrinsics intrinsics;
  NudgeState base;                        // deltas are overwritten per grid point
  std::vector<Eigen::Vector3d> deltas;    // (d_theta_e, d_theta_a, d_d) per grid point
  std::vector<Point3> points;             // all labeled joints
  std::vector<std::uint32_t> rect_index;  // box of each joint
  std::vector<Rect> rects;
};

// Number of joints inside their box, per grid point.
std::vector<std::uint32_t> containment_grid_serial(const ContainmentGridProblem& problem);
std::vector<std::uint32_t> containment_grid_omp(const ContainmentGridProblem& problem);

}  // namespace gaitanno::kernels
