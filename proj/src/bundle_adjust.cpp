#include "gaitanno/bundle_adjust.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "gaitanno/error.hpp"
#include "gaitanno/kernels.hpp"

namespace gaitanno {
namespace {

using kernels::BALayout;
using kernels::BALinearization;

struct Engine {
  const BAProblem& problem;
  const BAOptions& opts;
  BALayout layout;

  BALinearization linearize(std::span<const CameraPose> c, std::span<const Point3> p) const {
    return opts.execution == Execution::Serial
               ? kernels::ba_linearize_serial(problem, layout, c, p, opts.huber_delta)
               : kernels::ba_linearize_omp(problem, layout, c, p, opts.huber_delta);
  }
  double cost(std::span<const CameraPose> c, std::span<const Point3> p) const {
    return opts.execution == Execution::Serial ? kernels::ba_cost_serial(problem, c, p, opts.huber_delta)
                                               : kernels::ba_cost_omp(problem, c, p, opts.huber_delta);
  }
  Eigen::VectorXd solve_cameras(const BALinearization& lin, double lambda) const {
    const kernels::ReducedSystem sys = opts.execution == Execution::Serial
                                           ? kernels::schur_reduce_serial(layout, lin, lambda)
                                           : kernels::schur_reduce_omp(layout, lin, lambda);
    if (sys.S.rows() == 0) return Eigen::VectorXd();
    return sys.S.ldlt().solve(sys.rhs);
  }
  std::vector<Eigen::Vector3d> solve_points(const BALinearization& lin, const Eigen::VectorXd& dc,
                                            double lambda) const {
    return opts.execution == Execution::Serial ? kernels::back_substitute_serial(layout, lin, dc, lambda)
                                               : kernels::back_substitute_omp(layout, lin, dc, lambda);
  }
};

double max_gradient(const BALayout& layout, const BALinearization& lin) {
  double g = 0.0;
  for (const auto& gc : lin.g_camera) g = std::max(g, gc.cwiseAbs().maxCoeff());
  if (layout.optimize_points) {
    for (const auto& gp : lin.g_point) g = std::max(g, gp.cwiseAbs().maxCoeff());
  }
  return g;
}

double mean_residual(const BAProblem& problem, std::span<const CameraPose> c, std::span<const Point3> p) {
  if (problem.observations.empty()) return 0.0;
  double sum = 0.0;
  for (const Vec2& r : compute_residuals(problem, c, p)) sum += r.norm();
  return sum / static_cast<double>(problem.observations.size());
}

std::vector<CameraPose> initial_cameras(const BAProblem& problem) {
  std::vector<CameraPose> out;
  out.reserve(problem.cameras.size());
  for (const auto& c : problem.cameras) out.push_back(c.pose);
  return out;
}

std::vector<Point3> initial_points(const BAProblem& problem) {
  std::vector<Point3> out;
  out.reserve(problem.points.size());
  for (const auto& p : problem.points) out.push_back(p.position);
  return out;
}

}  // namespace

void BAProblem::validate() const {
  if (!std::any_of(cameras.begin(), cameras.end(), [](const BACamera& c) { return c.fixed; })) {
    fail(ErrorKind::InvalidArgument, "bundle adjustment needs at least one fixed camera");
  }
  for (const auto& c : cameras) {
    c.intrinsics.validate();
    if (!c.pose.is_valid()) fail(ErrorKind::InvalidArgument, "camera '" + c.id + "' pose is not a rotation");
  }
  for (const auto& p : points) {
    if (!p.position.allFinite()) fail(ErrorKind::InvalidArgument, "non-finite point");
  }
  for (const auto& o : observations) {
    if (o.camera >= cameras.size() || o.point >= points.size()) {
      fail(ErrorKind::InvalidArgument, "observation references a missing camera or point");
    }
    if (!std::isfinite(o.pixel.u) || !std::isfinite(o.pixel.v) || !(o.weight > 0.0)) {
      fail(ErrorKind::InvalidArgument, "observation with non-finite pixel or non-positive weight");
    }
  }
  if (scale_prior && scale_prior->camera >= cameras.size()) {
    fail(ErrorKind::InvalidArgument, "scale prior references a missing camera");
  }
}

BAProblem build_problem(const CaptureSession& session, const Rig& initial, const SkeletonTrack3D& track,
                        const BuildOptions& opts) {
  BAProblem problem;
  for (const CameraInfo& info : session.cameras) {
    const RigCamera* rc = initial.find(info.id);
    if (rc == nullptr) fail(ErrorKind::MissingInitialPose, "no initial pose for camera '" + info.id + "'");
    problem.cameras.push_back(BACamera{info.id, info.intrinsics, rc->pose, rc->fixed});
  }
  if (problem.cameras.empty()) fail(ErrorKind::EmptySession, "session has no cameras");
  if (!opts.fixed_camera.empty()) {
    bool found = false;
    for (auto& c : problem.cameras) {
      c.fixed = c.id == opts.fixed_camera;
      found = found || c.fixed;
    }
    if (!found) fail(ErrorKind::NotFound, "fixed camera '" + opts.fixed_camera + "' is not in the session");
  } else if (std::none_of(problem.cameras.begin(), problem.cameras.end(),
                          [](const BACamera& c) { return c.fixed; })) {
    problem.cameras.front().fixed = true;
    problem.auto_fixed_camera = problem.cameras.front().id;
  }

  // (camera, point id) -> pixel, weight
  struct Pending {
    std::size_t camera;
    std::int64_t point_id;
    Pixel pixel;
    double weight;
  };
  std::vector<Pending> pending;
  std::map<std::int64_t, Point3> point_pos;
  const auto n_joints = static_cast<std::int64_t>(track.schema.size());
  std::vector<Pending> local;
  for (const TrackInstance& inst : track.instances) {
    for (std::int64_t j = 0; j < n_joints; ++j) {
      const auto& est = inst.joints[static_cast<std::size_t>(j)];
      if (!est) continue;
      local.clear();
      for (std::size_t c = 0; c < session.cameras.size(); ++c) {
        const Frame* f = session.streams[c].find(inst.instance + session.offset(session.cameras[c].id));
        if (f == nullptr) continue;
        const auto& det = f->joints[static_cast<std::size_t>(j)];
        if (!det || det->confidence < opts.confidence_floor) continue;
        local.push_back({c, inst.instance * n_joints + j, det->pixel(), det->confidence});
      }
      if (local.size() < 2) continue;
      point_pos[inst.instance * n_joints + j] = est->point;
      pending.insert(pending.end(), local.begin(), local.end());
    }
  }

  std::map<std::int64_t, std::size_t> point_index;
  for (const auto& [id, pos] : point_pos) {
    point_index[id] = problem.points.size();
    problem.points.push_back(BAPoint{id, pos});
  }
  std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    return std::tie(a.camera, a.point_id) < std::tie(b.camera, b.point_id);
  });
  problem.observations.reserve(pending.size());
  for (const Pending& p : pending) {
    problem.observations.push_back(BAObservation{p.camera, point_index.at(p.point_id), p.pixel, p.weight});
  }

  if (opts.scale_prior) {
    for (std::size_t c = 0; c < problem.cameras.size(); ++c) {
      if (problem.cameras[c].fixed) continue;
      problem.scale_prior = ScalePrior{c, problem.cameras[c].pose.t.norm(), opts.scale_prior_weight};
      break;
    }
  }
  return problem;
}

std::vector<Vec2> compute_residuals(const BAProblem& problem, std::span<const CameraPose> cameras,
                                    std::span<const Point3> points) {
  std::vector<Vec2> out;
  out.reserve(problem.observations.size());
  for (const auto& o : problem.observations) {
    const Pixel p = project(points[o.point], problem.cameras[o.camera].intrinsics, cameras[o.camera]);
    out.push_back(o.pixel.vec() - p.vec());
  }
  return out;
}

Eigen::Matrix<double, 2, 9> observation_jacobian(const BAProblem& problem, const BAObservation& obs,
                                                 std::span<const CameraPose> cameras,
                                                 std::span<const Point3> points) {
  const ProjectionJacobian pj =
      project_with_jacobian(points[obs.point], problem.cameras[obs.camera].intrinsics, cameras[obs.camera]);
  Eigen::Matrix<double, 2, 9> J;
  J.leftCols<6>() = -pj.d_pose;
  J.rightCols<3>() = -pj.d_point;
  return J;
}

Eigen::VectorXd lm_step(const BAProblem& problem, std::span<const CameraPose> cameras,
                        std::span<const Point3> points, double lambda, StepSolver solver,
                        const BAOptions& opts) {
  const BALayout layout = kernels::make_layout(problem, opts.optimize_points);
  const BALinearization lin = kernels::ba_linearize_serial(problem, layout, cameras, points, opts.huber_delta);
  const int nc = 6 * layout.n_free;
  const int np = 3 * static_cast<int>(problem.points.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(nc + np);

  if (solver == StepSolver::Schur) {
    const kernels::ReducedSystem sys = kernels::schur_reduce_serial(layout, lin, lambda);
    const Eigen::VectorXd dc = sys.S.ldlt().solve(sys.rhs);
    const auto dp = kernels::back_substitute_serial(layout, lin, dc, lambda);
    out.head(nc) = dc;
    for (std::size_t p = 0; p < dp.size(); ++p) out.segment<3>(nc + 3 * static_cast<int>(p)) = dp[p];
    return out;
  }

  const int n = layout.optimize_points ? nc + np : nc;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  for (int c = 0; c < layout.n_free; ++c) {
    H.block<6, 6>(6 * c, 6 * c) = lin.U[c];
    g.segment<6>(6 * c) = lin.g_camera[c];
  }
  if (layout.optimize_points) {
    for (std::size_t p = 0; p < problem.points.size(); ++p) {
      const int row = nc + 3 * static_cast<int>(p);
      H.block<3, 3>(row, row) = lin.V[p];
      g.segment<3>(row) = lin.g_point[p];
      for (std::size_t k = layout.point_begin[p]; k < layout.point_begin[p + 1]; ++k) {
        const int c = layout.free_of[k];
        if (c < 0) continue;
        H.block<6, 3>(6 * c, row) += lin.W[k];
        H.block<3, 6>(row, 6 * c) += lin.W[k].transpose();
      }
    }
  }
  const Eigen::VectorXd diag = H.diagonal();
  for (int i = 0; i < n; ++i) H(i, i) += lambda * kernels::damping_diagonal(diag(i));
  out.head(n) = H.ldlt().solve(-g);
  return out;
}

BAResult optimize(const BAProblem& problem, const BAOptions& opts) {
  problem.validate();
  Engine engine{problem, opts, kernels::make_layout(problem, opts.optimize_points)};

  BAResult result;
  result.cameras = initial_cameras(problem);
  result.points = initial_points(problem);
  BAReport& report = result.report;
  report.observations = problem.observations.size();
  report.points = problem.points.size();
  for (const auto& c : problem.cameras) {
    if (c.fixed) {
      report.fixed_camera = c.id;
      break;
    }
  }
  report.auto_fixed = !problem.auto_fixed_camera.empty();

  double cost = engine.cost(result.cameras, result.points);
  if (!std::isfinite(cost)) fail(ErrorKind::NumericalFailure, "initial cost is not finite");
  report.initial_cost = cost;
  report.cost_history.push_back(cost);
  report.mean_residual_before = mean_residual(problem, result.cameras, result.points);

  BALinearization lin = engine.linearize(result.cameras, result.points);
  double lambda = opts.initial_lambda;
  bool accepted_any = false;
  report.termination = "max iterations";
  std::vector<CameraPose> cand_cameras(result.cameras.size());
  std::vector<Point3> cand_points(result.points.size());

  bool done = false;
  while (!done && report.iterations < opts.max_iterations) {
    if (cost == 0.0 || max_gradient(engine.layout, lin) < opts.gradient_tolerance) {
      report.converged = true;
      report.termination = "gradient tolerance";
      break;
    }
    for (;;) {
      const Eigen::VectorXd dc = engine.solve_cameras(lin, lambda);
      const auto dp = engine.solve_points(lin, dc, lambda);
      for (std::size_t c = 0; c < result.cameras.size(); ++c) {
        const int fi = engine.layout.free_index[c];
        cand_cameras[c] = fi < 0 ? result.cameras[c] : retract(result.cameras[c], dc.segment<6>(6 * fi));
      }
      for (std::size_t p = 0; p < result.points.size(); ++p) cand_points[p] = result.points[p] + dp[p];
      const double new_cost = engine.cost(cand_cameras, cand_points);

      if (std::isfinite(new_cost) && new_cost < cost) {
        const double rel = (cost - new_cost) / cost;
        result.cameras.swap(cand_cameras);
        result.points.swap(cand_points);
        cost = new_cost;
        accepted_any = true;
        ++report.iterations;
        report.cost_history.push_back(cost);
        if (opts.progress) opts.progress(report.iterations, cost);
        lambda = std::max(lambda / 10.0, 1e-15);
        if (rel < opts.function_tolerance) {
          report.converged = true;
          report.termination = "function tolerance";
          done = true;
        } else {
          lin = engine.linearize(result.cameras, result.points);
        }
        break;
      }
      if (std::isfinite(new_cost) && new_cost - cost <= opts.function_tolerance * cost) {
        report.converged = true;
        report.termination = "function tolerance";
        done = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > opts.max_lambda) {
        if (!accepted_any) {
          fail(ErrorKind::Divergence, "damping exceeded " + std::to_string(opts.max_lambda) +
                                          " without an accepted step");
        }
        report.converged = true;
        report.termination = "damping limit";
        done = true;
        break;
      }
    }
  }

  report.final_cost = cost;
  report.mean_residual_after = mean_residual(problem, result.cameras, result.points);
  return result;
}

void apply_to_rig(const BAProblem& problem, const BAResult& result, Rig& rig) {
  for (std::size_t c = 0; c < problem.cameras.size(); ++c) {
    RigCamera* rc = rig.find(problem.cameras[c].id);
    if (rc == nullptr) fail(ErrorKind::NotFound, "rig has no camera '" + problem.cameras[c].id + "'");
    rc->pose = result.cameras[c];
  }
}

}  // namespace gaitanno
