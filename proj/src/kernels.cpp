#include "gaitanno/kernels.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#include "gaitanno/error.hpp"

namespace gaitanno::kernels {
namespace {

// [begin, end) of chunk c when n items are split into kChunks pieces.
std::pair<std::size_t, std::size_t> chunk_range(std::size_t n, std::size_t c) {
  return {n * c / kChunks, n * (c + 1) / kChunks};
}

bool try_project(const Vec3& pc, const CameraIntrinsics& intr, Vec2& out) {
  if (!(pc.z() > kDepthEpsilon)) return false;
  const Vec2 n(pc.x() / pc.z(), pc.y() / pc.z());
  const Vec2 d = intr.dist.empty() ? n : apply_distortion(n, intr.dist);
  out = Vec2(intr.fx * d.x() + intr.skew * d.y() + intr.cx, intr.fy * d.y() + intr.cy);
  return true;
}

// Robust weighting of a squared residual norm s2 (already multiplied by the
// observation weight): returns rho(s2) and the IRLS factor rho'(s2).
std::pair<double, double> robust(double s2, std::optional<double> delta) {
  if (!delta || s2 <= (*delta) * (*delta)) return {s2, 1.0};
  const double s = std::sqrt(s2);
  return {2.0 * (*delta) * s - (*delta) * (*delta), (*delta) / s};
}

// ---- triangulation ----------------------------------------------------------

struct InstanceContext {
  const CaptureSession& session;
  std::vector<const CameraModel*> models;
  const TriangulationOptions& opts;
};

InstanceContext make_context(const CaptureSession& session, const CameraSet& cameras,
                             const TriangulationOptions& opts) {
  InstanceContext ctx{session, {}, opts};
  for (const CameraInfo& cam : session.cameras) {
    const auto it = cameras.find(cam.id);
    if (it == cameras.end()) fail(ErrorKind::NotFound, "no calibration for camera '" + cam.id + "'");
    ctx.models.push_back(&it->second);
  }
  return ctx;
}

TrackInstance triangulate_one(const InstanceContext& ctx, const SyncInstance& inst) {
  const std::size_t n_joints = ctx.session.schema.size();
  TrackInstance out;
  out.instance = inst.k;
  out.time_ms = inst.time_ms;
  out.joints.resize(n_joints);
  std::vector<Ray> rays;
  for (std::size_t j = 0; j < n_joints; ++j) {
    rays.clear();
    for (std::size_t c = 0; c < ctx.models.size(); ++c) {
      const Frame& f = ctx.session.streams[c].frames[inst.frame_index[c]];
      const auto& det = f.joints[j];
      if (!det || det->confidence < ctx.opts.confidence_floor) continue;
      rays.push_back(pixel_ray(det->pixel(), ctx.models[c]->intrinsics, ctx.models[c]->pose));
    }
    if (rays.size() < 2) continue;
    try {
      const TriangulationResult r = triangulate_rays(rays, ctx.opts.max_condition);
      out.joints[j] = JointEstimate{r.point, r.rms_ray_gap, r.condition, static_cast<int>(rays.size())};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateRays) throw;
    }
  }
  return out;
}

// ---- bundle adjustment ------------------------------------------------------

struct ObsTerms {
  Eigen::Matrix<double, 2, 6> Jc;  // residual derivative, already scaled by sqrt(weight)
  Eigen::Matrix<double, 2, 3> Jp;
  Vec2 r;                          // scaled residual
  double cost = 0.0;
};

ObsTerms observation_terms(const BAProblem& problem, const BAObservation& o,
                           std::span<const CameraPose> cameras, std::span<const Point3> points,
                           std::optional<double> huber) {
  const BACamera& cam = problem.cameras[o.camera];
  const ProjectionJacobian pj = project_with_jacobian(points[o.point], cam.intrinsics, cameras[o.camera]);
  const Vec2 res = o.pixel.vec() - pj.pixel.vec();
  const double s2 = o.weight * res.squaredNorm();
  const auto [rho, factor] = robust(s2, huber);
  const double scale = std::sqrt(o.weight * factor);
  ObsTerms t;
  t.Jc = -scale * pj.d_pose;
  t.Jp = -scale * pj.d_point;
  t.r = scale * res;
  t.cost = rho;
  return t;
}

void add_prior(const BAProblem& problem, const BALayout& layout, std::span<const CameraPose> cameras,
               BALinearization& lin) {
  if (!problem.scale_prior) return;
  const ScalePrior& sp = *problem.scale_prior;
  const Vec3& t = cameras[sp.camera].t;
  const double norm = t.norm();
  const double r = std::sqrt(sp.weight) * (norm - sp.distance);
  lin.cost += r * r;
  const int fi = layout.free_index[sp.camera];
  if (fi < 0 || norm == 0.0) return;
  Vec6 J = Vec6::Zero();
  J.tail<3>() = std::sqrt(sp.weight) * t / norm;
  lin.U[fi] += J * J.transpose();
  lin.g_camera[fi] += J * r;
}

double prior_cost(const BAProblem& problem, std::span<const CameraPose> cameras) {
  if (!problem.scale_prior) return 0.0;
  const ScalePrior& sp = *problem.scale_prior;
  const double d = cameras[sp.camera].t.norm() - sp.distance;
  return sp.weight * d * d;
}

BALinearization empty_linearization(const BAProblem& problem, const BALayout& layout) {
  BALinearization lin;
  lin.U.assign(layout.n_free, Mat6::Zero());
  lin.g_camera.assign(layout.n_free, Vec6::Zero());
  lin.V.assign(problem.points.size(), Eigen::Matrix3d::Zero());
  lin.g_point.assign(problem.points.size(), Eigen::Vector3d::Zero());
  lin.W.assign(layout.obs_by_point.size(), Mat63::Zero());
  return lin;
}

// Linearizes the observations of points [p0, p1); point blocks are written in
// place, camera blocks accumulate into U/g_camera, cost into *cost.
void linearize_points(const BAProblem& problem, const BALayout& layout, std::span<const CameraPose> cameras,
                      std::span<const Point3> points, std::optional<double> huber, std::size_t p0,
                      std::size_t p1, BALinearization& lin, std::vector<Mat6>& U,
                      std::vector<Vec6>& g_camera, double& cost) {
  for (std::size_t p = p0; p < p1; ++p) {
    for (std::size_t k = layout.point_begin[p]; k < layout.point_begin[p + 1]; ++k) {
      const BAObservation& o = problem.observations[layout.obs_by_point[k]];
      const ObsTerms t = observation_terms(problem, o, cameras, points, huber);
      cost += t.cost;
      lin.V[p] += t.Jp.transpose() * t.Jp;
      lin.g_point[p] += t.Jp.transpose() * t.r;
      const int fi = layout.free_index[o.camera];
      if (fi < 0) continue;
      U[fi] += t.Jc.transpose() * t.Jc;
      g_camera[fi] += t.Jc.transpose() * t.r;
      lin.W[k] = t.Jc.transpose() * t.Jp;
    }
  }
}

Eigen::Matrix3d damped_inverse(const Eigen::Matrix3d& V, double lambda) {
  Eigen::Matrix3d Vd = V;
  for (int i = 0; i < 3; ++i) Vd(i, i) += lambda * damping_diagonal(V(i, i));
  return Vd.inverse();
}

// Adds point p's contribution to the reduced system.
void reduce_point(const BALayout& layout, const BALinearization& lin, double lambda, std::size_t p,
                  Eigen::MatrixXd& S, Eigen::VectorXd& rhs) {
  const std::size_t b = layout.point_begin[p];
  const std::size_t e = layout.point_begin[p + 1];
  const Eigen::Matrix3d Vinv = damped_inverse(lin.V[p], lambda);
  const Eigen::Vector3d vg = Vinv * lin.g_point[p];
  for (std::size_t a = b; a < e; ++a) {
    const int ca = layout.free_of[a];
    if (ca < 0) continue;
    const Mat63 WV = lin.W[a] * Vinv;
    rhs.segment<6>(6 * ca) += lin.W[a] * vg;
    for (std::size_t c = b; c < e; ++c) {
      const int cb = layout.free_of[c];
      if (cb < 0) continue;
      S.block<6, 6>(6 * ca, 6 * cb) -= WV * lin.W[c].transpose();
    }
  }
}

ReducedSystem reduced_base(const BALayout& layout, const BALinearization& lin, double lambda) {
  const int n = 6 * layout.n_free;
  ReducedSystem sys{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  for (int c = 0; c < layout.n_free; ++c) {
    Mat6 Ud = lin.U[c];
    for (int i = 0; i < 6; ++i) Ud(i, i) += lambda * damping_diagonal(lin.U[c](i, i));
    sys.S.block<6, 6>(6 * c, 6 * c) = Ud;
    sys.rhs.segment<6>(6 * c) = -lin.g_camera[c];
  }
  return sys;
}

Eigen::Vector3d back_substitute_point(const BALayout& layout, const BALinearization& lin,
                                      const Eigen::VectorXd& dc, double lambda, std::size_t p) {
  Eigen::Vector3d rhs = -lin.g_point[p];
  for (std::size_t a = layout.point_begin[p]; a < layout.point_begin[p + 1]; ++a) {
    const int ca = layout.free_of[a];
    if (ca >= 0) rhs -= lin.W[a].transpose() * dc.segment<6>(6 * ca);
  }
  return damped_inverse(lin.V[p], lambda) * rhs;
}

double observation_cost(const BAProblem& problem, const BAObservation& o, std::span<const CameraPose> cameras,
                        std::span<const Point3> points, std::optional<double> huber) {
  const CameraPose& pose = cameras[o.camera];
  const Vec3 pc = pose.R.transpose() * (points[o.point] - pose.t);
  Vec2 px;
  if (!try_project(pc, problem.cameras[o.camera].intrinsics, px)) {
    return std::numeric_limits<double>::infinity();
  }
  return robust(o.weight * (o.pixel.vec() - px).squaredNorm(), huber).first;
}

}  // namespace

std::vector<TrackInstance> triangulate_instances_serial(const CaptureSession& session,
                                                        std::span<const SyncInstance> instances,
                                                        const CameraSet& cameras,
                                                        const TriangulationOptions& opts) {
  const InstanceContext ctx = make_context(session, cameras, opts);
  std::vector<TrackInstance> out;
  out.reserve(instances.size());
  for (const SyncInstance& inst : instances) out.push_back(triangulate_one(ctx, inst));
  return out;
}

std::vector<TrackInstance> triangulate_instances_omp(const CaptureSession& session,
                                                     std::span<const SyncInstance> instances,
                                                     const CameraSet& cameras,
                                                     const TriangulationOptions& opts) {
  const InstanceContext ctx = make_context(session, cameras, opts);
  std::vector<TrackInstance> out(instances.size());
  std::exception_ptr error;
  const auto n = static_cast<std::int64_t>(instances.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      out[i] = triangulate_one(ctx, instances[i]);
    } catch (...) {
#pragma omp critical(gaitanno_triangulate_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

BALayout make_layout(const BAProblem& problem, bool optimize_points) {
  BALayout layout;
  layout.optimize_points = optimize_points;
  layout.free_index.assign(problem.cameras.size(), -1);
  for (std::size_t c = 0; c < problem.cameras.size(); ++c) {
    if (!problem.cameras[c].fixed) layout.free_index[c] = layout.n_free++;
  }
  const std::size_t np = problem.points.size();
  layout.point_begin.assign(np + 1, 0);
  for (const auto& o : problem.observations) ++layout.point_begin[o.point + 1];
  std::partial_sum(layout.point_begin.begin(), layout.point_begin.end(), layout.point_begin.begin());
  layout.obs_by_point.resize(problem.observations.size());
  layout.free_of.resize(problem.observations.size());
  std::vector<std::size_t> fill(layout.point_begin.begin(), layout.point_begin.end() - 1);
  for (std::size_t i = 0; i < problem.observations.size(); ++i) {
    const auto& o = problem.observations[i];
    const std::size_t k = fill[o.point]++;
    layout.obs_by_point[k] = i;
    layout.free_of[k] = layout.free_index[o.camera];
  }
  return layout;
}

BALinearization ba_linearize_serial(const BAProblem& problem, const BALayout& layout,
                                    std::span<const CameraPose> cameras, std::span<const Point3> points,
                                    std::optional<double> huber_delta) {
  BALinearization lin = empty_linearization(problem, layout);
  linearize_points(problem, layout, cameras, points, huber_delta, 0, problem.points.size(), lin, lin.U,
                   lin.g_camera, lin.cost);
  add_prior(problem, layout, cameras, lin);
  return lin;
}

BALinearization ba_linearize_omp(const BAProblem& problem, const BALayout& layout,
                                 std::span<const CameraPose> cameras, std::span<const Point3> points,
                                 std::optional<double> huber_delta) {
  BALinearization lin = empty_linearization(problem, layout);
  std::vector<std::vector<Mat6>> U(kChunks, lin.U);
  std::vector<std::vector<Vec6>> g(kChunks, lin.g_camera);
  std::vector<double> cost(kChunks, 0.0);
  std::exception_ptr error;
  const std::size_t np = problem.points.size();
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(kChunks); ++c) {
    const auto [p0, p1] = chunk_range(np, static_cast<std::size_t>(c));
    try {
      linearize_points(problem, layout, cameras, points, huber_delta, p0, p1, lin, U[c], g[c], cost[c]);
    } catch (...) {
#pragma omp critical(gaitanno_linearize_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  for (std::size_t c = 0; c < kChunks; ++c) {
    for (int i = 0; i < layout.n_free; ++i) {
      lin.U[i] += U[c][i];
      lin.g_camera[i] += g[c][i];
    }
    lin.cost += cost[c];
  }
  add_prior(problem, layout, cameras, lin);
  return lin;
}

ReducedSystem schur_reduce_serial(const BALayout& layout, const BALinearization& lin, double lambda) {
  ReducedSystem sys = reduced_base(layout, lin, lambda);
  if (!layout.optimize_points) return sys;
  for (std::size_t p = 0; p + 1 < layout.point_begin.size(); ++p) {
    reduce_point(layout, lin, lambda, p, sys.S, sys.rhs);
  }
  return sys;
}

ReducedSystem schur_reduce_omp(const BALayout& layout, const BALinearization& lin, double lambda) {
  ReducedSystem sys = reduced_base(layout, lin, lambda);
  if (!layout.optimize_points) return sys;
  const std::size_t np = layout.point_begin.size() - 1;
  const int n = 6 * layout.n_free;
  std::vector<Eigen::MatrixXd> S(kChunks, Eigen::MatrixXd::Zero(n, n));
  std::vector<Eigen::VectorXd> rhs(kChunks, Eigen::VectorXd::Zero(n));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(kChunks); ++c) {
    const auto [p0, p1] = chunk_range(np, static_cast<std::size_t>(c));
    for (std::size_t p = p0; p < p1; ++p) reduce_point(layout, lin, lambda, p, S[c], rhs[c]);
  }
  for (std::size_t c = 0; c < kChunks; ++c) {
    sys.S += S[c];
    sys.rhs += rhs[c];
  }
  return sys;
}

std::vector<Eigen::Vector3d> back_substitute_serial(const BALayout& layout, const BALinearization& lin,
                                                    const Eigen::VectorXd& delta_cameras, double lambda) {
  const std::size_t np = layout.point_begin.size() - 1;
  std::vector<Eigen::Vector3d> out(np, Eigen::Vector3d::Zero());
  if (!layout.optimize_points) return out;
  for (std::size_t p = 0; p < np; ++p) out[p] = back_substitute_point(layout, lin, delta_cameras, lambda, p);
  return out;
}

std::vector<Eigen::Vector3d> back_substitute_omp(const BALayout& layout, const BALinearization& lin,
                                                 const Eigen::VectorXd& delta_cameras, double lambda) {
  const std::size_t np = layout.point_begin.size() - 1;
  std::vector<Eigen::Vector3d> out(np, Eigen::Vector3d::Zero());
  if (!layout.optimize_points) return out;
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < static_cast<std::int64_t>(np); ++p) {
    out[p] = back_substitute_point(layout, lin, delta_cameras, lambda, static_cast<std::size_t>(p));
  }
  return out;
}

double ba_cost_serial(const BAProblem& problem, std::span<const CameraPose> cameras,
                      std::span<const Point3> points, std::optional<double> huber_delta) {
  double cost = 0.0;
  for (const auto& o : problem.observations) cost += observation_cost(problem, o, cameras, points, huber_delta);
  return cost + prior_cost(problem, cameras);
}

double ba_cost_omp(const BAProblem& problem, std::span<const CameraPose> cameras,
                   std::span<const Point3> points, std::optional<double> huber_delta) {
  std::vector<double> partial(kChunks, 0.0);
  const std::size_t n = problem.observations.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(kChunks); ++c) {
    const auto [i0, i1] = chunk_range(n, static_cast<std::size_t>(c));
    double s = 0.0;
    for (std::size_t i = i0; i < i1; ++i) {
      s += observation_cost(problem, problem.observations[i], cameras, points, huber_delta);
    }
    partial[c] = s;
  }
  double cost = 0.0;
  for (double s : partial) cost += s;
  return cost + prior_cost(problem, cameras);
}

namespace {

std::uint32_t count_inside(const ContainmentGridProblem& p, const Eigen::Vector3d& d) {
  NudgeState s = p.base;
  s.d_theta_e = d.x();
  s.d_theta_a = d.y();
  s.d_d = d.z();
  const CameraPose pose = nudged_pose(s);
  const Mat3 Rt = pose.R.transpose();
  std::uint32_t inside = 0;
  Vec2 px;
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    if (!try_project(Rt * (p.points[i] - pose.t), p.intrinsics, px)) continue;
    inside += p.rects[p.rect_index[i]].contains(Pixel{px.x(), px.y()}) ? 1u : 0u;
  }
  return inside;
}

}  // namespace

std::vector<std::uint32_t> containment_grid_serial(const ContainmentGridProblem& problem) {
  std::vector<std::uint32_t> out(problem.deltas.size());
  for (std::size_t i = 0; i < problem.deltas.size(); ++i) out[i] = count_inside(problem, problem.deltas[i]);
  return out;
}

std::vector<std::uint32_t> containment_grid_omp(const ContainmentGridProblem& problem) {
  std::vector<std::uint32_t> out(problem.deltas.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(problem.deltas.size()); ++i) {
    out[i] = count_inside(problem, problem.deltas[i]);
  }
  return out;
}

}  // namespace gaitanno::kernels
