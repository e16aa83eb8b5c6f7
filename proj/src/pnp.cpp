#include "gaitanno/pnp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "gaitanno/error.hpp"

namespace gaitanno {
namespace {

constexpr std::size_t kMinDltPoints = 6;

// Similarity transform bringing points to zero mean and RMS distance sqrt(dim).
template <int Dim>
Eigen::Matrix<double, Dim + 1, Dim + 1> normalizer(const std::vector<Eigen::Matrix<double, Dim, 1>>& pts) {
  Eigen::Matrix<double, Dim, 1> mean = Eigen::Matrix<double, Dim, 1>::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double sq = 0.0;
  for (const auto& p : pts) sq += (p - mean).squaredNorm();
  const double rms = std::sqrt(sq / static_cast<double>(pts.size()));
  const double s = rms > 0.0 ? std::sqrt(static_cast<double>(Dim)) / rms : 1.0;
  Eigen::Matrix<double, Dim + 1, Dim + 1> T = Eigen::Matrix<double, Dim + 1, Dim + 1>::Identity();
  T.template topLeftCorner<Dim, Dim>() *= s;
  T.template topRightCorner<Dim, 1>() = -s * mean;
  return T;
}

void check_finite(std::span<const Correspondence> corrs) {
  for (const auto& c : corrs) {
    if (!c.world.allFinite() || !std::isfinite(c.image.u) || !std::isfinite(c.image.v)) {
      fail(ErrorKind::InvalidArgument, "correspondence '" + c.marker_id + "' is not finite");
    }
  }
}

double mean_residual(const CameraPose& pose, std::span<const Correspondence> corrs,
                     const CameraIntrinsics& intr) {
  double sum = 0.0;
  for (const auto& c : corrs) {
    sum += (c.image.vec() - project(c.world, intr, pose).vec()).norm();
  }
  return sum / static_cast<double>(corrs.size());
}

}  // namespace

double reprojection_cost(const CameraPose& pose, std::span<const Correspondence> corrs,
                         const CameraIntrinsics& intr) {
  double cost = 0.0;
  for (const auto& c : corrs) {
    cost += (c.image.vec() - project(c.world, intr, pose).vec()).squaredNorm();
  }
  return cost;
}

Eigen::Matrix<double, 2, 6> residual_jacobian(const CameraPose& pose, const Correspondence& corr,
                                              const CameraIntrinsics& intr) {
  return -project_with_jacobian(corr.world, intr, pose).d_pose;
}

CameraPose dlt_pose(std::span<const Correspondence> corrs, const CameraIntrinsics& intr) {
  intr.validate();
  if (corrs.size() < kMinDltPoints) {
    fail(ErrorKind::InsufficientPoints, "PnP needs at least 6 correspondences, got " +
                                            std::to_string(corrs.size()));
  }
  check_finite(corrs);

  std::vector<Eigen::Vector3d> world(corrs.size());
  std::vector<Eigen::Vector2d> image(corrs.size());
  const Mat3 Ki = intr.K_inverse();
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    world[i] = corrs[i].world;
    const Vec3 h = Ki * Vec3(corrs[i].image.u, corrs[i].image.v, 1.0);
    image[i] = remove_distortion(h.head<2>(), intr.dist);
  }

  // Coplanar (or collinear) marker sets leave the DLT null space degenerate.
  {
    Eigen::MatrixXd centered(corrs.size(), 3);
    Vec3 mean = Vec3::Zero();
    for (const auto& w : world) mean += w;
    mean /= static_cast<double>(world.size());
    for (std::size_t i = 0; i < world.size(); ++i) centered.row(i) = (world[i] - mean).transpose();
    const Vec3 sv = centered.jacobiSvd().singularValues();
    if (sv(2) <= 1e-6 * sv(0)) {
      fail(ErrorKind::DegenerateConfiguration, "correspondences are coplanar");
    }
  }

  const Eigen::Matrix4d T3 = normalizer<3>(world);
  const Eigen::Matrix3d T2 = normalizer<2>(image);

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * corrs.size(), 12);
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    const Eigen::Vector4d X = T3 * world[i].homogeneous();
    const Eigen::Vector3d x = T2 * image[i].homogeneous();
    const Eigen::Index r = 2 * static_cast<Eigen::Index>(i);
    M.block<1, 4>(r, 0) = X.transpose();
    M.block<1, 4>(r, 8) = -x.x() * X.transpose();
    M.block<1, 4>(r + 1, 4) = X.transpose();
    M.block<1, 4>(r + 1, 8) = -x.y() * X.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  // With exact data the smallest singular value vanishes; the second smallest
  // measures how well the solution is determined.
  const double cond = sv(10) > 0.0 ? sv(0) / sv(10) : std::numeric_limits<double>::infinity();
  if (!(cond <= 1e12)) {
    fail(ErrorKind::DegenerateConfiguration, "DLT system is ill-conditioned (" +
                                                 std::to_string(cond) + ")");
  }
  const Eigen::VectorXd p = svd.matrixV().col(11);
  Eigen::Matrix<double, 3, 4> Pn;
  Pn << p(0), p(1), p(2), p(3), p(4), p(5), p(6), p(7), p(8), p(9), p(10), p(11);
  Eigen::Matrix<double, 3, 4> P = T2.inverse() * Pn * T3;

  Mat3 A = P.leftCols<3>();
  if (A.determinant() < 0.0) {
    P = -P;
    A = -A;
  }
  Eigen::JacobiSVD<Mat3> asvd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 R_wc = asvd.matrixU() * asvd.matrixV().transpose();
  if (R_wc.determinant() < 0.0) {
    fail(ErrorKind::DegenerateConfiguration, "DLT produced an improper rotation");
  }
  const double scale = asvd.singularValues().mean();
  const Vec3 t_c = P.col(3) / scale;

  CameraPose pose;
  pose.R = R_wc.transpose();
  pose.t = -R_wc.transpose() * t_c;
  return pose;
}

CameraPose refine_pose(const CameraPose& initial, std::span<const Correspondence> corrs,
                       const CameraIntrinsics& intr, int max_iterations, RefineReport* report) {
  if (corrs.size() < 3) {
    fail(ErrorKind::InsufficientPoints, "pose refinement needs at least 3 correspondences");
  }
  check_finite(corrs);
  intr.validate();

  CameraPose pose = initial;
  double cost = reprojection_cost(pose, corrs, intr);
  if (!std::isfinite(cost)) fail(ErrorKind::Divergence, "initial cost is not finite");

  RefineReport local;
  local.cost_history.push_back(cost);
  double lambda = 1e-3;
  bool accepted_any = false;
  double last_gradient = 0.0;

  for (int iter = 0; iter < max_iterations; ++iter) {
    local.iterations = iter + 1;
    Eigen::Matrix<double, 6, 6> H = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
    for (const auto& c : corrs) {
      const ProjectionJacobian pj = project_with_jacobian(c.world, intr, pose);
      const Eigen::Matrix<double, 2, 6> J = -pj.d_pose;
      const Vec2 r = c.image.vec() - pj.pixel.vec();
      H.noalias() += J.transpose() * J;
      g.noalias() += J.transpose() * r;
    }
    last_gradient = g.cwiseAbs().maxCoeff();
    if (last_gradient <= 1e-12 * std::max(1.0, std::sqrt(cost)) || cost == 0.0) {
      local.converged = true;
      break;
    }

    bool stepped = false;
    while (lambda <= 1e16) {
      Eigen::Matrix<double, 6, 6> A = H;
      for (int i = 0; i < 6; ++i) A(i, i) += lambda * std::max(H(i, i), 1e-12);
      const Eigen::Matrix<double, 6, 1> delta = A.ldlt().solve(-g);
      const CameraPose candidate = retract(pose, delta);
      double new_cost = std::numeric_limits<double>::infinity();
      try {
        new_cost = reprojection_cost(candidate, corrs, intr);
      } catch (const Error&) {
        // A point crossed behind the camera; treat as a rejected step.
      }
      if (new_cost < cost) {
        const double rel = (cost - new_cost) / cost;
        pose = candidate;
        cost = new_cost;
        local.cost_history.push_back(cost);
        accepted_any = true;
        lambda = std::max(lambda * 0.1, 1e-12);
        stepped = true;
        if (rel < 1e-15 || delta.norm() < 1e-15 * (1.0 + pose.t.norm())) local.converged = true;
        break;
      }
      // Rejected steps that barely change the cost mean we sit at the minimum.
      if (std::isfinite(new_cost) && new_cost - cost <= 1e-14 * std::max(cost, 1e-30)) {
        local.converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (local.converged) break;
    if (!stepped) {
      local.converged = accepted_any;
      break;
    }
  }

  if (!accepted_any && !local.converged) {
    fail(ErrorKind::Divergence, "Levenberg-Marquardt could not reduce the reprojection cost");
  }
  if (report != nullptr) *report = std::move(local);
  return pose;
}

PnPResult solve_pnp(std::span<const Correspondence> corrs, const CameraIntrinsics& intr,
                    const PnPOptions& opts) {
  PnPResult result;
  result.pose = refine_pose(dlt_pose(corrs, intr), corrs, intr, opts.max_iterations);
  std::vector<Correspondence> used(corrs.begin(), corrs.end());

  if (opts.outlier_factor) {
    std::vector<double> res;
    res.reserve(used.size());
    for (const auto& c : used) res.push_back((c.image.vec() - project(c.world, intr, result.pose).vec()).norm());
    std::vector<double> sorted = res;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double threshold = *opts.outlier_factor * sorted[sorted.size() / 2];
    std::vector<Correspondence> kept;
    for (std::size_t i = 0; i < used.size(); ++i) {
      if (res[i] > threshold) {
        result.rejected.push_back(used[i].marker_id);
      } else {
        kept.push_back(used[i]);
      }
    }
    if (!result.rejected.empty()) {
      used = std::move(kept);
      result.pose = refine_pose(dlt_pose(used, intr), used, intr, opts.max_iterations);
    }
  }
  result.mean_residual = mean_residual(result.pose, used, intr);
  return result;
}

}  // namespace gaitanno
