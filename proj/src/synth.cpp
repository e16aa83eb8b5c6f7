#include "gaitanno/synth.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "gaitanno/error.hpp"
#include "gaitanno/rng.hpp"

namespace gaitanno {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kReferenceHeight = 1.75;

// Rest pose of the marker skeleton for a 1.75 m subject, body frame
// (x forward, y left, z up, origin on the ground between the feet).
const std::map<std::string, Vec3>& rest_markers() {
  static const std::map<std::string, Vec3> m = {
      {"LFHD", {0.08, 0.07, 1.66}},   {"RFHD", {0.08, -0.07, 1.66}},  {"LBHD", {-0.08, 0.07, 1.64}},
      {"RBHD", {-0.08, -0.07, 1.64}}, {"C7", {-0.07, 0.0, 1.48}},     {"T10", {-0.12, 0.0, 1.25}},
      {"CLAV", {0.06, 0.0, 1.43}},    {"STRN", {0.10, 0.0, 1.28}},    {"RBAK", {-0.12, -0.09, 1.35}},
      {"LSHO", {0.0, 0.19, 1.44}},    {"LELB", {-0.01, 0.21, 1.15}},  {"LWRA", {0.03, 0.22, 0.88}},
      {"LWRB", {-0.03, 0.22, 0.88}},  {"LFIN", {0.0, 0.22, 0.78}},    {"RSHO", {0.0, -0.19, 1.44}},
      {"RELB", {-0.01, -0.21, 1.15}}, {"RWRA", {0.03, -0.22, 0.88}},  {"RWRB", {-0.03, -0.22, 0.88}},
      {"RFIN", {0.0, -0.22, 0.78}},   {"LASI", {0.10, 0.12, 0.98}},   {"RASI", {0.10, -0.12, 0.98}},
      {"LPSI", {-0.10, 0.05, 1.00}},  {"RPSI", {-0.10, -0.05, 1.00}}, {"LTHI", {0.03, 0.13, 0.70}},
      {"LKNE", {0.0, 0.11, 0.50}},    {"LANK", {-0.01, 0.09, 0.08}},  {"LHEE", {-0.07, 0.09, 0.04}},
      {"LTOE", {0.13, 0.08, 0.03}},   {"RTHI", {0.03, -0.13, 0.70}},  {"RKNE", {0.0, -0.11, 0.50}},
      {"RANK", {-0.01, -0.09, 0.08}}, {"RHEE", {-0.07, -0.09, 0.04}}, {"RTOE", {0.13, -0.08, 0.03}},
  };
  return m;
}

const std::vector<std::pair<std::string, std::string>>& marker_bones() {
  static const std::vector<std::pair<std::string, std::string>> b = {
      {"LFHD", "RFHD"}, {"LFHD", "LBHD"}, {"RFHD", "RBHD"}, {"LBHD", "RBHD"}, {"LBHD", "C7"},
      {"C7", "T10"},    {"C7", "CLAV"},   {"CLAV", "STRN"}, {"T10", "RBAK"},  {"CLAV", "LSHO"},
      {"CLAV", "RSHO"}, {"STRN", "LASI"}, {"STRN", "RASI"}, {"LASI", "RASI"}, {"LASI", "LPSI"},
      {"RASI", "RPSI"}, {"LPSI", "RPSI"}, {"T10", "LPSI"},  {"LSHO", "LELB"}, {"LELB", "LWRA"},
      {"LELB", "LWRB"}, {"LWRA", "LWRB"}, {"LWRA", "LFIN"}, {"LWRB", "LFIN"}, {"RSHO", "RELB"},
      {"RELB", "RWRA"}, {"RELB", "RWRB"}, {"RWRA", "RWRB"}, {"RWRA", "RFIN"}, {"RWRB", "RFIN"},
      {"LASI", "LTHI"}, {"LASI", "LKNE"}, {"LTHI", "LKNE"}, {"LKNE", "LANK"}, {"LANK", "LHEE"},
      {"LANK", "LTOE"}, {"LHEE", "LTOE"}, {"RASI", "RTHI"}, {"RASI", "RKNE"}, {"RTHI", "RKNE"},
      {"RKNE", "RANK"}, {"RANK", "RHEE"}, {"RANK", "RTOE"}, {"RHEE", "RTOE"},
  };
  return b;
}

// Rotation about the body y axis that moves a point below the pivot forward
// for positive angles.
Mat3 swing(double angle) { return Eigen::AngleAxisd(-angle, Vec3::UnitY()).toRotationMatrix(); }

Vec3 about(const Vec3& p, const Vec3& pivot, const Mat3& R) { return pivot + R * (p - pivot); }

// Body-frame marker positions at gait phase g for a 1.75 m subject.
std::vector<Vec3> pose_markers(const JointSchema& schema, double g) {
  const auto& rest = rest_markers();
  std::vector<Vec3> out;
  out.reserve(schema.size());
  for (const auto& name : schema.names) out.push_back(rest.at(name));
  auto idx = [&](const char* n) { return *schema.index_of(n); };

  for (int side = 0; side < 2; ++side) {
    const char s = side == 0 ? 'L' : 'R';
    const double phase = g + (side == 0 ? 0.0 : kPi);
    auto id = [&](const char* suffix) { return idx((std::string(1, s) + suffix).c_str()); };

    const double thigh = 0.45 * std::sin(phase);
    const double knee = 0.6 * 0.5 * (1.0 - std::cos(phase));
    const Vec3 hip = rest.at(std::string(1, s) + "ASI");
    const Vec3 knee_pivot = rest.at(std::string(1, s) + "KNE");
    const Mat3 Rt = swing(thigh);
    const Mat3 Rk = swing(-knee);
    for (const char* m : {"THI", "KNE"}) out[id(m)] = about(out[id(m)], hip, Rt);
    for (const char* m : {"ANK", "HEE", "TOE"}) {
      out[id(m)] = about(about(rest.at(std::string(1, s) + m), knee_pivot, Rk), hip, Rt);
    }

    const double arm = -0.35 * std::sin(phase);
    const double elbow = 0.3 + 0.15 * (1.0 + std::sin(phase));
    const Vec3 shoulder = rest.at(std::string(1, s) + "SHO");
    const Vec3 elbow_pivot = rest.at(std::string(1, s) + "ELB");
    const Mat3 Ra = swing(arm);
    const Mat3 Re = swing(elbow);
    out[id("ELB")] = about(out[id("ELB")], shoulder, Ra);
    for (const char* m : {"WRA", "WRB", "FIN"}) {
      out[id(m)] = about(about(rest.at(std::string(1, s) + m), elbow_pivot, Re), shoulder, Ra);
    }
  }
  return out;
}

JointSchema column_schema(std::size_t n) {
  JointSchema s;
  for (std::size_t i = 0; i < n; ++i) s.names.push_back("J" + std::to_string(i));
  return s;
}

Vec3 path_point(const WalkerSpec& spec, double phi) {
  return {spec.semi_major * std::cos(phi), spec.semi_minor * std::sin(phi), 0.0};
}

Vec3 path_tangent(const WalkerSpec& spec, double phi) {
  return {-spec.semi_major * std::sin(phi), spec.semi_minor * std::cos(phi), 0.0};
}

Vec3 perturb_position(const Vec3& p, double sigma, CounterRng& rng) {
  const double x = rng.normal(), y = rng.normal(), z = rng.normal();
  return p + sigma * Vec3(x, y, z);
}

}  // namespace

void WalkerSpec::validate() const {
  if (joints < 2) fail(ErrorKind::InvalidArgument, "walker needs at least 2 joints");
  if (!(frame_rate > 0.0)) fail(ErrorKind::InvalidArgument, "frame rate must be positive");
  if (!(height > 0.0) || !(duration_s >= 0.0) || !(speed >= 0.0) || !(stride_length > 0.0)) {
    fail(ErrorKind::InvalidArgument, "walker height, duration, speed and stride must be non-negative");
  }
  if (!(semi_major > 0.0) || !(semi_minor > 0.0)) fail(ErrorKind::InvalidArgument, "path axes must be positive");
}

std::size_t WalkerSpec::instances() const {
  return static_cast<std::size_t>(std::llround(duration_s * frame_rate));
}

std::vector<std::pair<std::size_t, std::size_t>> walker_bones(const WalkerSpec& spec) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (spec.joints == 33) {
    const JointSchema schema = JointSchema::gait33();
    for (const auto& [a, b] : marker_bones()) out.emplace_back(*schema.index_of(a), *schema.index_of(b));
  } else {
    for (std::size_t i = 0; i + 1 < spec.joints; ++i) out.emplace_back(i, i + 1);
  }
  return out;
}

SkeletonTrack3D gen_walker(const WalkerSpec& spec, std::uint64_t seed) {
  spec.validate();
  CounterRng rng(seed, 0x5741'4c4bULL);
  double phi = 2.0 * kPi * rng.uniform();
  const double gait0 = 2.0 * kPi * rng.uniform();

  SkeletonTrack3D track;
  track.schema = spec.joints == 33 ? JointSchema::gait33() : column_schema(spec.joints);
  const double scale = spec.height / kReferenceHeight;
  const double step = spec.speed / spec.frame_rate;
  constexpr int kSubsteps = 16;
  double walked = 0.0;

  const std::size_t n = spec.instances();
  track.instances.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      for (int s = 0; s < kSubsteps; ++s) phi += (step / kSubsteps) / path_tangent(spec, phi).norm();
      walked += step;
    }
    const Vec3 root = path_point(spec, phi);
    const Vec3 fwd = path_tangent(spec, phi).normalized();
    const Vec3 left = Vec3::UnitZ().cross(fwd);
    Mat3 body;
    body.col(0) = fwd;
    body.col(1) = left;
    body.col(2) = Vec3::UnitZ();

    std::vector<Vec3> local;
    if (spec.joints == 33) {
      local = pose_markers(track.schema, gait0 + 2.0 * kPi * walked / spec.stride_length);
    } else {
      for (std::size_t j = 0; j < spec.joints; ++j) {
        local.emplace_back(0.0, 0.0, kReferenceHeight * static_cast<double>(j) / (spec.joints - 1));
      }
    }

    TrackInstance inst;
    inst.instance = static_cast<std::int64_t>(i);
    inst.time_ms = 1000.0 * static_cast<double>(i) / spec.frame_rate;
    for (const Vec3& p : local) inst.joints.push_back(JointEstimate{root + body * (scale * p), 0.0, 0.0, 0});
    track.instances.push_back(std::move(inst));
  }
  return track;
}

void RigSpec::validate() const {
  if (!(radius > 0.0)) fail(ErrorKind::InvalidArgument, "rig radius must be positive");
  if (long_camera && !(long_distance > radius)) {
    fail(ErrorKind::InvalidArgument, "long camera distance must exceed the close radius");
  }
  if (close_cameras > 0 && heights.empty()) fail(ErrorKind::InvalidArgument, "no close camera heights");
  if (width <= 0 || height <= 0) fail(ErrorKind::InvalidArgument, "image size must be positive");
  if (position_sigma < 0.0 || rotation_sigma < 0.0 || long_position_sigma < 0.0) {
    fail(ErrorKind::InvalidArgument, "perturbation scales must be non-negative");
  }
  intrinsics.validate();
}

SynthRig gen_rig(const RigSpec& spec) {
  spec.validate();
  SynthRig out;
  CounterRng rng(spec.seed, 0x5249'4701ULL);
  for (std::size_t i = 0; i < spec.close_cameras; ++i) {
    const double az = spec.first_azimuth + 2.0 * kPi * static_cast<double>(i) / spec.close_cameras;
    const Point3 pos(spec.radius * std::cos(az), spec.radius * std::sin(az),
                     spec.heights[i % spec.heights.size()]);
    RigCamera cam;
    cam.id = "cam" + std::to_string(i);
    cam.intrinsics = spec.intrinsics;
    cam.width = spec.width;
    cam.height = spec.height;
    cam.pose = look_at(pos, spec.target);
    cam.fixed = i == 0;
    out.truth.cameras.push_back(cam);

    CounterRng cam_rng = rng.split(i);
    const Point3 pos0 = perturb_position(pos, spec.position_sigma, cam_rng);
    const Vec3 w(cam_rng.normal(), cam_rng.normal(), cam_rng.normal());
    if (i > 0) {
      cam.pose = look_at(pos0, spec.target);
      cam.pose.R = cam.pose.R * so3_exp(spec.rotation_sigma * w);
    }
    out.initial.cameras.push_back(cam);
  }
  if (spec.long_camera) {
    const Point3 pos = spec.long_distance * axis_vector(spec.long_axis);
    RigCamera cam;
    cam.id = "long";
    cam.intrinsics = spec.intrinsics;
    cam.width = spec.width;
    cam.height = spec.height;
    cam.role = "long";
    cam.pose = look_at(pos, Point3::Zero());
    out.truth.cameras.push_back(cam);

    CounterRng cam_rng = rng.split(spec.close_cameras);
    const Point3 pos0 = perturb_position(pos, spec.long_position_sigma, cam_rng);
    const NudgeState state = make_nudge_state(pos0, spec.long_axis);
    cam.pose = nudged_pose(state);
    out.initial.cameras.push_back(cam);
    out.initial.longrange = state;
    out.truth.longrange = make_nudge_state(pos, spec.long_axis);
  }
  return out;
}

RenderResult render_detections(const SkeletonTrack3D& track, const std::vector<RigCamera>& cameras,
                               const RenderOptions& opts) {
  if (!(opts.noise_sigma >= 0.0)) fail(ErrorKind::InvalidArgument, "noise sigma must be non-negative");
  if (!(opts.dropout >= 0.0 && opts.dropout < 1.0)) fail(ErrorKind::InvalidArgument, "dropout must lie in [0, 1)");
  RenderResult out;
  out.session.subject = "synthetic";
  out.session.schema = track.schema;
  out.session.offsets = opts.offsets;
  const std::size_t n_joints = track.schema.size();
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    const RigCamera& cam = cameras[c];
    out.session.cameras.push_back(cam.info());
    const int off = opts.offsets.count(cam.id) ? opts.offsets.at(cam.id) : 0;
    DetectionStream stream{cam.id, {}};
    DetectionStream truth{cam.id, {}};
    const CounterRng cam_rng(opts.seed, c);
    for (const TrackInstance& inst : track.instances) {
      CounterRng rng = cam_rng.split(static_cast<std::uint64_t>(inst.instance));
      Frame f{inst.instance + off, inst.time_ms + 1000.0 * off / opts.frame_rate, {}};
      f.joints.resize(n_joints);
      Frame t = f;
      for (std::size_t j = 0; j < n_joints; ++j) {
        const double u = rng.uniform();
        const double nu = rng.normal();
        const double nv = rng.normal();
        const auto& est = inst.joints[j];
        if (!est) continue;
        const Vec3 pc = to_camera(est->point, cam.pose);
        if (!(pc.z() > kDepthEpsilon)) continue;
        const Pixel p = project_camera_point(pc, cam.intrinsics);
        const auto in_image = [&](double pu, double pv) {
          return pu >= 0.0 && pv >= 0.0 && pu <= cam.width && pv <= cam.height;
        };
        if (!in_image(p.u, p.v)) continue;
        t.joints[j] = Detection{p.u, p.v, 1.0};
        if (u < opts.dropout) continue;
        const Detection d{p.u + opts.noise_sigma * nu, p.v + opts.noise_sigma * nv, 1.0 - 0.5 * u};
        if (!in_image(d.u, d.v)) continue;
        f.joints[j] = d;
      }
      stream.frames.push_back(std::move(f));
      truth.frames.push_back(std::move(t));
    }
    out.session.streams.push_back(std::move(stream));
    out.truth.push_back(std::move(truth));
  }
  return out;
}

std::vector<BoxLabel> gen_box_labels(const SkeletonTrack3D& track, const RigCamera& camera,
                                     const LabelOptions& opts) {
  if (opts.every == 0) fail(ErrorKind::InvalidArgument, "label stride must be positive");
  std::vector<BoxLabel> out;
  for (std::size_t i = 0; i < track.instances.size(); i += opts.every) {
    const TrackInstance& inst = track.instances[i];
    std::vector<Pixel> px;
    for (const auto& j : inst.joints) {
      if (!j) continue;
      const Vec3 pc = to_camera(j->point, camera.pose);
      if (pc.z() > kDepthEpsilon) px.push_back(project_camera_point(pc, camera.intrinsics));
    }
    if (px.empty()) continue;
    out.push_back(BoxLabel{camera.id, inst.instance + opts.frame_offset,
                           bounding_rect(px).inflated(opts.inflate), opts.subject});
  }
  return out;
}

}  // namespace gaitanno
