#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "gaitanno/geometry.hpp"
#include "gaitanno/rig.hpp"
#include "gaitanno/synth.hpp"

namespace testutil {

using namespace gaitanno;

inline Vec3 gaussian3(std::mt19937_64& g, double sigma = 1.0) {
  std::normal_distribution<double> n(0.0, sigma);
  return {n(g), n(g), n(g)};
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline CameraIntrinsics default_intrinsics() { return {900.0, 900.0, 640.0, 360.0, 0.0, {}}; }

inline CameraIntrinsics distorted_intrinsics() {
  return {880.0, 905.0, 630.0, 355.0, 0.0, {-0.12, 0.03, 0.001, -0.0015, 0.002}};
}

// Camera at distance `dist` from the origin in a random direction above the
// ground, looking at `target` with a small random roll.
inline CameraPose random_pose(std::mt19937_64& g, double dist = 6.0, const Point3& target = Point3::Zero()) {
  const double az = uniform(g, -M_PI, M_PI);
  const double el = uniform(g, -0.3, 0.6);
  const Point3 pos = target + dist * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
  CameraPose p = look_at(pos, target);
  p.R = p.R * so3_exp(Vec3(0, 0, uniform(g, -0.2, 0.2)));
  return p;
}

// Scene shared by several suites: a short walk seen by the default rig.
struct SmallScene {
  SkeletonTrack3D truth;
  SynthRig rig;
  RenderResult render;
  std::vector<RigCamera> close;
};

inline SmallScene small_scene(double noise, double dropout, std::uint64_t seed, double seconds = 4.0,
                              double position_sigma = 0.05, double rotation_sigma = 0.01) {
  SmallScene s;
  WalkerSpec w;
  w.duration_s = seconds;
  s.truth = gen_walker(w, seed);
  RigSpec rs;
  rs.seed = seed;
  rs.position_sigma = position_sigma;
  rs.rotation_sigma = rotation_sigma;
  rs.long_position_sigma = 0.5;
  s.rig = gen_rig(rs);
  for (const auto& c : s.rig.truth.cameras) {
    if (c.role == "close") s.close.push_back(c);
  }
  RenderOptions ro;
  ro.noise_sigma = noise;
  ro.dropout = dropout;
  ro.seed = seed;
  s.render = render_detections(s.truth, s.close, ro);
  return s;
}

}  // namespace testutil
