// gaitanno command line: one verb per pipeline step, each reading and writing
// the documented file formats. Exit codes: 0 success, 2 validation or input
// error, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gaitanno/bundle_adjust.hpp"
#include "gaitanno/error.hpp"
#include "gaitanno/eval.hpp"
#include "gaitanno/io.hpp"
#include "gaitanno/longrange.hpp"
#include "gaitanno/pipeline.hpp"
#include "gaitanno/pnp.hpp"
#include "gaitanno/service.hpp"
#include "gaitanno/synth.hpp"
#include "gaitanno/triangulate.hpp"

namespace fs = std::filesystem;
using namespace gaitanno;

namespace {

struct Args {
  std::string rig, track, labels, out, offsets, grid, camera, report, csv;
  std::vector<std::string> detections, correspondences;
  std::uint64_t seed = 0;
  double noise = 2.0;
  double dropout = 0.05;
  double duration = 120.0;
  double position_sigma = 0.05;
  double rotation_sigma = 0.01;
  double long_position_sigma = 0.5;
  double threshold = 0.2;
  double outlier_factor = 0.0;
  double confidence_floor = 0.5;
  std::size_t instances = 400;
  bool no_points = false;
  std::string host = "127.0.0.1";
  int port = 8765;
  std::string assets, state;
};

void require(const std::string& value, const char* flag) {
  if (value.empty()) fail(ErrorKind::InvalidArgument, std::string("missing required flag ") + flag);
}

Rig load_rig(const Args& a) {
  require(a.rig, "--rig");
  return io::load_rig(io::resolve_path(a.rig));
}

CaptureSession load_session(const Args& a) {
  if (a.detections.empty()) fail(ErrorKind::InvalidArgument, "missing required flag --detections");
  std::vector<io::DetectionFile> files;
  for (const auto& d : a.detections) files.push_back(io::load_detections(io::resolve_path(d)));
  FrameOffsets offsets;
  if (!a.offsets.empty()) offsets = io::load_offsets(io::resolve_path(a.offsets));
  return io::session_from_files(std::move(files), offsets);
}

SkeletonTrack3D load_track(const Args& a) {
  require(a.track, "--track");
  return io::load_track(io::resolve_path(a.track));
}

std::vector<BoxLabel> load_labels(const Args& a) {
  require(a.labels, "--labels");
  return io::load_labels(io::resolve_path(a.labels));
}

// Restricts a rig's camera set to the cameras present in the session.
CameraSet session_cameras(const Rig& rig, const CaptureSession& session) {
  const CameraSet all = rig.camera_set();
  CameraSet out;
  for (const auto& c : session.cameras) {
    const auto it = all.find(c.id);
    if (it == all.end()) fail(ErrorKind::NotFound, "rig has no camera '" + c.id + "'");
    out.emplace(c.id, it->second);
  }
  return out;
}

void emit(const Args& a, const std::string& text) {
  if (a.out.empty() || a.out == "-") {
    std::cout << text;
  } else {
    io::write_file(a.out, text);
  }
}

template <class Writer>
std::string render(Writer&& w) {
  std::ostringstream os;
  w(os);
  return os.str();
}

// "theta_half:theta_step:distance_half:distance_step"
GridSpec parse_grid(const std::string& text) {
  GridSpec g;
  if (text.empty()) return g;
  std::vector<double> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ':')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      fail(ErrorKind::InvalidArgument, "--grid: bad number '" + part + "'");
    }
  }
  if (v.size() != 4) fail(ErrorKind::InvalidArgument, "--grid expects theta_half:theta_step:distance_half:distance_step");
  g.theta = {v[0], v[1]};
  g.distance = {v[2], v[3]};
  return g;
}

std::vector<FrameKeypoints> keypoints_of(const io::DetectionFile& f, double floor) {
  std::vector<FrameKeypoints> out;
  for (const Frame& fr : f.stream.frames) {
    FrameKeypoints k{f.camera.id, fr.frame_idx, {}};
    for (const auto& d : fr.joints) {
      if (d && d->confidence >= floor) k.points.push_back(d->pixel());
    }
    out.push_back(std::move(k));
  }
  return out;
}

int cmd_synth(const Args& a) {
  require(a.out, "--out");
  const fs::path dir = a.out;
  WalkerSpec walker;
  walker.duration_s = a.duration;
  const SkeletonTrack3D truth = gen_walker(walker, a.seed);
  RigSpec rs;
  rs.seed = a.seed;
  rs.position_sigma = a.position_sigma;
  rs.rotation_sigma = a.rotation_sigma;
  rs.long_position_sigma = a.long_position_sigma;
  const SynthRig rig = gen_rig(rs);

  std::vector<RigCamera> close, far;
  for (const auto& c : rig.truth.cameras) (c.role == "long" ? far : close).push_back(c);
  RenderOptions ro;
  ro.noise_sigma = a.noise;
  ro.dropout = a.dropout;
  ro.seed = a.seed;
  const RenderResult close_r = render_detections(truth, close, ro);
  const RenderResult far_r = render_detections(truth, far, ro);

  fs::create_directories(dir / "detections");
  io::save_rig(dir / "rig.json", rig.initial);
  io::save_rig(dir / "rig_truth.json", rig.truth);
  io::save_track(dir / "track_truth.jsonl", truth);
  for (const auto& f : io::session_to_files(close_r.session)) io::save_detections(dir / "detections" / (f.camera.id + ".jsonl"), f);
  for (const auto& f : io::session_to_files(far_r.session)) io::save_detections(dir / (f.camera.id + ".jsonl"), f);
  std::vector<BoxLabel> labels;
  for (const auto& c : far) {
    const auto l = gen_box_labels(truth, c);
    labels.insert(labels.end(), l.begin(), l.end());
  }
  io::save_labels(dir / "labels.json", labels);
  io::save_offsets(dir / "offsets.json", close_r.session.offsets);
  std::cerr << "wrote " << truth.instances.size() << " instances, " << close.size() << " close and " << far.size()
            << " long cameras to " << dir.string() << "\n";
  return 0;
}

int cmd_calibrate_pnp(const Args& a) {
  Rig rig = load_rig(a);
  if (a.correspondences.empty()) fail(ErrorKind::InvalidArgument, "missing required flag --correspondences");
  PnPOptions opts;
  if (a.outlier_factor > 0) opts.outlier_factor = a.outlier_factor;
  for (const auto& path : a.correspondences) {
    const io::CorrespondenceSet set = io::load_correspondences(io::resolve_path(path));
    RigCamera* cam = rig.find(set.camera_id);
    if (cam == nullptr) fail(ErrorKind::NotFound, "rig has no camera '" + set.camera_id + "'");
    const PnPResult r = solve_pnp(set.items, cam->intrinsics, opts);
    cam->pose = r.pose;
    std::cerr << set.camera_id << ": mean residual " << r.mean_residual << " px, " << r.rejected.size() << " rejected\n";
  }
  emit(a, render([&](std::ostream& os) { io::write_rig(os, rig); }));
  return 0;
}

int cmd_triangulate(const Args& a) {
  const Rig rig = load_rig(a);
  const CaptureSession session = load_session(a);
  SequenceOptions opts;
  opts.triangulation.confidence_floor = a.confidence_floor;
  const SkeletonTrack3D track = triangulate_sequence(session, session_cameras(rig, session), session.offsets, opts);
  emit(a, render([&](std::ostream& os) { io::write_track(os, track); }));
  return 0;
}

int cmd_bundle_adjust(const Args& a) {
  Rig rig = load_rig(a);
  const CaptureSession session = load_session(a);
  SequenceOptions seq;
  seq.max_instances = a.instances;
  seq.triangulation.confidence_floor = a.confidence_floor;
  const SkeletonTrack3D track = triangulate_sequence(session, session_cameras(rig, session), session.offsets, seq);
  BuildOptions build;
  build.confidence_floor = a.confidence_floor;
  const BAProblem problem = build_problem(session, rig, track, build);
  BAOptions opts;
  opts.optimize_points = !a.no_points;
  const BAResult result = optimize(problem, opts);
  apply_to_rig(problem, result, rig);
  if (!a.report.empty()) io::write_file(a.report, render([&](std::ostream& os) { io::write_ba_report(os, result.report); }));
  std::cerr << "mean residual " << result.report.mean_residual_before << " -> " << result.report.mean_residual_after
            << " px after " << result.report.iterations << " iterations (" << result.report.termination << ")\n";
  emit(a, render([&](std::ostream& os) { io::write_rig(os, rig); }));
  return 0;
}

int cmd_reproject(const Args& a) {
  const Rig rig = load_rig(a);
  const SkeletonTrack3D track = load_track(a);
  const RigCamera* cam = a.camera.empty() ? rig.long_camera() : rig.find(a.camera);
  if (cam == nullptr) fail(ErrorKind::NotFound, "no camera '" + (a.camera.empty() ? "long" : a.camera) + "' in rig");
  const int offset = rig.offsets.count(cam->id) ? rig.offsets.at(cam->id) : 0;
  io::DetectionFile f;
  f.subject = "reprojection";
  f.camera = cam->info();
  f.schema = track.schema;
  f.stream.camera_id = cam->id;
  for (const TrackInstance& inst : track.instances) {
    Frame fr{inst.instance + offset, inst.time_ms, std::vector<std::optional<Detection>>(track.schema.size())};
    for (std::size_t j = 0; j < inst.joints.size(); ++j) {
      if (!inst.joints[j]) continue;
      const Vec3 pc = to_camera(inst.joints[j]->point, cam->pose);
      if (!(pc.z() > kDepthEpsilon)) continue;
      const Pixel px = project_camera_point(pc, cam->intrinsics);
      fr.joints[j] = Detection{px.u, px.v, 1.0};
    }
    f.stream.frames.push_back(std::move(fr));
  }
  emit(a, render([&](std::ostream& os) { io::write_detections(os, f); }));
  return 0;
}

int cmd_refine_longrange(const Args& a) {
  Rig rig = load_rig(a);
  const SkeletonTrack3D track = load_track(a);
  const std::vector<BoxLabel> labels = load_labels(a);
  RigCamera* cam = a.camera.empty() ? rig.long_camera() : rig.find(a.camera);
  if (cam == nullptr) fail(ErrorKind::NotFound, "rig has no long-range camera");
  GridRefineOptions opts;
  opts.grid = parse_grid(a.grid);
  opts.camera_id = cam->id;
  opts.frame_offset = rig.offsets.count(cam->id) ? rig.offsets.at(cam->id) : 0;
  const NudgeState state0 = rig.longrange ? *rig.longrange : make_nudge_state(cam->pose.t);
  const GridRefineResult r = grid_refine(track, labels, cam->intrinsics, state0, opts);
  rig.longrange = r.state;
  cam->pose = nudged_pose(r.state);
  std::cerr << "containment " << r.containment << "% over " << r.frames << " frames, " << r.grid_points
            << " grid points" << (r.flagged ? " (flagged: no keypoint contained)" : "") << "\n";
  emit(a, render([&](std::ostream& os) { io::write_rig(os, rig); }));
  return r.flagged ? 3 : 0;
}

int cmd_eval_reproj(const Args& a) {
  const Rig rig = load_rig(a);
  const CaptureSession session = load_session(a);
  const SkeletonTrack3D track = load_track(a);
  const ErrorReport report =
      error_report(session, session_cameras(rig, session), track, ErrorReportOptions{a.confidence_floor, 0.5});
  if (!a.csv.empty()) io::write_file(a.csv, histogram_table_csv(report));
  emit(a, render([&](std::ostream& os) { io::write_error_report(os, report); }));
  return 0;
}

int cmd_eval_bbox(const Args& a) {
  if (a.detections.size() != 1) fail(ErrorKind::InvalidArgument, "eval-bbox takes exactly one --detections file");
  const io::DetectionFile f = io::load_detections(io::resolve_path(a.detections[0]));
  std::vector<BoxLabel> labels;
  for (auto& l : load_labels(a)) {
    if (l.camera_id == f.camera.id) labels.push_back(std::move(l));
  }
  const ContainmentResult r = bbox_containment(keypoints_of(f, 0.0), labels);
  emit(a, render([&](std::ostream& os) { io::write_containment(os, r); }));
  return 0;
}

int cmd_eval_success(const Args& a) {
  if (a.detections.size() != 1) fail(ErrorKind::InvalidArgument, "eval-success takes exactly one --detections file");
  const io::DetectionFile f = io::load_detections(io::resolve_path(a.detections[0]));
  std::vector<BoxLabel> labels;
  for (auto& l : load_labels(a)) {
    if (l.camera_id == f.camera.id) labels.push_back(std::move(l));
  }
  const double rate = detection_success(keypoints_of(f, a.confidence_floor), labels, a.threshold);
  std::ostringstream os;
  os.precision(17);
  os << "{\"format\":\"gaitanno.success\",\"version\":\"" << io::kVersion << "\",\"camera_id\":\"" << f.camera.id
     << "\",\"threshold\":" << a.threshold << ",\"frames\":" << labels.size() << ",\"success_rate\":" << rate << "}\n";
  emit(a, os.str());
  return 0;
}

int cmd_serve(const Args& a) {
  Rig rig = load_rig(a);
  CaptureSession session = load_session(a);
  ServiceConfig cfg;
  cfg.host = a.host;
  cfg.port = a.port;
  cfg.asset_dir = a.assets;
  cfg.state_dir = a.state;
  cfg.ba_instances = a.instances;
  AnnotationService service(std::move(session), std::move(rig), cfg);
  if (!a.track.empty()) service.set_track(load_track(a));
  if (!a.labels.empty()) service.set_labels(load_labels(a));
  if (!a.state.empty() && fs::exists(fs::path(a.state) / "rig.json")) service.load_state(a.state);
  HttpServer server(service);
  std::cerr << "serving on http://" << a.host << ":" << a.port << "\n";
  server.run(a.host, a.port);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-camera gait annotation toolkit"};
  app.require_subcommand(1);
  Args a;
  if (const char* env = std::getenv("GAITANNO_DATA_DIR")) app.footer(std::string("Data directory: ") + env);

  auto add_io = [&](CLI::App* s) {
    s->add_option("--out", a.out, "Output file (stdout when omitted)");
  };
  auto add_rig = [&](CLI::App* s) { s->add_option("--rig", a.rig, "Rig file")->required(); };
  auto add_session = [&](CLI::App* s) {
    s->add_option("--detections", a.detections, "Detection file, one per camera")->required();
    s->add_option("--offsets", a.offsets, "Frame offset file");
    s->add_option("--confidence-floor", a.confidence_floor, "Minimum detection confidence");
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic session with ground truth");
  synth->add_option("--out", a.out, "Output directory")->required();
  synth->add_option("--seed", a.seed, "Random seed");
  synth->add_option("--noise", a.noise, "Detection noise sigma in pixels");
  synth->add_option("--dropout", a.dropout, "Detection dropout rate");
  synth->add_option("--duration", a.duration, "Walk duration in seconds");
  synth->add_option("--position-sigma", a.position_sigma, "Initial close camera position error, meters");
  synth->add_option("--rotation-sigma", a.rotation_sigma, "Initial close camera rotation error, radians");
  synth->add_option("--long-position-sigma", a.long_position_sigma, "Initial long camera position error, meters");

  auto* pnp = app.add_subcommand("calibrate-pnp", "Solve camera poses from marker correspondences");
  add_rig(pnp);
  add_io(pnp);
  pnp->add_option("--correspondences", a.correspondences, "Correspondence file, one per camera")->required();
  pnp->add_option("--outlier-factor", a.outlier_factor, "Reject residuals above this multiple of the median");

  auto* tri = app.add_subcommand("triangulate", "Triangulate a 3D track from synchronized detections");
  add_rig(tri);
  add_session(tri);
  add_io(tri);

  auto* ba = app.add_subcommand("bundle-adjust", "Refine close camera extrinsics");
  add_rig(ba);
  add_session(ba);
  add_io(ba);
  ba->add_option("--instances", a.instances, "Instances used for adjustment");
  ba->add_option("--report", a.report, "Write the adjustment report here");
  ba->add_flag("--no-points", a.no_points, "Hold 3D points fixed");

  auto* rep = app.add_subcommand("reproject", "Reproject a track into one camera");
  add_rig(rep);
  add_io(rep);
  rep->add_option("--track", a.track, "Track file")->required();
  rep->add_option("--camera", a.camera, "Camera id (default: the long camera)");

  auto* lr = app.add_subcommand("refine-longrange", "Align the long-range camera by grid search");
  add_rig(lr);
  add_io(lr);
  lr->add_option("--track", a.track, "Track file")->required();
  lr->add_option("--labels", a.labels, "Box labels")->required();
  lr->add_option("--grid", a.grid, "theta_half:theta_step:distance_half:distance_step");
  lr->add_option("--camera", a.camera, "Camera id (default: the long camera)");

  auto* er = app.add_subcommand("eval-reproj", "Reprojection error report");
  add_rig(er);
  add_session(er);
  add_io(er);
  er->add_option("--track", a.track, "Track file")->required();
  er->add_option("--csv", a.csv, "Write the histogram table here");

  auto* eb = app.add_subcommand("eval-bbox", "Keypoint containment in labeled boxes");
  add_io(eb);
  eb->add_option("--detections", a.detections, "Keypoint file (detections or reprojection)")->required();
  eb->add_option("--labels", a.labels, "Box labels")->required();

  auto* es = app.add_subcommand("eval-success", "Detector success rate against labeled boxes");
  add_io(es);
  es->add_option("--detections", a.detections, "Detection file")->required();
  es->add_option("--labels", a.labels, "Box labels")->required();
  es->add_option("--threshold", a.threshold, "Required fraction of keypoints inside the box");
  es->add_option("--confidence-floor", a.confidence_floor, "Minimum detection confidence");

  auto* serve = app.add_subcommand("serve", "Serve the annotation API");
  add_rig(serve);
  add_session(serve);
  serve->add_option("--track", a.track, "Initial track");
  serve->add_option("--labels", a.labels, "Initial labels");
  serve->add_option("--host", a.host, "Bind address");
  serve->add_option("--port", a.port, "Port");
  serve->add_option("--assets", a.assets, "Directory of background images");
  serve->add_option("--state", a.state, "State directory for save and restore");
  serve->add_option("--instances", a.instances, "Instances used for adjustment jobs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) return cmd_synth(a);
    if (*pnp) return cmd_calibrate_pnp(a);
    if (*tri) return cmd_triangulate(a);
    if (*ba) return cmd_bundle_adjust(a);
    if (*rep) return cmd_reproject(a);
    if (*lr) return cmd_refine_longrange(a);
    if (*er) return cmd_eval_reproj(a);
    if (*eb) return cmd_eval_bbox(a);
    if (*es) return cmd_eval_success(a);
    if (*serve) return cmd_serve(a);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_numerical(e.kind()) ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
