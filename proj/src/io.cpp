#include "gaitanno/io.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "gaitanno/error.hpp"
#include "gaitanno/json_codec.hpp"

namespace gaitanno::io {
namespace {

std::mutex g_sink_mutex;
WarningSink g_default_sink;

void warn_default(const std::string& msg) {
  std::lock_guard lock(g_sink_mutex);
  if (g_default_sink) {
    g_default_sink(msg);
  } else {
    std::cerr << "warning: " << msg << '\n';
  }
}

void emit(const WarningSink& warn, const std::string& msg) {
  if (warn) {
    warn(msg);
  } else {
    warn_default(msg);
  }
}

}  // namespace

namespace codec {

[[noreturn]] void parse_fail(const Where& w, const std::string& field, const std::string& msg) {
  fail(ErrorKind::ParseError, w.prefix(field) + msg);
}

const json& field(const json& j, const char* name, const Where& w) {
  if (!j.is_object()) parse_fail(w, name, "enclosing value is not an object");
  const auto it = j.find(name);
  if (it == j.end()) parse_fail(w, name, "missing");
  return *it;
}

double num(const json& j, const char* name, const Where& w) {
  const json& v = field(j, name, w);
  if (!v.is_number()) parse_fail(w, name, "expected a number");
  return v.get<double>();
}

std::int64_t integer(const json& j, const char* name, const Where& w) {
  const json& v = field(j, name, w);
  if (!v.is_number_integer()) parse_fail(w, name, "expected an integer");
  return v.get<std::int64_t>();
}

std::string str(const json& j, const char* name, const Where& w) {
  const json& v = field(j, name, w);
  if (!v.is_string()) parse_fail(w, name, "expected a string");
  return v.get<std::string>();
}

bool boolean(const json& j, const char* name, const Where& w) {
  const json& v = field(j, name, w);
  if (!v.is_boolean()) parse_fail(w, name, "expected true or false");
  return v.get<bool>();
}

std::vector<double> numbers(const json& v, const char* name, const Where& w, std::size_t expected) {
  if (!v.is_array()) parse_fail(w, name, "expected an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) parse_fail(w, name, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  if (expected > 0 && out.size() != expected) {
    parse_fail(w, name, "expected " + std::to_string(expected) + " numbers, got " + std::to_string(out.size()));
  }
  return out;
}

Vec3 vec3(const json& j, const char* name, const Where& w) {
  const auto v = numbers(field(j, name, w), name, w, 3);
  return {v[0], v[1], v[2]};
}

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json header(const std::string& format) { return json{{"format", format}, {"version", kVersion}}; }

void check_header(const json& j, const std::string& format, const Where& w, const WarningSink& warn) {
  const std::string f = str(j, "format", w);
  if (f != format) parse_fail(w, "format", "expected '" + format + "', got '" + f + "'");
  const std::string v = str(j, "version", w);
  const auto dot = v.find('.');
  int major = -1;
  int minor = -1;
  try {
    major = std::stoi(v.substr(0, dot));
    minor = dot == std::string::npos ? 0 : std::stoi(v.substr(dot + 1));
  } catch (const std::exception&) {
    parse_fail(w, "version", "malformed version '" + v + "'");
  }
  if (major != 1) {
    fail(ErrorKind::SchemaVersionMismatch,
         format + " version " + v + " is not supported (expected 1.x)");
  }
  if (minor > 0) emit(warn, format + " version " + v + " is newer than 1.0; unknown fields are ignored");
}

// ---- shared sub-objects ----

json intrinsics_json(const CameraIntrinsics& k) {
  return json{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"skew", k.skew}, {"dist", k.dist}};
}

CameraIntrinsics intrinsics_from(const json& j, const Where& w) {
  CameraIntrinsics k;
  k.fx = num(j, "fx", w);
  k.fy = num(j, "fy", w);
  k.cx = num(j, "cx", w);
  k.cy = num(j, "cy", w);
  k.skew = j.contains("skew") ? num(j, "skew", w) : 0.0;
  if (j.contains("dist")) k.dist = numbers(j.at("dist"), "dist", w);
  try {
    k.validate();
  } catch (const Error& e) {
    parse_fail(w, "intrinsics", e.what());
  }
  return k;
}

json pose_json(const CameraPose& p) {
  json R = json::array();
  for (int r = 0; r < 3; ++r) R.push_back(json::array({p.R(r, 0), p.R(r, 1), p.R(r, 2)}));
  return json{{"R", R}, {"t", to_json(p.t)}};
}

CameraPose pose_from(const json& j, const Where& w) {
  CameraPose p;
  const json& R = field(j, "R", w);
  if (!R.is_array() || R.size() != 3) parse_fail(w, "R", "expected 3 rows");
  for (int r = 0; r < 3; ++r) {
    const auto row = numbers(R[static_cast<std::size_t>(r)], "R", w, 3);
    for (int c = 0; c < 3; ++c) p.R(r, c) = row[static_cast<std::size_t>(c)];
  }
  p.t = vec3(j, "t", w);
  if (!p.is_valid()) parse_fail(w, "R", "not a rotation matrix");
  return p;
}

json schema_json(const JointSchema& s) { return json{{"joints", s.names}}; }

JointSchema schema_from(const json& j, const Where& w) {
  const json& names = field(j, "joints", w);
  if (!names.is_array()) parse_fail(w, "joints", "expected an array of names");
  JointSchema s;
  for (const auto& n : names) {
    if (!n.is_string()) parse_fail(w, "joints", "expected an array of names");
    s.names.push_back(n.get<std::string>());
  }
  if (s.names.empty()) parse_fail(w, "joints", "empty joint schema");
  return s;
}

json nudge_json(const NudgeState& s) {
  return json{{"base", {{"theta_e", s.base.theta_e}, {"theta_a", s.base.theta_a}, {"position", to_json(s.base.position)}}},
              {"d_theta_e", s.d_theta_e},
              {"d_theta_a", s.d_theta_a},
              {"d_d", s.d_d},
              {"placement_axis", std::string(to_string(s.placement_axis))}};
}

NudgeState nudge_from(const json& j, const Where& w) {
  NudgeState s;
  const json& base = field(j, "base", w);
  s.base.theta_e = num(base, "theta_e", w);
  s.base.theta_a = num(base, "theta_a", w);
  s.base.position = vec3(base, "position", w);
  s.d_theta_e = num(j, "d_theta_e", w);
  s.d_theta_a = num(j, "d_theta_a", w);
  s.d_d = num(j, "d_d", w);
  try {
    s.placement_axis = placement_axis_from_string(str(j, "placement_axis", w));
    s.validate();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ParseError) throw;
    parse_fail(w, "longrange", e.what());
  }
  return s;
}

json summary_json(const ErrorSummary& s) {
  return json{{"n", s.n}, {"sum", s.sum}, {"mean", s.mean}, {"median", s.median}, {"p95", s.p95}, {"max", s.max}};
}

ErrorSummary summary_from(const json& j, const Where& w) {
  ErrorSummary s;
  s.n = static_cast<std::size_t>(integer(j, "n", w));
  s.sum = num(j, "sum", w);
  s.mean = num(j, "mean", w);
  s.median = num(j, "median", w);
  s.p95 = num(j, "p95", w);
  s.max = num(j, "max", w);
  return s;
}

json count_json(const ContainmentCount& c) {
  return json{{"inside", c.inside}, {"total", c.total}, {"frames", c.frames}, {"percentage", c.percentage()}};
}

ContainmentCount count_from(const json& j, const Where& w) {
  ContainmentCount c;
  c.inside = static_cast<std::size_t>(integer(j, "inside", w));
  c.total = static_cast<std::size_t>(integer(j, "total", w));
  c.frames = static_cast<std::size_t>(integer(j, "frames", w));
  return c;
}

json label_json(const BoxLabel& l) {
  return json{{"camera_id", l.camera_id},
              {"frame_idx", l.frame_idx},
              {"rect", json::array({l.rect.u_min, l.rect.v_min, l.rect.u_max, l.rect.v_max})},
              {"subject", l.subject}};
}

BoxLabel label_from(const json& l, const Where& w) {
  BoxLabel b;
  b.camera_id = str(l, "camera_id", w);
  b.frame_idx = integer(l, "frame_idx", w);
  const auto r = numbers(field(l, "rect", w), "rect", w, 4);
  b.rect = Rect{r[0], r[1], r[2], r[3]};
  if (!b.rect.valid()) parse_fail(w, "rect", "expected u_min < u_max and v_min < v_max");
  b.subject = l.contains("subject") ? str(l, "subject", w) : std::string();
  return b;
}

json ba_report_json(const BAReport& r) {
  return json{{"initial_cost", r.initial_cost},
              {"final_cost", r.final_cost},
              {"cost_history", r.cost_history},
              {"mean_residual_before", r.mean_residual_before},
              {"mean_residual_after", r.mean_residual_after},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"termination", r.termination},
              {"fixed_camera", r.fixed_camera},
              {"auto_fixed", r.auto_fixed},
              {"observations", r.observations},
              {"points", r.points}};
}

BAReport ba_report_from(const json& j, const Where& w) {
  BAReport r;
  r.initial_cost = num(j, "initial_cost", w);
  r.final_cost = num(j, "final_cost", w);
  r.cost_history = numbers(field(j, "cost_history", w), "cost_history", w);
  r.mean_residual_before = num(j, "mean_residual_before", w);
  r.mean_residual_after = num(j, "mean_residual_after", w);
  r.iterations = static_cast<int>(integer(j, "iterations", w));
  r.converged = boolean(j, "converged", w);
  r.termination = str(j, "termination", w);
  r.fixed_camera = str(j, "fixed_camera", w);
  r.auto_fixed = boolean(j, "auto_fixed", w);
  r.observations = static_cast<std::size_t>(integer(j, "observations", w));
  r.points = static_cast<std::size_t>(integer(j, "points", w));
  return r;
}

json error_report_json(const ErrorReport& r) {
  json j{{"subject", r.subject}, {"overall", summary_json(r.overall)}, {"cameras", json::array()}};
  for (const auto& c : r.cameras) {
    j["cameras"].push_back(json{{"camera_id", c.camera_id},
                                {"stats", summary_json(c.stats)},
                                {"histogram", {{"bin_width", c.histogram.bin_width}, {"counts", c.histogram.counts}}}});
  }
  return j;
}

ErrorReport error_report_from(const json& j, const Where& w) {
  ErrorReport r;
  r.subject = str(j, "subject", w);
  r.overall = summary_from(field(j, "overall", w), w);
  const json& cams = field(j, "cameras", w);
  if (!cams.is_array()) parse_fail(w, "cameras", "expected an array");
  for (const auto& c : cams) {
    CameraErrorReport cr;
    cr.camera_id = str(c, "camera_id", w);
    cr.stats = summary_from(field(c, "stats", w), w);
    const json& h = field(c, "histogram", w);
    cr.histogram.bin_width = num(h, "bin_width", w);
    const json& counts = field(h, "counts", w);
    if (!counts.is_array()) parse_fail(w, "counts", "expected an array");
    for (const auto& n : counts) {
      if (!n.is_number_unsigned()) parse_fail(w, "counts", "expected non-negative integers");
      cr.histogram.counts.push_back(n.get<std::size_t>());
    }
    r.cameras.push_back(std::move(cr));
  }
  return r;
}

json containment_json(const ContainmentResult& r) {
  json j{{"percentage", r.percentage}, {"overall", count_json(r.overall)}, {"per_subject", json::object()}};
  for (const auto& [s, c] : r.per_subject) j["per_subject"][s] = count_json(c);
  return j;
}

ContainmentResult containment_from(const json& j, const Where& w) {
  ContainmentResult r;
  r.percentage = num(j, "percentage", w);
  r.overall = count_from(field(j, "overall", w), w);
  const json& per = field(j, "per_subject", w);
  if (!per.is_object()) parse_fail(w, "per_subject", "expected an object");
  for (const auto& [s, c] : per.items()) r.per_subject[s] = count_from(c, w);
  return r;
}

}  // namespace codec

namespace {

using namespace codec;

json parse_document(std::istream& is) {
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + upto, '\n'));
    fail(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + e.what());
  }
}

json parse_line(const std::string& line, std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
  }
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(resolve_path(path), std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ostream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) fail(ErrorKind::IoError, "failed writing '" + path.string() + "'");
}


template <class F>
void for_each_line(std::istream& is, F&& f) {
  std::string line;
  std::size_t no = 0;
  while (std::getline(is, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    f(parse_line(line, no), no);
  }
}


}  // namespace

void set_default_warning_sink(WarningSink sink) {
  std::lock_guard lock(g_sink_mutex);
  g_default_sink = std::move(sink);
}

std::filesystem::path resolve_path(const std::filesystem::path& p) {
  if (p.is_absolute() || std::filesystem::exists(p)) return p;
  if (const char* dir = std::getenv("GAITANNO_DATA_DIR"); dir != nullptr && *dir != '\0') {
    const auto candidate = std::filesystem::path(dir) / p;
    if (std::filesystem::exists(candidate)) return candidate;
  }
  return p;
}

// ---- rig ----

void write_rig(std::ostream& os, const Rig& rig) {
  json j = header("gaitanno.rig");
  j["cameras"] = json::array();
  for (const RigCamera& c : rig.cameras) {
    j["cameras"].push_back(json{{"id", c.id},
                                {"role", c.role},
                                {"fixed", c.fixed},
                                {"width", c.width},
                                {"height", c.height},
                                {"intrinsics", intrinsics_json(c.intrinsics)},
                                {"pose", pose_json(c.pose)}});
  }
  j["offsets"] = json::object();
  for (const auto& [id, off] : rig.offsets) j["offsets"][id] = off;
  if (rig.longrange) j["longrange"] = nudge_json(*rig.longrange);
  os << j.dump(2) << '\n';
}

Rig read_rig(std::istream& is, const WarningSink& warn) {
  const json j = parse_document(is);
  const Where w;
  check_header(j, "gaitanno.rig", w, warn);
  Rig rig;
  const json& cams = field(j, "cameras", w);
  if (!cams.is_array()) parse_fail(w, "cameras", "expected an array");
  for (const auto& c : cams) {
    RigCamera cam;
    cam.id = str(c, "id", w);
    cam.role = c.contains("role") ? str(c, "role", w) : "close";
    cam.fixed = c.contains("fixed") ? boolean(c, "fixed", w) : false;
    cam.width = static_cast<int>(integer(c, "width", w));
    cam.height = static_cast<int>(integer(c, "height", w));
    cam.intrinsics = intrinsics_from(field(c, "intrinsics", w), w);
    cam.pose = pose_from(field(c, "pose", w), w);
    rig.cameras.push_back(std::move(cam));
  }
  if (j.contains("offsets")) {
    const json& offs = j.at("offsets");
    if (!offs.is_object()) parse_fail(w, "offsets", "expected an object");
    for (const auto& [id, v] : offs.items()) {
      if (!v.is_number_integer()) parse_fail(w, "offsets", "offset for '" + id + "' is not an integer");
      rig.offsets[id] = v.get<int>();
    }
  }
  if (j.contains("longrange")) rig.longrange = nudge_from(j.at("longrange"), w);
  try {
    rig.validate();
  } catch (const Error& e) {
    parse_fail(w, "cameras", e.what());
  }
  return rig;
}

void save_rig(const std::filesystem::path& path, const Rig& rig) {
  auto out = open_out(path);
  write_rig(out, rig);
  finish(out, path);
}

Rig load_rig(const std::filesystem::path& path, const WarningSink& warn) {
  auto in = open_in(path);
  return read_rig(in, warn);
}

// ---- detections ----

void write_detections(std::ostream& os, const DetectionFile& file) {
  json h = header("gaitanno.detections");
  h["subject"] = file.subject;
  h["camera"] = json{{"id", file.camera.id},
                     {"width", file.camera.width},
                     {"height", file.camera.height},
                     {"intrinsics", intrinsics_json(file.camera.intrinsics)}};
  h["schema"] = schema_json(file.schema);
  os << h.dump() << '\n';
  for (const Frame& f : file.stream.frames) {
    json joints = json::object();
    for (std::size_t i = 0; i < f.joints.size() && i < file.schema.size(); ++i) {
      if (const auto& d = f.joints[i]) joints[file.schema.names[i]] = json::array({d->u, d->v, d->confidence});
    }
    os << json{{"frame_idx", f.frame_idx}, {"timestamp_ms", f.timestamp_ms}, {"joints", joints}}.dump() << '\n';
  }
}

DetectionFile read_detections(std::istream& is, const WarningSink& warn) {
  DetectionFile file;
  bool have_header = false;
  for_each_line(is, [&](const json& j, std::size_t no) {
    const Where w{no};
    if (!have_header) {
      check_header(j, "gaitanno.detections", w, warn);
      file.subject = j.contains("subject") ? str(j, "subject", w) : std::string();
      const json& cam = field(j, "camera", w);
      file.camera.id = str(cam, "id", w);
      file.camera.width = static_cast<int>(integer(cam, "width", w));
      file.camera.height = static_cast<int>(integer(cam, "height", w));
      file.camera.intrinsics = intrinsics_from(field(cam, "intrinsics", w), w);
      file.schema = schema_from(field(j, "schema", w), w);
      file.stream.camera_id = file.camera.id;
      have_header = true;
      return;
    }
    Frame f;
    f.frame_idx = integer(j, "frame_idx", w);
    f.timestamp_ms = num(j, "timestamp_ms", w);
    f.joints.resize(file.schema.size());
    const json& joints = field(j, "joints", w);
    if (!joints.is_object()) parse_fail(w, "joints", "expected an object keyed by joint name");
    for (const auto& [name, v] : joints.items()) {
      const auto idx = file.schema.index_of(name);
      if (!idx) parse_fail(w, "joints", "unknown joint '" + name + "'");
      const auto uvc = numbers(v, "joints", w, 3);
      if (!(uvc[2] >= 0.0 && uvc[2] <= 1.0)) {
        parse_fail(w, "joints", "confidence of joint '" + name + "' outside [0, 1]");
      }
      f.joints[*idx] = Detection{uvc[0], uvc[1], uvc[2]};
    }
    if (!file.stream.frames.empty()) {
      const Frame& prev = file.stream.frames.back();
      if (f.frame_idx <= prev.frame_idx || f.timestamp_ms <= prev.timestamp_ms) {
        parse_fail(w, "frame_idx", "frames must be strictly increasing in index and timestamp");
      }
    }
    file.stream.frames.push_back(std::move(f));
  });
  if (!have_header) fail(ErrorKind::ParseError, "line 1: missing detections header");
  return file;
}

void save_detections(const std::filesystem::path& path, const DetectionFile& file) {
  auto out = open_out(path);
  write_detections(out, file);
  finish(out, path);
}

DetectionFile load_detections(const std::filesystem::path& path, const WarningSink& warn) {
  auto in = open_in(path);
  return read_detections(in, warn);
}

CaptureSession session_from_files(std::vector<DetectionFile> files, const FrameOffsets& offsets) {
  CaptureSession s;
  for (DetectionFile& f : files) {
    if (s.cameras.empty()) {
      s.subject = f.subject;
      s.schema = f.schema;
    } else if (!(f.schema == s.schema)) {
      fail(ErrorKind::InvalidArgument, "camera '" + f.camera.id + "' uses a different joint schema");
    }
    s.cameras.push_back(f.camera);
    s.streams.push_back(std::move(f.stream));
  }
  s.offsets = offsets;
  s.validate();
  return s;
}

std::vector<DetectionFile> session_to_files(const CaptureSession& session) {
  std::vector<DetectionFile> out;
  for (std::size_t c = 0; c < session.cameras.size(); ++c) {
    out.push_back(DetectionFile{session.subject, session.cameras[c], session.schema, session.streams[c]});
  }
  return out;
}

// ---- tracks ----

void write_track(std::ostream& os, const SkeletonTrack3D& track) {
  json h = header("gaitanno.track");
  h["schema"] = schema_json(track.schema);
  os << h.dump() << '\n';
  for (const TrackInstance& inst : track.instances) {
    json joints = json::object();
    for (std::size_t i = 0; i < inst.joints.size() && i < track.schema.size(); ++i) {
      if (const auto& e = inst.joints[i]) {
        joints[track.schema.names[i]] = json{{"p", to_json(e->point)},
                                             {"rms_ray_gap", e->rms_ray_gap},
                                             {"condition", e->condition},
                                             {"views", e->views}};
      }
    }
    os << json{{"instance", inst.instance}, {"time_ms", inst.time_ms}, {"joints", joints}}.dump() << '\n';
  }
}

SkeletonTrack3D read_track(std::istream& is, const WarningSink& warn) {
  SkeletonTrack3D track;
  bool have_header = false;
  for_each_line(is, [&](const json& j, std::size_t no) {
    const Where w{no};
    if (!have_header) {
      check_header(j, "gaitanno.track", w, warn);
      track.schema = schema_from(field(j, "schema", w), w);
      have_header = true;
      return;
    }
    TrackInstance inst;
    inst.instance = integer(j, "instance", w);
    inst.time_ms = num(j, "time_ms", w);
    inst.joints.resize(track.schema.size());
    const json& joints = field(j, "joints", w);
    if (!joints.is_object()) parse_fail(w, "joints", "expected an object keyed by joint name");
    for (const auto& [name, v] : joints.items()) {
      const auto idx = track.schema.index_of(name);
      if (!idx) parse_fail(w, "joints", "unknown joint '" + name + "'");
      JointEstimate e;
      e.point = vec3(v, "p", w);
      e.rms_ray_gap = num(v, "rms_ray_gap", w);
      e.condition = num(v, "condition", w);
      e.views = static_cast<int>(integer(v, "views", w));
      inst.joints[*idx] = e;
    }
    if (!track.instances.empty() && inst.time_ms <= track.instances.back().time_ms) {
      parse_fail(w, "time_ms", "instances must be strictly increasing in time");
    }
    track.instances.push_back(std::move(inst));
  });
  if (!have_header) fail(ErrorKind::ParseError, "line 1: missing track header");
  return track;
}

void save_track(const std::filesystem::path& path, const SkeletonTrack3D& track) {
  auto out = open_out(path);
  write_track(out, track);
  finish(out, path);
}

SkeletonTrack3D load_track(const std::filesystem::path& path, const WarningSink& warn) {
  auto in = open_in(path);
  return read_track(in, warn);
}

// ---- labels ----

void write_labels(std::ostream& os, const std::vector<BoxLabel>& labels) {
  json j = header("gaitanno.labels");
  j["labels"] = json::array();
  for (const BoxLabel& l : labels) j["labels"].push_back(label_json(l));
  os << j.dump(2) << '\n';
}

std::vector<BoxLabel> read_labels(std::istream& is, const WarningSink& warn) {
  const json j = parse_document(is);
  const Where w;
  check_header(j, "gaitanno.labels", w, warn);
  const json& arr = field(j, "labels", w);
  if (!arr.is_array()) parse_fail(w, "labels", "expected an array");
  std::vector<BoxLabel> out;
  for (const auto& l : arr) out.push_back(label_from(l, w));
  return out;
}

void save_labels(const std::filesystem::path& path, const std::vector<BoxLabel>& labels) {
  auto out = open_out(path);
  write_labels(out, labels);
  finish(out, path);
}

std::vector<BoxLabel> load_labels(const std::filesystem::path& path, const WarningSink& warn) {
  auto in = open_in(path);
  return read_labels(in, warn);
}

// ---- correspondences ----

void write_correspondences(std::ostream& os, const CorrespondenceSet& set) {
  json j = header("gaitanno.correspondences");
  j["camera_id"] = set.camera_id;
  j["correspondences"] = json::array();
  for (std::size_t i = 0; i < set.items.size(); ++i) {
    const Correspondence& c = set.items[i];
    j["correspondences"].push_back(json{{"marker_id", c.marker_id},
                                        {"world", to_json(c.world)},
                                        {"image", json::array({c.image.u, c.image.v})},
                                        {"frame_idx", i < set.frame_idx.size() ? set.frame_idx[i] : 0}});
  }
  os << j.dump(2) << '\n';
}

CorrespondenceSet read_correspondences(std::istream& is, const WarningSink& warn) {
  const json j = parse_document(is);
  const Where w;
  check_header(j, "gaitanno.correspondences", w, warn);
  CorrespondenceSet set;
  set.camera_id = str(j, "camera_id", w);
  const json& arr = field(j, "correspondences", w);
  if (!arr.is_array()) parse_fail(w, "correspondences", "expected an array");
  for (const auto& c : arr) {
    Correspondence item;
    item.marker_id = str(c, "marker_id", w);
    item.world = vec3(c, "world", w);
    const auto uv = numbers(field(c, "image", w), "image", w, 2);
    item.image = Pixel{uv[0], uv[1]};
    set.items.push_back(std::move(item));
    set.frame_idx.push_back(c.contains("frame_idx") ? integer(c, "frame_idx", w) : 0);
  }
  return set;
}

void save_correspondences(const std::filesystem::path& path, const CorrespondenceSet& set) {
  auto out = open_out(path);
  write_correspondences(out, set);
  finish(out, path);
}

CorrespondenceSet load_correspondences(const std::filesystem::path& path, const WarningSink& warn) {
  auto in = open_in(path);
  return read_correspondences(in, warn);
}

// ---- offsets ----

void write_offsets(std::ostream& os, const FrameOffsets& offsets) {
  json j = header("gaitanno.offsets");
  j["offsets"] = json::object();
  for (const auto& [id, off] : offsets) j["offsets"][id] = off;
  os << j.dump(2) << '\n';
}

FrameOffsets read_offsets(std::istream& is, const WarningSink& warn) {
  const json j = parse_document(is);
  const Where w;
  check_header(j, "gaitanno.offsets", w, warn);
  FrameOffsets out;
  const json& offs = field(j, "offsets", w);
  if (!offs.is_object()) parse_fail(w, "offsets", "expected an object");
  for (const auto& [id, v] : offs.items()) {
    if (!v.is_number_integer()) parse_fail(w, "offsets", "offset for '" + id + "' is not an integer");
    out[id] = v.get<int>();
  }
  return out;
}

FrameOffsets load_offsets(const std::filesystem::path& path, const WarningSink& warn) {
  auto in = open_in(path);
  return read_offsets(in, warn);
}

void save_offsets(const std::filesystem::path& path, const FrameOffsets& offsets) {
  auto out = open_out(path);
  write_offsets(out, offsets);
  finish(out, path);
}

// ---- reports ----

void write_ba_report(std::ostream& os, const BAReport& r) {
  json j = header("gaitanno.ba_report");
  j.update(ba_report_json(r));
  os << j.dump(2) << '\n';
}

BAReport read_ba_report(std::istream& is, const WarningSink& warn) {
  const json j = parse_document(is);
  check_header(j, "gaitanno.ba_report", {}, warn);
  return ba_report_from(j);
}

void write_error_report(std::ostream& os, const ErrorReport& r) {
  json j = header("gaitanno.error_report");
  j.update(error_report_json(r));
  os << j.dump(2) << '\n';
}

ErrorReport read_error_report(std::istream& is, const WarningSink& warn) {
  const json j = parse_document(is);
  check_header(j, "gaitanno.error_report", {}, warn);
  return error_report_from(j);
}

void write_containment(std::ostream& os, const ContainmentResult& result) {
  json j = header("gaitanno.containment");
  j.update(containment_json(result));
  os << j.dump(2) << '\n';
}

ContainmentResult read_containment(std::istream& is, const WarningSink& warn) {
  const json j = parse_document(is);
  check_header(j, "gaitanno.containment", {}, warn);
  return containment_from(j);
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  auto out = open_out(path);
  out << contents;
  finish(out, path);
}

}  // namespace gaitanno::io
