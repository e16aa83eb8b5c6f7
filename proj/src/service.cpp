#include "gaitanno/service.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gaitanno/error.hpp"
#include "gaitanno/json_codec.hpp"
#include "gaitanno/longrange.hpp"
#include "gaitanno/pipeline.hpp"
#include "gaitanno/pnp.hpp"
#include "gaitanno/triangulate.hpp"
#include "httplib.h"

namespace gaitanno {
namespace {

using io::codec::json;

Response json_response(int status, const json& body) { return {status, body.dump(), "application/json"}; }

Response error_response(int status, std::string_view kind, const std::string& message) {
  return json_response(status, json{{"error", {{"kind", kind}, {"message", message}}}});
}

int status_for(ErrorKind kind) { return kind == ErrorKind::NotFound ? 404 : 422; }

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : path) {
    if (ch == '?') break;
    if (ch == '/') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

std::int64_t parse_index(const std::string& s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(ErrorKind::InvalidArgument, "bad frame index '" + s + "'");
  return v;
}

json parse_body(const std::string& body) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  try {
    json j = json::parse(body);
    if (!j.is_object()) fail(ErrorKind::ParseError, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ParseError, e.what());
  }
}

struct Conflict {
  std::string message;
};

}  // namespace

AnnotationService::AnnotationService(CaptureSession session, Rig rig, ServiceConfig config)
    : session_(std::move(session)), config_(std::move(config)), rig_(std::move(rig)) {
  session_.validate();
  rig_.validate();
  for (const auto& c : rig_.cameras) pose_source_[c.id] = "initial";
}

AnnotationService::~AnnotationService() { wait_for_jobs(); }

void AnnotationService::wait_for_jobs() {
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(jobs_mutex_);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
}

void AnnotationService::set_track(SkeletonTrack3D track) {
  std::unique_lock lock(mutex_);
  track_ = std::move(track);
  mutated("set track");
}

void AnnotationService::set_labels(std::vector<BoxLabel> labels) {
  std::unique_lock lock(mutex_);
  labels_ = std::move(labels);
  mutated("set labels");
}

void AnnotationService::mutated(const std::string& what) {
  const std::uint64_t rev = ++revision_;
  mutation_log_.push_back(std::to_string(rev) + " " + what);
}

int AnnotationService::offset_of(const std::string& cam) const {
  if (const auto it = session_.offsets.find(cam); it != session_.offsets.end()) return it->second;
  if (const auto it = rig_.offsets.find(cam); it != rig_.offsets.end()) return it->second;
  return 0;
}

Response AnnotationService::handle(const Request& req) {
  try {
    return route(req);
  } catch (const Error& e) {
    return error_response(status_for(e.kind()), to_string(e.kind()), e.what());
  } catch (const Conflict& c) {
    return error_response(409, "Conflict", c.message);
  } catch (const std::exception& e) {
    return error_response(500, "Internal", e.what());
  }
}

Response AnnotationService::route(const Request& req) {
  const auto p = split_path(req.path);
  const std::string& m = req.method;
  const bool mutation = m == "POST" || m == "DELETE";
  auto check_revision = [&] {
    if (req.if_match && *req.if_match != revision_.load()) {
      throw Conflict{"revision " + std::to_string(*req.if_match) + " is stale, current is " +
                     std::to_string(revision_.load())};
    }
  };

  if (!mutation && m != "GET") return error_response(405, "MethodNotAllowed", m);

  if (m == "GET") {
    if (p.size() == 1 && p[0] == "session") return get_session();
    if (p.size() == 3 && p[0] == "frames") return get_frame(p[1], parse_index(p[2]));
    if (p.size() == 2 && p[0] == "jobs") return get_job(p[1]);
    if (p.size() == 3 && p[0] == "reproject") return reproject(p[1], parse_index(p[2]));
    if (p.size() == 1 && p[0] == "metrics") return metrics();
    return error_response(404, "NotFound", "no route GET " + req.path);
  }

  // Mutations: jobs and the revision check happen under the writer lock
  // inside each handler, except solve_ba which only snapshots.
  if (m == "POST" && p.size() == 2 && p[0] == "solve" && p[1] == "ba") {
    check_revision();
    return solve_ba(req.body);
  }
  if (m == "POST" && p.size() == 2 && p[0] == "session" && p[1] == "save") return save(req.body);

  check_revision();
  if (m == "POST" && p.size() == 2 && p[0] == "correspondences") return post_correspondence(p[1], req.body);
  if (m == "DELETE" && p.size() == 3 && p[0] == "correspondences") return delete_correspondence(p[1], p[2]);
  if (m == "POST" && p.size() == 3 && p[0] == "solve" && p[1] == "pnp") return solve_pnp(p[2], req.body);
  if (m == "POST" && p.size() == 2 && p[0] == "solve" && p[1] == "triangulate") return solve_triangulate();
  if (m == "POST" && p.size() == 2 && p[0] == "longrange" && p[1] == "nudge") return nudge(req.body);
  if (m == "POST" && p.size() == 3 && p[0] == "labels") return post_label(p[1], parse_index(p[2]), req.body);
  if (m == "DELETE" && p.size() == 3 && p[0] == "labels") return delete_label(p[1], parse_index(p[2]));
  return error_response(404, "NotFound", "no route " + m + " " + req.path);
}

Response AnnotationService::get_session() const {
  std::shared_lock lock(mutex_);
  json cams = json::array();
  for (const RigCamera& c : rig_.cameras) {
    const DetectionStream* s = session_.stream(c.id);
    const auto corr = correspondences_.find(c.id);
    cams.push_back(json{{"id", c.id},
                        {"role", c.role},
                        {"width", c.width},
                        {"height", c.height},
                        {"frames", s ? s->frames.size() : 0},
                        {"offset", offset_of(c.id)},
                        {"correspondences", corr == correspondences_.end() ? 0 : corr->second.items.size()},
                        {"pose_source", pose_source_.at(c.id)},
                        {"pose", io::codec::pose_json(c.pose)}});
  }
  return json_response(200, json{{"subject", session_.subject},
                                 {"revision", revision_.load()},
                                 {"schema", session_.schema.names},
                                 {"cameras", cams},
                                 {"track_instances", track_ ? track_->instances.size() : 0},
                                 {"labels", labels_.size()},
                                 {"mutations", mutation_log_.size()},
                                 {"longrange", rig_.longrange ? io::codec::nudge_json(*rig_.longrange) : json()}});
}

Response AnnotationService::get_frame(const std::string& cam, std::int64_t idx) const {
  std::shared_lock lock(mutex_);
  if (rig_.find(cam) == nullptr) fail(ErrorKind::NotFound, "unknown camera '" + cam + "'");
  json out{{"camera_id", cam}, {"frame_idx", idx}, {"detections", json::object()}, {"image", json()}};
  if (const DetectionStream* s = session_.stream(cam)) {
    const Frame* f = s->find(idx);
    if (f == nullptr) fail(ErrorKind::NotFound, "camera '" + cam + "' has no frame " + std::to_string(idx));
    out["timestamp_ms"] = f->timestamp_ms;
    for (std::size_t j = 0; j < f->joints.size(); ++j) {
      if (const auto& d = f->joints[j]) out["detections"][session_.schema.names[j]] = json::array({d->u, d->v, d->confidence});
    }
  }
  if (!config_.asset_dir.empty()) {
    const std::string rel = cam + "/" + std::to_string(idx) + ".png";
    if (std::filesystem::exists(config_.asset_dir / rel)) out["image"] = "/assets/" + rel;
  }
  return json_response(200, out);
}

Response AnnotationService::post_correspondence(const std::string& cam, const std::string& body) {
  const json j = parse_body(body);
  std::unique_lock lock(mutex_);
  if (rig_.find(cam) == nullptr) fail(ErrorKind::NotFound, "unknown camera '" + cam + "'");
  Correspondence c;
  c.marker_id = io::codec::str(j, "marker_id");
  c.image = Pixel{io::codec::num(j, "u"), io::codec::num(j, "v")};
  const std::int64_t frame = j.contains("frame_idx") ? io::codec::integer(j, "frame_idx") : 0;
  if (j.contains("world")) {
    c.world = io::codec::vec3(j, "world");
  } else {
    if (!track_) fail(ErrorKind::NotFound, "no 3D track loaded to look up marker '" + c.marker_id + "'");
    const auto joint = session_.schema.index_of(c.marker_id);
    if (!joint) fail(ErrorKind::NotFound, "unknown marker '" + c.marker_id + "'");
    const TrackInstance* inst = track_->find(frame - offset_of(cam));
    if (inst == nullptr || !inst->joints[*joint]) {
      fail(ErrorKind::NotFound, "marker '" + c.marker_id + "' has no 3D position at frame " + std::to_string(frame));
    }
    c.world = inst->joints[*joint]->point;
  }
  io::CorrespondenceSet& set = correspondences_[cam];
  set.camera_id = cam;
  bool replaced = false;
  for (std::size_t i = 0; i < set.items.size(); ++i) {
    if (set.items[i].marker_id == c.marker_id) {
      set.items[i] = c;
      set.frame_idx[i] = frame;
      replaced = true;
    }
  }
  if (!replaced) {
    set.items.push_back(c);
    set.frame_idx.push_back(frame);
  }
  mutated("correspondence " + cam + " " + c.marker_id);
  return json_response(200, json{{"camera_id", cam}, {"count", set.items.size()}, {"revision", revision_.load()}});
}

Response AnnotationService::delete_correspondence(const std::string& cam, const std::string& marker) {
  std::unique_lock lock(mutex_);
  const auto it = correspondences_.find(cam);
  if (it == correspondences_.end()) fail(ErrorKind::NotFound, "camera '" + cam + "' has no correspondences");
  auto& set = it->second;
  for (std::size_t i = 0; i < set.items.size(); ++i) {
    if (set.items[i].marker_id != marker) continue;
    set.items.erase(set.items.begin() + static_cast<std::ptrdiff_t>(i));
    set.frame_idx.erase(set.frame_idx.begin() + static_cast<std::ptrdiff_t>(i));
    mutated("delete correspondence " + cam + " " + marker);
    return json_response(200, json{{"camera_id", cam}, {"count", set.items.size()}, {"revision", revision_.load()}});
  }
  fail(ErrorKind::NotFound, "camera '" + cam + "' has no correspondence '" + marker + "'");
}

Response AnnotationService::solve_pnp(const std::string& cam, const std::string& body) {
  const json j = parse_body(body);
  PnPOptions opts;
  if (j.contains("outlier_factor") && !j.at("outlier_factor").is_null()) opts.outlier_factor = io::codec::num(j, "outlier_factor");
  {
    std::lock_guard jl(jobs_mutex_);
    if (job_running_) throw Conflict{"a bundle adjustment job is running"};
  }
  std::unique_lock lock(mutex_);
  RigCamera* rc = rig_.find(cam);
  if (rc == nullptr) fail(ErrorKind::NotFound, "unknown camera '" + cam + "'");
  const auto it = correspondences_.find(cam);
  const std::vector<Correspondence> corrs = it == correspondences_.end() ? std::vector<Correspondence>{} : it->second.items;
  const PnPResult r = gaitanno::solve_pnp(corrs, rc->intrinsics, opts);
  rc->pose = r.pose;
  pose_source_[cam] = "pnp";
  mutated("pnp " + cam);
  return json_response(200, json{{"camera_id", cam},
                                 {"pose", io::codec::pose_json(r.pose)},
                                 {"mean_residual", r.mean_residual},
                                 {"rejected", r.rejected},
                                 {"revision", revision_.load()}});
}

Response AnnotationService::solve_triangulate() {
  {
    std::lock_guard jl(jobs_mutex_);
    if (job_running_) throw Conflict{"a bundle adjustment job is running"};
  }
  std::unique_lock lock(mutex_);
  track_ = triangulate_sequence(session_, rig_.camera_set(), session_.offsets);
  std::size_t joints = 0;
  for (const auto& inst : track_->instances) {
    for (const auto& jt : inst.joints) joints += jt.has_value();
  }
  mutated("triangulate");
  return json_response(200, json{{"instances", track_->instances.size()}, {"joints", joints}, {"revision", revision_.load()}});
}

Response AnnotationService::solve_ba(const std::string& body) {
  const json j = parse_body(body);
  BAOptions opts;
  if (j.contains("optimize_points")) opts.optimize_points = io::codec::boolean(j, "optimize_points");
  if (j.contains("huber_delta") && !j.at("huber_delta").is_null()) opts.huber_delta = io::codec::num(j, "huber_delta");
  if (j.contains("max_iterations")) opts.max_iterations = static_cast<int>(io::codec::integer(j, "max_iterations"));
  std::size_t instances = config_.ba_instances;
  if (j.contains("instances")) instances = static_cast<std::size_t>(io::codec::integer(j, "instances"));

  Rig rig;
  {
    std::shared_lock lock(mutex_);
    rig = rig_;
  }
  std::string id;
  {
    std::lock_guard jl(jobs_mutex_);
    if (job_running_) throw Conflict{"a bundle adjustment job is already running"};
    job_running_ = true;
    id = std::to_string(next_job_++);
    jobs_[id] = Job{};
  }
  const std::uint64_t start_revision = revision_.load();
  std::lock_guard jl(jobs_mutex_);
  workers_.emplace_back([this, id, rig, opts, instances, start_revision]() mutable {
    try {
      SequenceOptions seq;
      seq.max_instances = instances;
      const SkeletonTrack3D ba_track = triangulate_sequence(session_, rig.camera_set(), session_.offsets, seq);
      const BAProblem problem = build_problem(session_, rig, ba_track);
      opts.progress = [this, &id](int it, double cost) {
        std::lock_guard jl(jobs_mutex_);
        jobs_[id].iteration = it;
        jobs_[id].cost = cost;
      };
      const BAResult result = optimize(problem, opts);
      {
        std::unique_lock lock(mutex_);
        apply_to_rig(problem, result, rig);
        for (const auto& c : problem.cameras) {
          rig_.find(c.id)->pose = rig.find(c.id)->pose;
          pose_source_[c.id] = "ba";
        }
        track_ = triangulate_sequence(session_, rig_.camera_set(), session_.offsets);
        mutated("bundle adjustment job " + id + " from revision " + std::to_string(start_revision));
      }
      std::lock_guard jl(jobs_mutex_);
      jobs_[id].state = "done";
      jobs_[id].report = result.report;
      job_running_ = false;
    } catch (const Error& e) {
      std::lock_guard jl(jobs_mutex_);
      jobs_[id].state = "failed";
      jobs_[id].error_kind = std::string(to_string(e.kind()));
      jobs_[id].error_message = e.what();
      job_running_ = false;
    } catch (const std::exception& e) {
      std::lock_guard jl(jobs_mutex_);
      jobs_[id].state = "failed";
      jobs_[id].error_kind = "Internal";
      jobs_[id].error_message = e.what();
      job_running_ = false;
    }
  });
  return json_response(202, json{{"job_id", id}, {"state", "running"}});
}

Response AnnotationService::get_job(const std::string& id) const {
  std::lock_guard jl(jobs_mutex_);
  const auto it = jobs_.find(id);
  if (it == jobs_.end()) fail(ErrorKind::NotFound, "unknown job '" + id + "'");
  const Job& job = it->second;
  json out{{"job_id", id}, {"state", job.state}, {"iteration", job.iteration}, {"cost", job.cost}};
  if (job.report) out["report"] = io::codec::ba_report_json(*job.report);
  if (job.state == "failed") out["error"] = json{{"kind", job.error_kind}, {"message", job.error_message}};
  return json_response(200, out);
}

Response AnnotationService::nudge(const std::string& body) {
  const json j = parse_body(body);
  std::unique_lock lock(mutex_);
  if (!rig_.longrange) fail(ErrorKind::NotFound, "rig has no long-range nudge state");
  const RigCamera* lc = rig_.long_camera();
  if (lc == nullptr) fail(ErrorKind::NotFound, "rig has no long-range camera");
  NudgeState next = *rig_.longrange;
  const bool absolute = j.contains("mode") && io::codec::str(j, "mode") == "absolute";
  const auto value = [&](const char* name, double current) {
    if (!j.contains(name)) return absolute ? 0.0 : current;
    return absolute ? io::codec::num(j, name) : current + io::codec::num(j, name);
  };
  next.d_theta_e = value("d_theta_e", next.d_theta_e);
  next.d_theta_a = value("d_theta_a", next.d_theta_a);
  next.d_d = value("d_d", next.d_d);
  next.validate();
  rig_.longrange = next;
  rig_.find(lc->id)->pose = nudged_pose(next);
  mutated("nudge");

  json out{{"state", io::codec::nudge_json(next)}, {"pose", io::codec::pose_json(rig_.long_camera()->pose)},
           {"containment", json()}, {"labeled_frames", 0}, {"revision", revision_.load()}};
  std::size_t frames = 0;
  for (const auto& l : labels_) frames += l.camera_id == lc->id;
  out["labeled_frames"] = frames;
  if (track_ && frames > 0) {
    GridRefineOptions g;
    g.camera_id = lc->id;
    g.frame_offset = offset_of(lc->id);
    out["containment"] = containment_for_state(*track_, labels_, lc->intrinsics, next, g);
  }
  return json_response(200, out);
}

Response AnnotationService::reproject(const std::string& cam, std::int64_t idx) const {
  std::shared_lock lock(mutex_);
  const RigCamera* rc = rig_.find(cam);
  if (rc == nullptr) fail(ErrorKind::NotFound, "unknown camera '" + cam + "'");
  if (!track_) fail(ErrorKind::NotFound, "no 3D track loaded");
  const TrackInstance* inst = track_->find(idx - offset_of(cam));
  if (inst == nullptr) fail(ErrorKind::NotFound, "no track instance for frame " + std::to_string(idx));
  json joints = json::object();
  for (std::size_t j = 0; j < inst->joints.size(); ++j) {
    if (!inst->joints[j]) continue;
    const Vec3 pc = to_camera(inst->joints[j]->point, rc->pose);
    if (!(pc.z() > kDepthEpsilon)) continue;
    const Pixel px = project_camera_point(pc, rc->intrinsics);
    joints[track_->schema.names[j]] = json::array({px.u, px.v});
  }
  return json_response(200, json{{"camera_id", cam}, {"frame_idx", idx}, {"instance", inst->instance}, {"joints", joints}});
}

Response AnnotationService::post_label(const std::string& cam, std::int64_t idx, const std::string& body) {
  const json j = parse_body(body);
  std::unique_lock lock(mutex_);
  if (rig_.find(cam) == nullptr) fail(ErrorKind::NotFound, "unknown camera '" + cam + "'");
  const auto r = io::codec::numbers(io::codec::field(j, "rect"), "rect", {}, 4);
  BoxLabel label{cam, idx, Rect{r[0], r[1], r[2], r[3]},
                 j.contains("subject") ? io::codec::str(j, "subject") : session_.subject};
  if (!label.rect.valid()) fail(ErrorKind::InvalidArgument, "label rectangle has zero or negative area");
  bool replaced = false;
  for (auto& l : labels_) {
    if (l.camera_id == cam && l.frame_idx == idx) {
      l = label;
      replaced = true;
    }
  }
  if (!replaced) labels_.push_back(label);
  mutated("label " + cam + " " + std::to_string(idx));
  return json_response(200, json{{"label", io::codec::label_json(label)}, {"labels", labels_.size()}, {"revision", revision_.load()}});
}

Response AnnotationService::delete_label(const std::string& cam, std::int64_t idx) {
  std::unique_lock lock(mutex_);
  const auto it = std::find_if(labels_.begin(), labels_.end(),
                               [&](const BoxLabel& l) { return l.camera_id == cam && l.frame_idx == idx; });
  if (it == labels_.end()) fail(ErrorKind::NotFound, "no label for camera '" + cam + "' frame " + std::to_string(idx));
  labels_.erase(it);
  mutated("delete label " + cam + " " + std::to_string(idx));
  return json_response(200, json{{"labels", labels_.size()}, {"revision", revision_.load()}});
}

Response AnnotationService::metrics() const {
  std::shared_lock lock(mutex_);
  json out{{"revision", revision_.load()}, {"reprojection", json()}, {"containment", json()}};
  if (!track_) return json_response(200, out);
  out["reprojection"] = io::codec::error_report_json(error_report(session_, rig_.camera_set(), *track_));
  if (const RigCamera* lc = rig_.long_camera()) {
    std::vector<BoxLabel> mine;
    for (const auto& l : labels_) {
      if (l.camera_id == lc->id) mine.push_back(l);
    }
    if (!mine.empty()) {
      const auto kp = reproject_track(*track_, lc->id, lc->intrinsics, lc->pose, offset_of(lc->id));
      const ContainmentResult c = bbox_containment(kp, mine);
      out["containment"] = io::codec::containment_json(c);
      out["containment"]["camera_id"] = lc->id;
    }
  }
  return json_response(200, out);
}

Response AnnotationService::save(const std::string& body) const {
  const json j = parse_body(body);
  std::filesystem::path dir = config_.state_dir;
  if (j.contains("path")) dir = io::codec::str(j, "path");
  if (dir.empty()) fail(ErrorKind::InvalidArgument, "no state directory configured");
  save_state(dir);
  return json_response(200, json{{"saved", dir.string()}, {"revision", revision_.load()}});
}

void AnnotationService::save_state(const std::filesystem::path& dir) const {
  std::shared_lock lock(mutex_);
  std::filesystem::create_directories(dir / "correspondences");
  io::save_rig(dir / "rig.json", rig_);
  io::save_labels(dir / "labels.json", labels_);
  for (const auto& [cam, set] : correspondences_) io::save_correspondences(dir / "correspondences" / (cam + ".json"), set);
  if (track_) io::save_track(dir / "track.jsonl", *track_);
}

void AnnotationService::load_state(const std::filesystem::path& dir) {
  Rig rig = io::load_rig(dir / "rig.json");
  std::vector<BoxLabel> labels;
  if (std::filesystem::exists(dir / "labels.json")) labels = io::load_labels(dir / "labels.json");
  std::map<std::string, io::CorrespondenceSet> corr;
  if (std::filesystem::exists(dir / "correspondences")) {
    for (const auto& e : std::filesystem::directory_iterator(dir / "correspondences")) {
      if (e.path().extension() != ".json") continue;
      io::CorrespondenceSet s = io::load_correspondences(e.path());
      corr[s.camera_id] = std::move(s);
    }
  }
  std::optional<SkeletonTrack3D> track;
  if (std::filesystem::exists(dir / "track.jsonl")) track = io::load_track(dir / "track.jsonl");

  std::unique_lock lock(mutex_);
  rig_ = std::move(rig);
  labels_ = std::move(labels);
  correspondences_ = std::move(corr);
  track_ = std::move(track);
  for (const auto& c : rig_.cameras) pose_source_.try_emplace(c.id, "initial");
  mutated("load state " + dir.string());
}

// ---- HTTP front end ----

struct HttpServer::Impl {
  explicit Impl(AnnotationService& s) : service(s) {}
  AnnotationService& service;
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer(AnnotationService& service) : impl_(std::make_unique<Impl>(service)) {
  auto handler = [this](const httplib::Request& hreq, httplib::Response& hres) {
    Request req{hreq.method, hreq.path, hreq.body, std::nullopt};
    if (hreq.has_header("If-Match")) {
      try {
        req.if_match = std::stoull(hreq.get_header_value("If-Match"));
      } catch (const std::exception&) {
        hres.status = 400;
        hres.set_content(R"({"error":{"kind":"InvalidArgument","message":"If-Match must be a revision number"}})",
                         "application/json");
        return;
      }
    }
    const Response res = impl_->service.handle(req);
    hres.status = res.status;
    hres.set_content(res.body, res.content_type);
  };
  auto& s = impl_->server;
  const auto& assets = impl_->service.config().asset_dir;
  if (!assets.empty()) s.set_mount_point("/assets", assets.string());
  s.Get(".*", handler);
  s.Post(".*", handler);
  s.Delete(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) fail(ErrorKind::IoError, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) fail(ErrorKind::IoError, "cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace gaitanno
