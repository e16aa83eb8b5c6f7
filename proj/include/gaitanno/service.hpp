#pragma once

// Local HTTP service backing the annotation UI.
//
// AnnotationService is transport-independent: handle() maps a Request to a
// Response and is what the tests drive. HttpServer binds it to cpp-httplib.
// Reads run concurrently; mutations are serialized by a single writer lock.
// A mutation may carry "If-Match: <revision>"; a stale revision gets 409.
// Bundle adjustment runs as a background job polled through /jobs/{id}.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "gaitanno/bundle_adjust.hpp"
#include "gaitanno/eval.hpp"
#include "gaitanno/io.hpp"
#include "gaitanno/rig.hpp"
#include "gaitanno/session.hpp"

namespace gaitanno {

struct Request {
  std::string method;  // GET, POST, DELETE
  std::string path;
  std::string body;
  std::optional<std::uint64_t> if_match;  // expected revision for mutations
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8765;
  std::filesystem::path asset_dir;  // background images, served under /assets
  std::filesystem::path state_dir;  // target of POST /session/save
  std::size_t ba_instances = 400;
};

class AnnotationService {
 public:
  AnnotationService(CaptureSession session, Rig rig, ServiceConfig config = {});
  ~AnnotationService();
  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  Response handle(const Request& req);

  // Optional initial state.
  void set_track(SkeletonTrack3D track);
  void set_labels(std::vector<BoxLabel> labels);

  // Writes rig, labels, correspondences and track into `dir`; load_state
  // restores them.
  void save_state(const std::filesystem::path& dir) const;
  void load_state(const std::filesystem::path& dir);

  void wait_for_jobs();
  std::uint64_t revision() const { return revision_.load(); }
  const ServiceConfig& config() const { return config_; }

 private:
  struct Job {
    std::string state = "running";  // running, done, failed
    int iteration = 0;
    double cost = 0.0;
    std::optional<BAReport> report;
    std::string error_kind;
    std::string error_message;
  };

  Response route(const Request& req);
  Response get_session() const;
  Response get_frame(const std::string& cam, std::int64_t idx) const;
  Response post_correspondence(const std::string& cam, const std::string& body);
  Response delete_correspondence(const std::string& cam, const std::string& marker);
  Response solve_pnp(const std::string& cam, const std::string& body);
  Response solve_ba(const std::string& body);
  Response solve_triangulate();
  Response get_job(const std::string& id) const;
  Response nudge(const std::string& body);
  Response reproject(const std::string& cam, std::int64_t idx) const;
  Response post_label(const std::string& cam, std::int64_t idx, const std::string& body);
  Response delete_label(const std::string& cam, std::int64_t idx);
  Response metrics() const;
  Response save(const std::string& body) const;

  int offset_of(const std::string& cam) const;
  void mutated(const std::string& what);

  const CaptureSession session_;
  ServiceConfig config_;

  mutable std::shared_mutex mutex_;  // guards everything below
  Rig rig_;
  std::map<std::string, io::CorrespondenceSet> correspondences_;
  std::vector<BoxLabel> labels_;
  std::optional<SkeletonTrack3D> track_;
  std::map<std::string, std::string> pose_source_;  // camera -> initial | pnp | ba
  std::vector<std::string> mutation_log_;
  std::atomic<std::uint64_t> revision_{0};

  mutable std::mutex jobs_mutex_;
  std::map<std::string, Job> jobs_;
  std::vector<std::thread> workers_;
  bool job_running_ = false;  // guarded by jobs_mutex_
  std::uint64_t next_job_ = 1;
};

// cpp-httplib front end. start() binds and serves on a background thread.
class HttpServer {
 public:
  explicit HttpServer(AnnotationService& service);
  ~HttpServer();
  // Returns the bound port (useful with port 0). Throws IoError.
  int start(const std::string& host, int port);
  void stop();
  // Serves on the calling thread until stop().
  void run(const std::string& host, int port);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gaitanno
