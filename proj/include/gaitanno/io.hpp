#pragma once

// File formats. Structured documents (rig, labels, correspondences, reports)
// are JSON; bulk detections and tracks are JSON Lines whose first line is a
// header. Every document carries "format" and "version" ("1.0"). An unknown
// major version is rejected with SchemaVersionMismatch, an unknown minor
// version produces a warning. Doubles are written in shortest round-trip form,
// so save followed by load reproduces every value exactly.
//
// Field-by-field descriptions with examples live in docs/formats.md.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gaitanno/bundle_adjust.hpp"
#include "gaitanno/eval.hpp"
#include "gaitanno/longrange.hpp"
#include "gaitanno/pnp.hpp"
#include "gaitanno/rig.hpp"
#include "gaitanno/session.hpp"

namespace gaitanno::io {

inline constexpr const char* kVersion = "1.0";

using WarningSink = std::function<void(const std::string&)>;

// Where warnings go when no sink is passed; stderr by default.
void set_default_warning_sink(WarningSink sink);

// Relative paths that do not exist are looked up under $GAITANNO_DATA_DIR.
std::filesystem::path resolve_path(const std::filesystem::path& p);

// ---- rig ----
void write_rig(std::ostream& os, const Rig& rig);
Rig read_rig(std::istream& is, const WarningSink& warn = {});
void save_rig(const std::filesystem::path& path, const Rig& rig);
Rig load_rig(const std::filesystem::path& path, const WarningSink& warn = {});

// ---- detections: one stream per file ----
struct DetectionFile {
  std::string subject;
  CameraInfo camera;
  JointSchema schema;
  DetectionStream stream;
};
void write_detections(std::ostream& os, const DetectionFile& file);
DetectionFile read_detections(std::istream& is, const WarningSink& warn = {});
void save_detections(const std::filesystem::path& path, const DetectionFile& file);
DetectionFile load_detections(const std::filesystem::path& path, const WarningSink& warn = {});

// Assembles a session from per-camera files; all files must share one schema.
CaptureSession session_from_files(std::vector<DetectionFile> files, const FrameOffsets& offsets = {});
std::vector<DetectionFile> session_to_files(const CaptureSession& session);

// ---- tracks ----
void write_track(std::ostream& os, const SkeletonTrack3D& track);
SkeletonTrack3D read_track(std::istream& is, const WarningSink& warn = {});
void save_track(const std::filesystem::path& path, const SkeletonTrack3D& track);
SkeletonTrack3D load_track(const std::filesystem::path& path, const WarningSink& warn = {});

// ---- labels ----
void write_labels(std::ostream& os, const std::vector<BoxLabel>& labels);
std::vector<BoxLabel> read_labels(std::istream& is, const WarningSink& warn = {});
void save_labels(const std::filesystem::path& path, const std::vector<BoxLabel>& labels);
std::vector<BoxLabel> load_labels(const std::filesystem::path& path, const WarningSink& warn = {});

// ---- correspondences (per camera) ----
struct CorrespondenceSet {
  std::string camera_id;
  std::vector<Correspondence> items;
  std::vector<std::int64_t> frame_idx;  // parallel to items

  friend bool operator==(const CorrespondenceSet&, const CorrespondenceSet&) = default;
};
void write_correspondences(std::ostream& os, const CorrespondenceSet& set);
CorrespondenceSet read_correspondences(std::istream& is, const WarningSink& warn = {});
void save_correspondences(const std::filesystem::path& path, const CorrespondenceSet& set);
CorrespondenceSet load_correspondences(const std::filesystem::path& path, const WarningSink& warn = {});

// ---- offsets: {"cam1": 14, ...} inside a versioned document ----
void write_offsets(std::ostream& os, const FrameOffsets& offsets);
FrameOffsets read_offsets(std::istream& is, const WarningSink& warn = {});
FrameOffsets load_offsets(const std::filesystem::path& path, const WarningSink& warn = {});
void save_offsets(const std::filesystem::path& path, const FrameOffsets& offsets);

// ---- reports ----
void write_ba_report(std::ostream& os, const BAReport& report);
BAReport read_ba_report(std::istream& is, const WarningSink& warn = {});
void write_error_report(std::ostream& os, const ErrorReport& report);
ErrorReport read_error_report(std::istream& is, const WarningSink& warn = {});
void write_containment(std::ostream& os, const ContainmentResult& result);
ContainmentResult read_containment(std::istream& is, const WarningSink& warn = {});

// Whole-file helpers used by the CLI.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace gaitanno::io
