#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gaitanno/geometry.hpp"
#include "gaitanno/session.hpp"

namespace gaitanno {

struct ErrorSummary {
  std::size_t n = 0;
  double sum = 0.0;  // sum of pixel distances, kept for exact cross-checks
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;  // linear interpolation between order statistics
  double max = 0.0;

  friend bool operator==(const ErrorSummary&, const ErrorSummary&) = default;
};

struct ErrorStats : ErrorSummary {
  std::map<std::string, ErrorSummary> per_camera;
};

// Mean pixel distance e = (1/n) * sum |p_r - p_2d| plus distribution
// statistics. Throws LengthMismatch and EmptyInput.
ErrorStats reprojection_error(std::span<const Pixel> predicted, std::span<const Pixel> reference);

ErrorSummary summarize(std::vector<double> distances);

struct Rect {
  double u_min = 0.0;
  double v_min = 0.0;
  double u_max = 0.0;
  double v_max = 0.0;

  // Edges count as inside.
  bool contains(const Pixel& p) const {
    return p.u >= u_min && p.u <= u_max && p.v >= v_min && p.v <= v_max;
  }
  double area() const { return (u_max - u_min) * (v_max - v_min); }
  // Grows width and height by `fraction` of themselves about the centre.
  Rect inflated(double fraction) const;
  bool valid() const { return u_min < u_max && v_min < v_max; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

Rect bounding_rect(std::span<const Pixel> points);

struct BoxLabel {
  std::string camera_id;
  std::int64_t frame_idx = 0;
  Rect rect;
  std::string subject;

  friend bool operator==(const BoxLabel&, const BoxLabel&) = default;
};

// 2D keypoints of one camera frame (reprojections or detector output).
struct FrameKeypoints {
  std::string camera_id;
  std::int64_t frame_idx = 0;
  std::vector<Pixel> points;
};

struct ContainmentCount {
  std::size_t inside = 0;
  std::size_t total = 0;
  std::size_t frames = 0;
  double percentage() const { return total == 0 ? 0.0 : 100.0 * static_cast<double>(inside) / static_cast<double>(total); }
  friend bool operator==(const ContainmentCount&, const ContainmentCount&) = default;
};

struct ContainmentResult {
  double percentage = 0.0;
  ContainmentCount overall;
  std::map<std::string, ContainmentCount> per_subject;
  friend bool operator==(const ContainmentResult&, const ContainmentResult&) = default;
};

// Percentage of keypoints lying inside their frame's label rectangle. Throws
// NoLabels, and NotFound when a label names a frame absent from `keypoints`.
ContainmentResult bbox_containment(std::span<const FrameKeypoints> keypoints,
                                   std::span<const BoxLabel> labels);

// Fraction of labeled frames where at least `threshold` of the detected
// keypoints lie in the label rectangle. Frames without detections fail.
// Throws NoLabels and InvalidArgument for a threshold outside (0, 1].
double detection_success(std::span<const FrameKeypoints> detections, std::span<const BoxLabel> labels,
                         double threshold = 0.2);

struct Histogram {
  double bin_width = 0.5;
  std::vector<std::size_t> counts;  // bin i covers [i*w, (i+1)*w)

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

Histogram make_histogram(std::span<const double> values, double bin_width = 0.5);

struct CameraErrorReport {
  std::string camera_id;
  ErrorSummary stats;
  Histogram histogram;

  friend bool operator==(const CameraErrorReport&, const CameraErrorReport&) = default;
};

struct ErrorReport {
  std::string subject;
  ErrorSummary overall;
  std::vector<CameraErrorReport> cameras;

  friend bool operator==(const ErrorReport&, const ErrorReport&) = default;
};

struct ErrorReportOptions {
  double confidence_floor = 0.5;
  double bin_width = 0.5;
};

// Reprojects every triangulated joint into every camera that detected it and
// aggregates the pixel distances per camera.
ErrorReport error_report(const CaptureSession& session, const CameraSet& cameras,
                         const SkeletonTrack3D& track, const ErrorReportOptions& opts = {});

// Tabular form of the histograms: one row per (camera, bin).
std::string histogram_table_csv(const ErrorReport& report);

}  // namespace gaitanno
