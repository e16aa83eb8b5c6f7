#include "gaitanno/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "gaitanno/error.hpp"

namespace gaitanno {
namespace {

double interpolated_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

using FrameKey = std::pair<std::string, std::int64_t>;

std::map<FrameKey, const FrameKeypoints*> index_frames(std::span<const FrameKeypoints> frames) {
  std::map<FrameKey, const FrameKeypoints*> idx;
  for (const auto& f : frames) idx[{f.camera_id, f.frame_idx}] = &f;
  return idx;
}

}  // namespace

ErrorSummary summarize(std::vector<double> distances) {
  ErrorSummary s;
  s.n = distances.size();
  if (distances.empty()) return s;
  for (double d : distances) s.sum += d;
  s.mean = s.sum / static_cast<double>(s.n);
  std::sort(distances.begin(), distances.end());
  s.median = interpolated_quantile(distances, 0.5);
  s.p95 = interpolated_quantile(distances, 0.95);
  s.max = distances.back();
  return s;
}

ErrorStats reprojection_error(std::span<const Pixel> predicted, std::span<const Pixel> reference) {
  if (predicted.size() != reference.size()) {
    fail(ErrorKind::LengthMismatch, std::to_string(predicted.size()) + " predictions vs " +
                                        std::to_string(reference.size()) + " references");
  }
  if (predicted.empty()) fail(ErrorKind::EmptyInput, "no keypoint pairs");
  std::vector<double> d(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    d[i] = (predicted[i].vec() - reference[i].vec()).norm();
  }
  ErrorStats stats;
  static_cast<ErrorSummary&>(stats) = summarize(std::move(d));
  return stats;
}

Rect Rect::inflated(double fraction) const {
  const double du = 0.5 * fraction * (u_max - u_min);
  const double dv = 0.5 * fraction * (v_max - v_min);
  return {u_min - du, v_min - dv, u_max + du, v_max + dv};
}

Rect bounding_rect(std::span<const Pixel> points) {
  if (points.empty()) fail(ErrorKind::EmptyInput, "bounding_rect of no points");
  Rect r{points[0].u, points[0].v, points[0].u, points[0].v};
  for (const auto& p : points) {
    r.u_min = std::min(r.u_min, p.u);
    r.v_min = std::min(r.v_min, p.v);
    r.u_max = std::max(r.u_max, p.u);
    r.v_max = std::max(r.v_max, p.v);
  }
  return r;
}

ContainmentResult bbox_containment(std::span<const FrameKeypoints> keypoints,
                                   std::span<const BoxLabel> labels) {
  if (labels.empty()) fail(ErrorKind::NoLabels, "no bounding-box labels");
  const auto idx = index_frames(keypoints);
  ContainmentResult out;
  for (const BoxLabel& label : labels) {
    const auto it = idx.find({label.camera_id, label.frame_idx});
    if (it == idx.end()) {
      fail(ErrorKind::NotFound, "label references camera '" + label.camera_id + "' frame " +
                                    std::to_string(label.frame_idx) + " with no keypoints");
    }
    ContainmentCount& subj = out.per_subject[label.subject];
    ++subj.frames;
    ++out.overall.frames;
    for (const Pixel& p : it->second->points) {
      const bool in = label.rect.contains(p);
      subj.inside += in;
      subj.total += 1;
      out.overall.inside += in;
      out.overall.total += 1;
    }
  }
  out.percentage = out.overall.percentage();
  return out;
}

double detection_success(std::span<const FrameKeypoints> detections, std::span<const BoxLabel> labels,
                         double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    fail(ErrorKind::InvalidArgument, "threshold must lie in (0, 1]");
  }
  if (labels.empty()) fail(ErrorKind::NoLabels, "no bounding-box labels");
  const auto idx = index_frames(detections);
  std::size_t successes = 0;
  for (const BoxLabel& label : labels) {
    const auto it = idx.find({label.camera_id, label.frame_idx});
    if (it == idx.end() || it->second->points.empty()) continue;
    const auto& pts = it->second->points;
    const auto inside = static_cast<std::size_t>(
        std::count_if(pts.begin(), pts.end(), [&](const Pixel& p) { return label.rect.contains(p); }));
    if (static_cast<double>(inside) >= threshold * static_cast<double>(pts.size())) ++successes;
  }
  return static_cast<double>(successes) / static_cast<double>(labels.size());
}

Histogram make_histogram(std::span<const double> values, double bin_width) {
  Histogram h;
  h.bin_width = bin_width;
  for (double v : values) {
    const auto bin = static_cast<std::size_t>(std::floor(std::max(v, 0.0) / bin_width));
    if (bin >= h.counts.size()) h.counts.resize(bin + 1, 0);
    ++h.counts[bin];
  }
  return h;
}

ErrorReport error_report(const CaptureSession& session, const CameraSet& cameras,
                         const SkeletonTrack3D& track, const ErrorReportOptions& opts) {
  ErrorReport report;
  report.subject = session.subject;
  std::vector<double> all;
  for (std::size_t c = 0; c < session.cameras.size(); ++c) {
    const std::string& id = session.cameras[c].id;
    const auto cam = cameras.find(id);
    if (cam == cameras.end()) fail(ErrorKind::NotFound, "no calibration for camera '" + id + "'");
    const DetectionStream& stream = session.streams[c];
    const int off = session.offset(id);
    std::vector<double> dists;
    for (const TrackInstance& inst : track.instances) {
      const Frame* frame = stream.find(inst.instance + off);
      if (frame == nullptr) continue;
      for (std::size_t j = 0; j < inst.joints.size() && j < frame->joints.size(); ++j) {
        const auto& est = inst.joints[j];
        const auto& det = frame->joints[j];
        if (!est || !det || det->confidence < opts.confidence_floor) continue;
        const Pixel p = project(est->point, cam->second.intrinsics, cam->second.pose);
        dists.push_back((det->pixel().vec() - p.vec()).norm());
      }
    }
    all.insert(all.end(), dists.begin(), dists.end());
    CameraErrorReport cr;
    cr.camera_id = id;
    cr.histogram = make_histogram(dists, opts.bin_width);
    cr.stats = summarize(std::move(dists));
    report.cameras.push_back(std::move(cr));
  }
  report.overall = summarize(std::move(all));
  return report;
}

std::string histogram_table_csv(const ErrorReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "camera_id,bin_lo_px,bin_hi_px,count\n";
  for (const auto& cam : report.cameras) {
    for (std::size_t i = 0; i < cam.histogram.counts.size(); ++i) {
      os << cam.camera_id << ',' << static_cast<double>(i) * cam.histogram.bin_width << ','
         << static_cast<double>(i + 1) * cam.histogram.bin_width << ',' << cam.histogram.counts[i]
         << '\n';
    }
  }
  return os.str();
}

}  // namespace gaitanno
