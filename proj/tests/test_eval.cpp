#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "gaitanno/error.hpp"
#include "gaitanno/eval.hpp"
#include "gaitanno/triangulate.hpp"
#include "test_util.hpp"

using namespace gaitanno;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidArgument;
}

// Quantile by linear interpolation between order statistics at q * (n - 1).
double oracle_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

TEST(ReprojectionError, MatchesOneLineOracle) {
  std::mt19937_64 g(91);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Pixel> a, b;
    for (int i = 0; i < 1 + trial * 7; ++i) {
      a.push_back({n(g) + 500, n(g) + 300});
      b.push_back({n(g) + 500, n(g) + 300});
    }
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::hypot(a[i].u - b[i].u, a[i].v - b[i].v);
    const double oracle = s / a.size();
    const ErrorStats e = reprojection_error(a, b);
    EXPECT_NEAR(e.mean, oracle, 1e-12);
    EXPECT_EQ(e.n, a.size());
  }
}

TEST(ReprojectionError, ThreeFourFive) {
  const std::vector<Pixel> p{{3.0, 4.0}}, r{{0.0, 0.0}};
  const ErrorStats e = reprojection_error(p, r);
  EXPECT_EQ(e.mean, 5.0);
  EXPECT_EQ(e.median, 5.0);
  EXPECT_EQ(e.max, 5.0);
  EXPECT_EQ(e.sum, 5.0);
}

TEST(ReprojectionError, RayleighMeanMonteCarlo) {
  std::mt19937_64 g(92);
  const double sigma = 2.0;
  std::normal_distribution<double> n(0.0, sigma);
  std::vector<Pixel> p, r;
  for (int i = 0; i < 100000; ++i) {
    p.push_back({100.0 + n(g), 100.0 + n(g)});
    r.push_back({100.0, 100.0});
  }
  const double expected = sigma * std::sqrt(M_PI / 2.0);
  EXPECT_LT(std::abs(reprojection_error(p, r).mean - expected) / expected, 0.05);
}

TEST(ReprojectionError, Errors) {
  const std::vector<Pixel> one{{0, 0}}, two{{0, 0}, {1, 1}}, none;
  EXPECT_EQ(kind_of([&] { reprojection_error(one, two); }), ErrorKind::LengthMismatch);
  EXPECT_EQ(kind_of([&] { reprojection_error(none, none); }), ErrorKind::EmptyInput);
}

TEST(Summary, QuantilesAgainstOracle) {
  std::mt19937_64 g(93);
  std::exponential_distribution<double> e(0.5);
  for (int n : {1, 2, 3, 10, 101, 1000}) {
    std::vector<double> v(n);
    for (auto& x : v) x = e(g);
    const ErrorSummary s = summarize(v);
    EXPECT_DOUBLE_EQ(s.median, oracle_quantile(v, 0.5));
    EXPECT_DOUBLE_EQ(s.p95, oracle_quantile(v, 0.95));
    EXPECT_EQ(s.max, *std::max_element(v.begin(), v.end()));
    EXPECT_LE(s.median, s.p95);
    EXPECT_LE(s.p95, s.max);
  }
  EXPECT_EQ(summarize({}).n, 0u);
}

TEST(Rect, InflateBoundingAndContains) {
  const Rect r{10, 20, 30, 60};
  const Rect i = r.inflated(0.1);
  EXPECT_DOUBLE_EQ(i.u_max - i.u_min, 22.0);
  EXPECT_DOUBLE_EQ(i.v_max - i.v_min, 44.0);
  EXPECT_DOUBLE_EQ(i.u_min + i.u_max, 40.0);
  EXPECT_TRUE(r.contains({10, 60}));
  EXPECT_FALSE(r.contains({9.999, 30}));
  const std::vector<Pixel> pts{{3, 4}, {-1, 8}, {2, -2}};
  EXPECT_EQ(bounding_rect(pts), (Rect{-1, -2, 3, 8}));
  EXPECT_EQ(kind_of([] { bounding_rect(std::vector<Pixel>{}); }), ErrorKind::EmptyInput);
  EXPECT_FALSE((Rect{1, 1, 1, 2}).valid());
}

TEST(Containment, CountsPerFrameAndSubject) {
  const std::vector<FrameKeypoints> kp{
      {"long", 0, {{1, 1}, {5, 5}, {20, 20}}},
      {"long", 1, {{1, 1}, {2, 2}}},
      {"cam0", 0, {{100, 100}}},
  };
  const std::vector<BoxLabel> labels{
      {"long", 0, {0, 0, 10, 10}, "a"},
      {"long", 1, {0, 0, 1.5, 1.5}, "b"},
  };
  const ContainmentResult r = bbox_containment(kp, labels);
  EXPECT_EQ(r.overall.inside, 3u);
  EXPECT_EQ(r.overall.total, 5u);
  EXPECT_EQ(r.overall.frames, 2u);
  EXPECT_DOUBLE_EQ(r.percentage, 60.0);
  EXPECT_EQ(r.per_subject.at("a").inside, 2u);
  EXPECT_EQ(r.per_subject.at("b").total, 2u);

  EXPECT_EQ(kind_of([&] { bbox_containment(kp, std::vector<BoxLabel>{}); }), ErrorKind::NoLabels);
  const std::vector<BoxLabel> missing{{"long", 7, {0, 0, 1, 1}, "a"}};
  EXPECT_EQ(kind_of([&] { bbox_containment(kp, missing); }), ErrorKind::NotFound);
}

TEST(DetectionSuccess, TwentyPercentRule) {
  const std::vector<FrameKeypoints> det{
      {"long", 0, {{1, 1}, {50, 50}, {50, 50}, {50, 50}, {50, 50}}},  // 1 of 5 inside: 20%
      {"long", 1, {{50, 50}, {50, 50}, {50, 50}, {50, 50}, {50, 50}, {1, 1}}},  // 1 of 6
      {"long", 2, {}},
  };
  const std::vector<BoxLabel> labels{
      {"long", 0, {0, 0, 10, 10}, "s"},
      {"long", 1, {0, 0, 10, 10}, "s"},
      {"long", 2, {0, 0, 10, 10}, "s"},
      {"long", 3, {0, 0, 10, 10}, "s"},
  };
  EXPECT_DOUBLE_EQ(detection_success(det, labels), 0.25);
  EXPECT_DOUBLE_EQ(detection_success(det, labels, 1.0 / 6.0), 0.5);
  EXPECT_EQ(kind_of([&] { detection_success(det, labels, 0.0); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([&] { detection_success(det, labels, 1.5); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([&] { detection_success(det, std::vector<BoxLabel>{}); }), ErrorKind::NoLabels);
}

TEST(Histogram, Bins) {
  const std::vector<double> v{0.0, 0.49, 0.5, 1.2, 3.0};
  const Histogram h = make_histogram(v, 0.5);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{2, 1, 1, 0, 0, 0, 1}));
  EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}), v.size());
}

TEST(ErrorReport, MatchesDirectComputation) {
  const auto s = testutil::small_scene(2.0, 0.05, 94, 2.0);
  const CameraSet cams = s.rig.truth.camera_set();
  const SkeletonTrack3D track = triangulate_sequence(s.render.session, cams, {});
  const ErrorReport rep = error_report(s.render.session, cams, track);
  ASSERT_EQ(rep.cameras.size(), 3u);
  double total = 0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    const auto& st = s.render.session.streams[c];
    const auto& cm = cams.at(st.camera_id);
    std::vector<Pixel> pred, ref;
    for (const auto& inst : track.instances) {
      const Frame* f = st.find(inst.instance);
      for (std::size_t j = 0; j < inst.joints.size(); ++j) {
        if (!inst.joints[j] || !f->joints[j] || f->joints[j]->confidence < 0.5) continue;
        pred.push_back(project(inst.joints[j]->point, cm.intrinsics, cm.pose));
        ref.push_back(f->joints[j]->pixel());
      }
    }
    const ErrorStats e = reprojection_error(pred, ref);
    EXPECT_NEAR(rep.cameras[c].stats.mean, e.mean, 1e-12);
    EXPECT_EQ(rep.cameras[c].stats.n, pred.size());
    total += e.sum;
    n += e.n;
  }
  EXPECT_NEAR(rep.overall.mean, total / n, 1e-12);
  // Three-view triangulation absorbs part of the noise.
  EXPECT_LT(rep.overall.mean, 2.0 * std::sqrt(M_PI / 2.0));
  const std::string csv = histogram_table_csv(rep);
  EXPECT_EQ(csv.rfind("camera_id,bin_lo_px,bin_hi_px,count\n", 0), 0u);
  EXPECT_NE(csv.find("cam2,0,0.5,"), std::string::npos);
}
