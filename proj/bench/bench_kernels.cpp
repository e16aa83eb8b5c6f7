// Serial reference vs OpenMP kernels on a 400-instance synthetic session.

#include <benchmark/benchmark.h>

#include "gaitanno/kernels.hpp"
#include "gaitanno/synth.hpp"
#include "gaitanno/triangulate.hpp"

using namespace gaitanno;
using namespace gaitanno::kernels;

namespace {

struct Scene {
  CaptureSession session;
  Rig rig;
  std::vector<SyncInstance> instances;
  CameraSet cameras;
  BAProblem problem;
  BALayout layout;
  std::vector<CameraPose> cams;
  std::vector<Point3> pts;
  BALinearization lin;
  ContainmentGridProblem grid;
};

const Scene& scene() {
  static const Scene s = [] {
    Scene x;
    WalkerSpec w;
    w.duration_s = 400.0 / 30.0;
    const SkeletonTrack3D truth = gen_walker(w, 1);
    RigSpec rs;
    rs.position_sigma = 0.05;
    rs.rotation_sigma = 0.01;
    const SynthRig rig = gen_rig(rs);
    std::vector<RigCamera> close;
    for (const auto& c : rig.truth.cameras) {
      if (c.role == "close") close.push_back(c);
    }
    RenderOptions ro;
    ro.noise_sigma = 2.0;
    ro.dropout = 0.05;
    x.session = render_detections(truth, close, ro).session;
    x.rig = rig.initial;
    x.cameras = x.rig.camera_set();
    x.instances = align_frames(x.session, x.session.offsets);
    const SkeletonTrack3D track = triangulate_sequence(x.session, x.cameras, x.session.offsets);
    x.problem = build_problem(x.session, x.rig, track);
    x.layout = make_layout(x.problem, true);
    for (const auto& c : x.problem.cameras) x.cams.push_back(c.pose);
    for (const auto& p : x.problem.points) x.pts.push_back(p.position);
    x.lin = ba_linearize_serial(x.problem, x.layout, x.cams, x.pts, std::nullopt);

    const RigCamera* lc = rig.truth.long_camera();
    x.grid.intrinsics = lc->intrinsics;
    x.grid.base = *rig.initial.longrange;
    for (int i = -10; i <= 10; ++i) {
      for (int j = -10; j <= 10; ++j) {
        for (int k = -4; k <= 4; ++k) x.grid.deltas.emplace_back(0.002 * i, 0.002 * j, 0.25 * k);
      }
    }
    const auto labels = gen_box_labels(truth, *lc);
    for (std::size_t b = 0; b < labels.size(); ++b) {
      x.grid.rects.push_back(labels[b].rect);
      for (const auto& j : truth.find(labels[b].frame_idx)->joints) {
        if (!j) continue;
        x.grid.points.push_back(j->point);
        x.grid.rect_index.push_back(static_cast<std::uint32_t>(b));
      }
    }
    return x;
  }();
  return s;
}

void BM_TriangulateSerial(benchmark::State& st) {
  const Scene& s = scene();
  for (auto _ : st) benchmark::DoNotOptimize(triangulate_instances_serial(s.session, s.instances, s.cameras, {}));
}
void BM_TriangulateOmp(benchmark::State& st) {
  const Scene& s = scene();
  for (auto _ : st) benchmark::DoNotOptimize(triangulate_instances_omp(s.session, s.instances, s.cameras, {}));
}

void BM_LinearizeSerial(benchmark::State& st) {
  const Scene& s = scene();
  for (auto _ : st) benchmark::DoNotOptimize(ba_linearize_serial(s.problem, s.layout, s.cams, s.pts, std::nullopt));
}
void BM_LinearizeOmp(benchmark::State& st) {
  const Scene& s = scene();
  for (auto _ : st) benchmark::DoNotOptimize(ba_linearize_omp(s.problem, s.layout, s.cams, s.pts, std::nullopt));
}

void BM_SchurSerial(benchmark::State& st) {
  const Scene& s = scene();
  for (auto _ : st) benchmark::DoNotOptimize(schur_reduce_serial(s.layout, s.lin, 1e-3));
}
void BM_SchurOmp(benchmark::State& st) {
  const Scene& s = scene();
  for (auto _ : st) benchmark::DoNotOptimize(schur_reduce_omp(s.layout, s.lin, 1e-3));
}

void BM_CostSerial(benchmark::State& st) {
  const Scene& s = scene();
  for (auto _ : st) benchmark::DoNotOptimize(ba_cost_serial(s.problem, s.cams, s.pts, std::nullopt));
}
void BM_CostOmp(benchmark::State& st) {
  const Scene& s = scene();
  for (auto _ : st) benchmark::DoNotOptimize(ba_cost_omp(s.problem, s.cams, s.pts, std::nullopt));
}

void BM_ContainmentGridSerial(benchmark::State& st) {
  const Scene& s = scene();
  for (auto _ : st) benchmark::DoNotOptimize(containment_grid_serial(s.grid));
}
void BM_ContainmentGridOmp(benchmark::State& st) {
  const Scene& s = scene();
  for (auto _ : st) benchmark::DoNotOptimize(containment_grid_omp(s.grid));
}

}  // namespace

BENCHMARK(BM_TriangulateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TriangulateOmp)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_LinearizeSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LinearizeOmp)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SchurSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SchurOmp)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CostSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CostOmp)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ContainmentGridSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ContainmentGridOmp)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
