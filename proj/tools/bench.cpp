// Times the OpenMP kernels against their serial reference twins on one
// generated scene, plus the two energy maximizers on a long accumulator.
// Wall-clock only; not part of the test suite.

#include <chrono>
#include <cstdio>
#include <string>

#include "cwmap/eval.hpp"
#include "cwmap/featuremaps.hpp"
#include "cwmap/inference.hpp"
#include "cwmap/reference.hpp"
#include "cwmap/scene.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

using namespace cwmap;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

template <typename Fn>
double time_ms(int repeat, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < repeat; ++r) {
    double t0 = now_ms();
    fn();
    best = std::min(best, now_ms() - t0);
  }
  return best;
}

void row(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-22s %10.2f ms %10.2f ms %8.2fx\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
  int repeat = argc > 1 ? std::stoi(argv[1]) : 3;

  GeneratorConfig gcfg;
  gcfg.seed = 11;
  Scene scene = generate_scene(gcfg, 0);
  const GridSpec& g = scene.grid;
  std::printf("scene: %dx%d px, %zu roads, %zu crosswalks\n", g.width_px, g.height_px,
              scene.roads.size(), scene.crosswalks.size());
#if defined(_OPENMP)
  std::printf("threads: %d\n\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (no OpenMP)\n\n");
#endif
  std::printf("%-22s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  {
    double ser = time_ms(repeat, [&] {
      for (const CrosswalkGT& gt : scene.crosswalks) reference::rasterize_polygon(gt.polygon, g);
    });
    double par = time_ms(repeat, [&] {
      Grid mask(g);
      for (const CrosswalkGT& gt : scene.crosswalks) rasterize_polygon_into(gt.polygon, mask);
    });
    row("rasterize", ser, par);
  }
  {
    double ser = time_ms(repeat, [&] { reference::render_dt(scene); });
    double par = time_ms(repeat, [&] { render_oracle(scene); });
    row("oracle render", ser, par);
  }

  FeatureMaps maps = render_oracle(scene);
  {
    CorruptionConfig cc;
    cc.blur_sigma = 2.0;
    double ser = time_ms(repeat, [&] { reference::blur2d(maps.dt, cc.blur_sigma); });
    double par = time_ms(repeat, [&] { corrupt(maps, cc); });
    row("blur (dt ch. vs all)", ser, par);
  }
  {
    EnergyConfig ecfg;
    const RoadCenterline& road = scene.roads.front();
    double beta = candidate_angles(road.centerline, std::nullopt, ecfg).front();
    Accumulator1D acc = build_accumulator(maps, road, scene.intersection, beta, ecfg);
    std::printf("\naccumulator: %zu positions\n", acc.positions.size());
    double ser = time_ms(repeat, [&] { reference::maximize_energy_exhaustive(acc, ecfg); });
    double par = time_ms(repeat, [&] { maximize_energy(acc, ecfg); });
    row("energy maximizer", ser, par);
  }
  return 0;
}
