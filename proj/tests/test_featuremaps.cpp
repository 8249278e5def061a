#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cwmap/featuremaps.hpp"
#include "cwmap/reference.hpp"
#include "cwmap/rng.hpp"
#include "cwmap/scene.hpp"

using namespace cwmap;

namespace {

template <typename Fn>
bool throws_code(Err want, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == want;
  } catch (...) {
    return false;
  }
  return false;
}

// Single straight road along +x with one crosswalk, on a grid small enough
// for the brute-force distance reference.
Scene tiny_scene(double beta_off = 0.1) {
  Scene s;
  RoadCenterline road;
  road.id = "road_0";
  road.width = 3.0;
  road.centerline.v = {{0, 0}, {8, 0}};
  s.roads.push_back(road);

  CrosswalkGT gt;
  gt.road_id = "road_0";
  gt.s1 = 3.0;
  gt.s2 = 6.0;
  gt.beta = fold_angle(kPi / 2 + beta_off);
  gt.polygon = crosswalk_polygon(road.centerline, gt.s1, gt.s2, gt.beta, road.width / 2);
  s.crosswalks.push_back(gt);

  s.intersection.v = {{-1, -1}, {1, -1}, {0, 1}};
  s.grid.origin = {2.0, -2.4};
  s.grid.resolution = 0.04;
  s.grid.width_px = 125;
  s.grid.height_px = 120;
  return s;
}

FeatureMaps ones_maps(const GridSpec& g) {
  FeatureMaps m{Grid(g, 1.0f), Grid(g, 1.0f), Grid(g, 1.0f), Grid(g, 1.0f), Grid(g, 1.0f)};
  return m;
}

float max_abs_diff(const Grid& a, const Grid& b) {
  REQUIRE(a.values.size() == b.values.size());
  float m = 0.0f;
  for (size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

bool maps_equal(const FeatureMaps& a, const FeatureMaps& b) {
  return a.seg.values == b.seg.values && a.dt.values == b.dt.values &&
         a.angle_x.values == b.angle_x.values && a.angle_y.values == b.angle_y.values &&
         a.angle_mask.values == b.angle_mask.values;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(bool(f));
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("oracle seg is the union of the crosswalk masks") {
  GeneratorConfig cfg;
  cfg.seed = 13;
  for (uint64_t i = 0; i < 5; ++i) {
    Scene s = generate_scene(cfg, i);
    FeatureMaps maps = render_oracle(s);
    Grid expect(s.grid);
    for (const auto& gt : s.crosswalks) rasterize_polygon_into(gt.polygon, expect);
    REQUIRE(maps.seg.values == expect.values);
    for (float v : maps.seg.values) CHECK((v == 0.0f || v == 1.0f));
  }
}

TEST_CASE("oracle dt matches the brute-force distance reference") {
  for (double off : {0.0, 0.1, -0.25}) {
    Scene s = tiny_scene(off);
    FeatureMaps maps = render_oracle(s);
    Grid ref = reference::render_dt(s);
    CHECK(max_abs_diff(maps.dt, ref) < 1e-3f);
  }
}

TEST_CASE("oracle dt peaks at the threshold on the boundary and stays in range") {
  Scene s = tiny_scene();
  FeatureMaps maps = render_oracle(s);
  float peak = 0.0f;
  for (float v : maps.dt.values) {
    CHECK(v >= 0.0f);
    CHECK(v <= float(kDtThresholdPx));
    peak = std::max(peak, v);
  }
  // Some pixel center lies within one pixel of a boundary edge.
  CHECK(peak > float(kDtThresholdPx) - 1.0f);
}

TEST_CASE("oracle angle channels hold the folded boundary direction near the edges") {
  Scene s = tiny_scene(0.1);
  double beta = s.crosswalks[0].beta;
  FeatureMaps maps = render_oracle(s);
  const GridSpec& g = s.grid;
  int masked = 0;
  for (int r = 0; r < g.height_px; ++r)
    for (int c = 0; c < g.width_px; ++c) {
      float m = maps.angle_mask.at(r, c);
      CHECK((m == 0.0f || m == 1.0f));
      if (m == 1.0f) {
        ++masked;
        CHECK(maps.angle_x.at(r, c) == doctest::Approx(std::cos(beta)).epsilon(1e-6));
        CHECK(maps.angle_y.at(r, c) == doctest::Approx(std::sin(beta)).epsilon(1e-6));
        CHECK(maps.dt.at(r, c) >= float(kDtThresholdPx - kAngleDilationPx / 2.0 - 1e-3));
      } else {
        CHECK(maps.angle_x.at(r, c) == 0.0f);
        CHECK(maps.angle_y.at(r, c) == 0.0f);
      }
    }
  // Two edges of length 3 m dilated by 15 px on a 0.04 m grid.
  CHECK(masked > 2000);
}

TEST_CASE("corrupt with the all-zero config is the identity") {
  Scene s = tiny_scene();
  FeatureMaps maps = render_oracle(s);
  FeatureMaps out = corrupt(maps, CorruptionConfig{});
  CHECK(maps_equal(out, maps));
}

TEST_CASE("corruption blur matches the direct 2D convolution") {
  GridSpec g;
  g.origin = {0, 0};
  g.resolution = 0.04;
  g.width_px = 64;
  g.height_px = 48;
  Rng rng(99);
  FeatureMaps maps{Grid(g), Grid(g), Grid(g), Grid(g), Grid(g)};
  for (auto& v : maps.seg.values) v = float(rng.uniform01());
  for (auto& v : maps.dt.values) v = float(rng.uniform(0.0, kDtThresholdPx));

  for (double sigma : {0.6, 2.0}) {
    CorruptionConfig cfg;
    cfg.blur_sigma = sigma;
    FeatureMaps out = corrupt(maps, cfg);
    CHECK(max_abs_diff(out.seg, reference::blur2d(maps.seg, sigma)) < 1e-5f);
    CHECK(max_abs_diff(out.dt, reference::blur2d(maps.dt, sigma)) < 3e-4f);
    // Angle channels pass through untouched.
    CHECK(out.angle_x.values == maps.angle_x.values);
    CHECK(out.angle_mask.values == maps.angle_mask.values);
  }
}

TEST_CASE("erosion shrinks a square block by the disk radius") {
  GridSpec g;
  g.origin = {0, 0};
  g.resolution = 0.04;
  g.width_px = 40;
  g.height_px = 40;
  FeatureMaps maps{Grid(g), Grid(g), Grid(g), Grid(g), Grid(g)};
  for (int r = 10; r < 30; ++r)
    for (int c = 10; c < 30; ++c) maps.seg.at(r, c) = 1.0f;

  CorruptionConfig cfg;
  cfg.erosion_px = 2.0;
  FeatureMaps out = corrupt(maps, cfg);
  int n = 0;
  for (float v : out.seg.values) n += v == 1.0f;
  CHECK(n == 16 * 16);
  // Survivors form the centered 16x16 block.
  for (int r = 12; r < 28; ++r)
    for (int c = 12; c < 28; ++c) REQUIRE(out.seg.at(r, c) == 1.0f);
  CHECK(out.dt.values == maps.dt.values);
}

TEST_CASE("noise is clamped to the channel range and leaves angles untouched") {
  Scene s = tiny_scene();
  FeatureMaps maps = render_oracle(s);
  CorruptionConfig cfg;
  cfg.noise_sigma = 0.5;
  cfg.seed = 12;
  FeatureMaps out = corrupt(maps, cfg);
  for (float v : out.seg.values) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
  for (float v : out.dt.values) {
    CHECK(v >= 0.0f);
    CHECK(v <= float(kDtThresholdPx));
  }
  CHECK(out.angle_x.values == maps.angle_x.values);
  CHECK(out.angle_y.values == maps.angle_y.values);
  CHECK(out.angle_mask.values == maps.angle_mask.values);
  CHECK(out.seg.values != maps.seg.values);

  FeatureMaps again = corrupt(maps, cfg);
  CHECK(maps_equal(again, out));
}

TEST_CASE("holes zero all five channels and meet the coverage target") {
  GridSpec g;
  g.origin = {0, 0};
  g.resolution = 0.04;
  g.width_px = 200;
  g.height_px = 150;
  FeatureMaps maps = ones_maps(g);

  CorruptionConfig cfg;
  cfg.hole_rate = 0.3;
  cfg.seed = 5;
  FeatureMaps out = corrupt(maps, cfg);
  size_t zeros = 0;
  for (size_t i = 0; i < out.seg.values.size(); ++i) {
    bool z = out.seg.values[i] == 0.0f;
    REQUIRE(z == (out.dt.values[i] == 0.0f));
    REQUIRE(z == (out.angle_x.values[i] == 0.0f));
    REQUIRE(z == (out.angle_y.values[i] == 0.0f));
    REQUIRE(z == (out.angle_mask.values[i] == 0.0f));
    zeros += z;
  }
  size_t total = out.seg.values.size();
  CHECK(zeros >= size_t(std::ceil(0.3 * double(total))));
  CHECK(zeros < total);

  cfg.hole_rate = 1.0;
  FeatureMaps wiped = corrupt(maps, cfg);
  for (float v : wiped.seg.values) REQUIRE(v == 0.0f);
  for (float v : wiped.angle_mask.values) REQUIRE(v == 0.0f);
}

TEST_CASE("angle jitter keeps unit vectors on masked pixels only") {
  Scene s = tiny_scene();
  FeatureMaps maps = render_oracle(s);
  CorruptionConfig cfg;
  cfg.angle_jitter_deg = 10.0;
  cfg.seed = 3;
  FeatureMaps out = corrupt(maps, cfg);
  CHECK(out.seg.values == maps.seg.values);
  CHECK(out.dt.values == maps.dt.values);
  CHECK(out.angle_mask.values == maps.angle_mask.values);

  int changed = 0;
  for (size_t i = 0; i < out.angle_x.values.size(); ++i) {
    if (maps.angle_mask.values[i] == 0.0f) {
      REQUIRE(out.angle_x.values[i] == maps.angle_x.values[i]);
      REQUIRE(out.angle_y.values[i] == maps.angle_y.values[i]);
      continue;
    }
    double n = double(out.angle_x.values[i]) * out.angle_x.values[i] +
               double(out.angle_y.values[i]) * out.angle_y.values[i];
    REQUIRE(n == doctest::Approx(1.0).epsilon(1e-5));
    changed += out.angle_x.values[i] != maps.angle_x.values[i];
  }
  CHECK(changed > 100);
}

TEST_CASE("corruption is bit-identical across thread counts") {
  Scene s = tiny_scene();
  FeatureMaps maps = render_oracle(s);
  CorruptionConfig cfg;
  cfg.blur_sigma = 2.0;
  cfg.noise_sigma = 0.05;
  cfg.hole_rate = 0.15;
  cfg.erosion_px = 2.0;
  cfg.angle_jitter_deg = 10.0;
  cfg.seed = 7;

  int max_threads = omp_get_max_threads();
  omp_set_num_threads(1);
  FeatureMaps serial = corrupt(maps, cfg);
  FeatureMaps oracle1 = render_oracle(s);
  omp_set_num_threads(max_threads);
  FeatureMaps parallel = corrupt(maps, cfg);
  FeatureMaps oracle2 = render_oracle(s);

  CHECK(maps_equal(serial, parallel));
  CHECK(maps_equal(oracle1, oracle2));
}

TEST_CASE("grid container round trips bit-exactly") {
  Scene s = tiny_scene();
  FeatureMaps maps = render_oracle(s);
  std::string path = "test_maps_roundtrip.grid";
  write_grids(path, maps);

  int w = 0, h = 0, c = 0;
  read_grid_header(path, w, h, c);
  CHECK(w == s.grid.width_px);
  CHECK(h == s.grid.height_px);
  CHECK(c == 5);

  FeatureMaps back = read_grids(path, s.grid);
  CHECK(maps_equal(back, maps));
  CHECK(back.spec() == s.grid);
  std::remove(path.c_str());
}

TEST_CASE("grid container rejects damaged files") {
  Scene s = tiny_scene();
  FeatureMaps maps = render_oracle(s);
  std::string path = "test_maps_damage.grid";
  write_grids(path, maps);
  std::string good = read_file(path);

  auto rewrite = [&](const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), std::streamsize(bytes.size()));
  };

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  rewrite(bad_magic);
  CHECK(throws_code(Err::BadMagic, [&] { read_grids(path, s.grid); }));

  std::string truncated = good.substr(0, good.size() - 12);
  rewrite(truncated);
  CHECK(throws_code(Err::TruncatedFile, [&] { read_grids(path, s.grid); }));

  std::string flipped = good;
  flipped[good.size() / 2] = char(flipped[good.size() / 2] ^ 0x40);
  rewrite(flipped);
  CHECK(throws_code(Err::ChecksumMismatch, [&] { read_grids(path, s.grid); }));

  rewrite(good);
  GridSpec wrong = s.grid;
  wrong.width_px += 1;
  CHECK(throws_code(Err::GridMismatch, [&] { read_grids(path, wrong); }));
  CHECK(throws_code(Err::IoError, [&] { read_grids("no_such_file.grid", s.grid); }));
  std::remove(path.c_str());
}

TEST_CASE("crc64 matches the published check value") {
  const char* check = "123456789";
  CHECK(crc64_ecma(reinterpret_cast<const uint8_t*>(check), 9) == 0x6C40DF5F0B497347ull);
  CHECK(crc64_ecma(nullptr, 0) == 0ull);
}

TEST_CASE("pgm export rounds half up and clamps to byte range") {
  GridSpec g;
  g.origin = {0, 0};
  g.resolution = 0.04;
  g.width_px = 3;
  g.height_px = 2;
  Grid grid(g);
  grid.at(0, 0) = 0.0f;
  grid.at(0, 1) = 15.0f;   // 127.5 -> 128
  grid.at(0, 2) = 30.0f;   // 255
  grid.at(1, 0) = 31.0f;   // clamps to 255
  grid.at(1, 1) = -1.0f;   // clamps to 0
  grid.at(1, 2) = 14.0f;  // 119.0 -> 119

  std::string path = "test_export.pgm";
  export_pgm(grid, path, 30.0);
  std::string bytes = read_file(path);
  std::string header = "P5\n3 2\n255\n";
  REQUIRE(bytes.size() == header.size() + 6);
  CHECK(bytes.substr(0, header.size()) == header);
  const unsigned char* px = reinterpret_cast<const unsigned char*>(bytes.data() + header.size());
  CHECK(px[0] == 0);
  CHECK(px[1] == 128);
  CHECK(px[2] == 255);
  CHECK(px[3] == 255);
  CHECK(px[4] == 0);
  CHECK(px[5] == 119);
  std::remove(path.c_str());

  CHECK(throws_code(Err::InvalidInterval, [&] { export_pgm(grid, path, 0.0); }));
}
