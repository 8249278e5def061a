#include "cwmap/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cwmap/rng.hpp"
#include "text_format.hpp"

namespace cwmap {

namespace {

constexpr int kMaxAttempts = 100;
constexpr double kMinSeparationDeg = 25.0;  // between adjacent road directions
constexpr double kGridMarginM = 2.0;        // beyond hull and crosswalks

double deg2rad(double d) { return d * kPi / 180.0; }

// Minimum circular separation over all direction pairs.
double min_separation(const std::vector<double>& angles) {
  double best = 2.0 * kPi;
  for (size_t i = 0; i < angles.size(); ++i)
    for (size_t j = i + 1; j < angles.size(); ++j) {
      double d = std::fmod(std::abs(angles[i] - angles[j]), 2.0 * kPi);
      d = std::min(d, 2.0 * kPi - d);
      best = std::min(best, d);
    }
  return best;
}

struct Draw {
  bool has = false;
  double offset = 0.0;
  double width = 0.0;
  double jitter = 0.0;
};

}  // namespace

Scene generate_scene(const GeneratorConfig& cfg, uint64_t index) {
  if (cfg.n_roads.lo < 3 || cfg.n_roads.hi < cfg.n_roads.lo ||
      cfg.road_width.lo <= 0 || cfg.road_width.hi < cfg.road_width.lo ||
      cfg.crosswalk_width.lo <= 0 || cfg.crosswalk_width.hi < cfg.crosswalk_width.lo ||
      cfg.crosswalk_offset.lo < 0 || cfg.crosswalk_offset.hi < cfg.crosswalk_offset.lo ||
      cfg.angle_jitter_deg < 0 || cfg.p_no_crosswalk < 0 || cfg.p_no_crosswalk > 1)
    fail(Err::InvalidInterval, "generator config out of range");

  Rng rng(derive_stream(cfg.seed, index));

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    int k = rng.uniform_int(cfg.n_roads.lo, cfg.n_roads.hi);
    double gap_deg = 360.0 / k;
    double jit_deg = std::min(10.0, std::max(0.0, (gap_deg - kMinSeparationDeg - 3.0) / 2.0));
    double base = rng.uniform(0.0, 2.0 * kPi);

    std::vector<double> angles(k);
    for (int i = 0; i < k; ++i)
      angles[i] = base + 2.0 * kPi * i / k + deg2rad(rng.uniform(-jit_deg, jit_deg));
    std::vector<double> widths(k);
    double w_max = 0.0;
    for (int i = 0; i < k; ++i) {
      widths[i] = rng.uniform(cfg.road_width.lo, cfg.road_width.hi);
      w_max = std::max(w_max, widths[i]);
    }
    std::vector<Draw> draws(k);
    for (int i = 0; i < k; ++i) {
      draws[i].has = !rng.bernoulli(cfg.p_no_crosswalk);
      if (draws[i].has) {
        draws[i].offset = rng.uniform(cfg.crosswalk_offset.lo, cfg.crosswalk_offset.hi);
        draws[i].width = rng.uniform(cfg.crosswalk_width.lo, cfg.crosswalk_width.hi);
        draws[i].jitter = deg2rad(rng.uniform(-cfg.angle_jitter_deg, cfg.angle_jitter_deg));
      }
    }

    if (min_separation(angles) < deg2rad(kMinSeparationDeg) - 1e-9) continue;

    // Entry stubs at radius R, inflated laterally by half the road width;
    // the intersection is their convex hull.
    double entry_r = std::max(4.0, 1.3 * w_max);
    std::vector<Point2> corners;
    for (int i = 0; i < k; ++i) {
      Point2 u{std::cos(angles[i]), std::sin(angles[i])};
      Point2 n{-u.y, u.x};
      Point2 e = entry_r * u;
      corners.push_back(e + (widths[i] / 2.0) * n);
      corners.push_back(e - (widths[i] / 2.0) * n);
    }
    Polygon hull;
    try {
      hull = convex_hull(corners);
    } catch (const Error&) {
      continue;
    }
    if (!point_in_polygon(Point2{0, 0}, hull)) continue;

    double tail = cfg.crosswalk_offset.hi + cfg.crosswalk_width.hi + 4.0;
    Scene scene;
    scene.roads.resize(k);
    bool ok = true;
    for (int i = 0; i < k && ok; ++i) {
      RoadCenterline& road = scene.roads[i];
      road.id = "road_" + std::to_string(i);
      road.width = widths[i];
      Point2 u{std::cos(angles[i]), std::sin(angles[i])};
      road.centerline.v = {Point2{0, 0}, (entry_r + tail) * u};

      if (!draws[i].has) continue;
      auto s_exit = polyline_exit_arclength(road.centerline, hull);
      if (!s_exit) { ok = false; break; }
      CrosswalkGT gt;
      gt.road_id = road.id;
      gt.s1 = *s_exit + draws[i].offset;
      gt.s2 = gt.s1 + draws[i].width;
      gt.beta = fold_angle(angles[i] + kPi / 2.0 + draws[i].jitter);
      if (gt.s2 > polyline_length(road.centerline) - 0.5) { ok = false; break; }
      gt.polygon = crosswalk_polygon(road.centerline, gt.s1, gt.s2, gt.beta, road.width / 2.0);
      scene.crosswalks.push_back(std::move(gt));
    }
    if (!ok) continue;

    // Crosswalks must not touch each other or reach back into the hull.
    for (size_t a = 0; a < scene.crosswalks.size() && ok; ++a) {
      if (convex_polygons_overlap(scene.crosswalks[a].polygon, hull)) ok = false;
      for (size_t b = a + 1; b < scene.crosswalks.size() && ok; ++b)
        if (convex_polygons_overlap(scene.crosswalks[a].polygon, scene.crosswalks[b].polygon))
          ok = false;
    }
    if (!ok) continue;

    Point2 lo, hi;
    std::tie(lo, hi) = polygon_bbox(hull);
    for (const CrosswalkGT& gt : scene.crosswalks) {
      auto [plo, phi] = polygon_bbox(gt.polygon);
      lo.x = std::min(lo.x, plo.x);
      lo.y = std::min(lo.y, plo.y);
      hi.x = std::max(hi.x, phi.x);
      hi.y = std::max(hi.y, phi.y);
    }
    GridSpec g;
    g.resolution = 0.04;
    g.origin = {lo.x - kGridMarginM, lo.y - kGridMarginM};
    g.width_px = int(std::ceil((hi.x + kGridMarginM - g.origin.x) / g.resolution)) + 1;
    g.height_px = int(std::ceil((hi.y + kGridMarginM - g.origin.y) / g.resolution)) + 1;
    scene.grid = g;
    scene.intersection = std::move(hull);
    return scene;
  }
  fail(Err::GenerationFailed, "no valid layout in " + std::to_string(kMaxAttempts) +
                                  " attempts for scene " + std::to_string(index));
}

////////////////////////////////////////////////////////////////////////////////
// Text format

namespace {

void append_points(std::string& o, const std::vector<Point2>& pts) {
  o += "[";
  for (size_t i = 0; i < pts.size(); ++i) {
    if (i) o += ", ";
    o += "[" + textio::fmt_double(pts[i].x) + ", " + textio::fmt_double(pts[i].y) + "]";
  }
  o += "]";
}

std::vector<Point2> parse_points(const nlohmann::json& j, const std::string& context) {
  if (!j.is_array()) fail(Err::ParseError, context + ": expected an array of points");
  std::vector<Point2> pts;
  pts.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      fail(Err::ParseError, context + ": point must be [x, y]");
    pts.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  return pts;
}

}  // namespace

std::string scene_to_json(const Scene& scene) {
  std::string o;
  o += "{\n";
  o += "  \"version\": 1,\n";
  const GridSpec& g = scene.grid;
  o += "  \"grid\": {\"origin_x\": " + textio::fmt_double(g.origin.x) +
       ", \"origin_y\": " + textio::fmt_double(g.origin.y) +
       ", \"resolution\": " + textio::fmt_double(g.resolution) +
       ", \"width_px\": " + std::to_string(g.width_px) +
       ", \"height_px\": " + std::to_string(g.height_px) + "},\n";
  o += "  \"intersection\": ";
  append_points(o, scene.intersection.v);
  o += ",\n  \"roads\": [";
  for (size_t i = 0; i < scene.roads.size(); ++i) {
    const RoadCenterline& r = scene.roads[i];
    o += i ? ",\n    " : "\n    ";
    o += "{\"id\": \"" + r.id + "\", \"width\": " + textio::fmt_double(r.width) +
         ", \"centerline\": ";
    append_points(o, r.centerline.v);
    o += "}";
  }
  o += scene.roads.empty() ? "],\n" : "\n  ],\n";
  o += "  \"crosswalks\": [";
  for (size_t i = 0; i < scene.crosswalks.size(); ++i) {
    const CrosswalkGT& c = scene.crosswalks[i];
    o += i ? ",\n    " : "\n    ";
    o += "{\"road_id\": \"" + c.road_id + "\", \"s1\": " + textio::fmt_double(c.s1) +
         ", \"s2\": " + textio::fmt_double(c.s2) +
         ", \"beta\": " + textio::fmt_double(c.beta) + ", \"polygon\": ";
    append_points(o, c.polygon.v);
    o += "}";
  }
  o += scene.crosswalks.empty() ? "]\n" : "\n  ]\n";
  o += "}\n";
  return o;
}

Scene scene_from_json(const std::string& text) {
  const std::string ctx = "scene";
  nlohmann::json j = textio::parse(text, ctx);
  double version = textio::num_field(j, "version", ctx);
  if (version != 1.0)
    fail(Err::SchemaVersionMismatch, "scene version " + std::to_string(version));

  Scene scene;
  const auto& jg = textio::field(j, "grid", ctx);
  scene.grid.origin.x = textio::num_field(jg, "origin_x", ctx + ".grid");
  scene.grid.origin.y = textio::num_field(jg, "origin_y", ctx + ".grid");
  scene.grid.resolution = textio::num_field(jg, "resolution", ctx + ".grid");
  scene.grid.width_px = int(textio::num_field(jg, "width_px", ctx + ".grid"));
  scene.grid.height_px = int(textio::num_field(jg, "height_px", ctx + ".grid"));
  if (scene.grid.resolution <= 0 || scene.grid.width_px <= 0 || scene.grid.height_px <= 0)
    fail(Err::ParseError, ctx + ".grid: non-positive dimensions");

  scene.intersection.v = parse_points(textio::field(j, "intersection", ctx), ctx + ".intersection");
  if (scene.intersection.v.size() < 3)
    fail(Err::ParseError, ctx + ".intersection: needs at least 3 vertices");

  for (const auto& jr : textio::field(j, "roads", ctx)) {
    RoadCenterline r;
    r.id = textio::str_field(jr, "id", ctx + ".roads");
    r.width = textio::num_field(jr, "width", ctx + ".roads");
    r.centerline.v = parse_points(textio::field(jr, "centerline", ctx + ".roads"),
                                  ctx + ".roads.centerline");
    if (r.centerline.v.size() < 2)
      fail(Err::ParseError, ctx + ".roads: centerline needs at least 2 vertices");
    if (r.width <= 0) fail(Err::ParseError, ctx + ".roads: non-positive width");
    scene.roads.push_back(std::move(r));
  }

  for (const auto& jc : textio::field(j, "crosswalks", ctx)) {
    CrosswalkGT c;
    c.road_id = textio::str_field(jc, "road_id", ctx + ".crosswalks");
    c.s1 = textio::num_field(jc, "s1", ctx + ".crosswalks");
    c.s2 = textio::num_field(jc, "s2", ctx + ".crosswalks");
    c.beta = textio::num_field(jc, "beta", ctx + ".crosswalks");
    c.polygon.v = parse_points(textio::field(jc, "polygon", ctx + ".crosswalks"),
                               ctx + ".crosswalks.polygon");
    bool found = false;
    for (const RoadCenterline& r : scene.roads) found |= r.id == c.road_id;
    if (!found)
      fail(Err::ParseError, ctx + ".crosswalks: unknown road_id '" + c.road_id + "'");
    scene.crosswalks.push_back(std::move(c));
  }
  return scene;
}

void save_scene(const Scene& scene, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Err::IoError, "cannot open " + path + " for writing");
  f << scene_to_json(scene);
  if (!f) fail(Err::IoError, "write failed on " + path);
}

Scene load_scene(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Err::IoError, "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return scene_from_json(ss.str());
}

}  // namespace cwmap
