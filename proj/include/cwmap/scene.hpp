#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cwmap/geometry.hpp"

namespace cwmap {

struct RoadCenterline {
  std::string id;
  Polyline centerline;  // oriented away from the intersection
  double width = 0.0;   // meters
};

struct CrosswalkGT {
  std::string road_id;
  double s1 = 0.0;   // arclength along the road centerline
  double s2 = 0.0;
  double beta = 0.0; // folded boundary angle, [0, pi)
  Polygon polygon;
};

struct Scene {
  GridSpec grid;
  Polygon intersection;
  std::vector<RoadCenterline> roads;
  std::vector<CrosswalkGT> crosswalks;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct GeneratorConfig {
  IntRange n_roads{3, 6};
  Range road_width{3.5, 6.0};      // meters
  Range crosswalk_width{2.0, 4.0}; // s2 - s1, meters
  Range crosswalk_offset{0.8, 4.0};// gap between intersection edge and s1
  double angle_jitter_deg = 8.0;   // max |beta - perpendicular|
  double p_no_crosswalk = 0.15;
  uint64_t seed = 0;
};

// Deterministic scene for (cfg, index): same inputs give byte-identical
// scenes, independent of request order. Throws GenerationFailed when no
// valid layout is found within 100 attempts.
Scene generate_scene(const GeneratorConfig& cfg, uint64_t index);

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);

void save_scene(const Scene& scene, const std::string& path);
Scene load_scene(const std::string& path);

}  // namespace cwmap
