#include "cwmap/featuremaps.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cwmap/rng.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace cwmap {

namespace {

struct BoundaryEdge {
  Point2 a, b;
  double beta;
  const std::string* road_id;
};

// The two crossing edges of every crosswalk, i.e. the segments through
// cl(s1) and cl(s2) with direction beta.
std::vector<BoundaryEdge> boundary_edges(const Scene& scene) {
  std::vector<BoundaryEdge> edges;
  for (const CrosswalkGT& gt : scene.crosswalks) {
    const RoadCenterline* road = nullptr;
    for (const RoadCenterline& r : scene.roads)
      if (r.id == gt.road_id) road = &r;
    if (!road) fail(Err::RoadMismatch, "crosswalk references unknown road " + gt.road_id);
    double h = road->width / 2.0;
    Point2 dir{std::cos(gt.beta), std::sin(gt.beta)};
    for (double s : {gt.s1, gt.s2}) {
      Point2 c = polyline_point_at(road->centerline, s);
      edges.push_back({c - h * dir, c + h * dir, gt.beta, &gt.road_id});
    }
  }
  return edges;
}

struct ColSpan {
  int lo, hi;
};

// Merged column spans per row covering every point within `radius_px` of any
// edge. Pixels outside the spans are farther than radius_px from all edges.
std::vector<std::vector<ColSpan>> band_spans(const std::vector<BoundaryEdge>& edges,
                                             const GridSpec& g, double radius_px) {
  std::vector<std::vector<ColSpan>> spans(g.height_px);
  double pad = radius_px * g.resolution + g.resolution;
  for (const BoundaryEdge& e : edges) {
    double x0 = std::min(e.a.x, e.b.x) - pad, x1 = std::max(e.a.x, e.b.x) + pad;
    double y0 = std::min(e.a.y, e.b.y) - pad, y1 = std::max(e.a.y, e.b.y) + pad;
    int c0 = std::max(0, int(std::floor((x0 - g.origin.x) / g.resolution)));
    int c1 = std::min(g.width_px - 1, int(std::ceil((x1 - g.origin.x) / g.resolution)));
    int r0 = std::max(0, int(std::floor((y0 - g.origin.y) / g.resolution)));
    int r1 = std::min(g.height_px - 1, int(std::ceil((y1 - g.origin.y) / g.resolution)));
    for (int r = r0; r <= r1; ++r)
      if (c0 <= c1) spans[r].push_back({c0, c1});
  }
  for (auto& row : spans) {
    if (row.empty()) continue;
    std::sort(row.begin(), row.end(), [](ColSpan a, ColSpan b) { return a.lo < b.lo; });
    std::vector<ColSpan> merged;
    for (ColSpan s : row) {
      if (!merged.empty() && s.lo <= merged.back().hi + 1)
        merged.back().hi = std::max(merged.back().hi, s.hi);
      else
        merged.push_back(s);
    }
    row = std::move(merged);
  }
  return spans;
}

}  // namespace

FeatureMaps render_oracle(const Scene& scene) {
  const GridSpec& g = scene.grid;
  FeatureMaps maps{Grid(g), Grid(g), Grid(g), Grid(g), Grid(g)};

  for (const CrosswalkGT& gt : scene.crosswalks)
    rasterize_polygon_into(gt.polygon, maps.seg);

  const std::vector<BoundaryEdge> edges = boundary_edges(scene);
  if (edges.empty()) return maps;
  const auto spans = band_spans(edges, g, kDtThresholdPx);
  const double angle_radius = kAngleDilationPx / 2.0;

#pragma omp parallel for schedule(dynamic, 16)
  for (int row = 0; row < g.height_px; ++row) {
    double y = g.origin.y + row * g.resolution;
    for (const ColSpan& span : spans[row]) {
      for (int col = span.lo; col <= span.hi; ++col) {
        Point2 p{g.origin.x + col * g.resolution, y};
        double best = 1e300;
        const BoundaryEdge* owner = nullptr;
        for (const BoundaryEdge& e : edges) {
          double d = point_segment_distance(p, e.a, e.b);
          if (d < best || (d == best && owner && *e.road_id < *owner->road_id)) {
            best = d;
            owner = &e;
          }
        }
        double d_px = best / g.resolution;
        if (d_px < kDtThresholdPx)
          maps.dt.at(row, col) = float(kDtThresholdPx - d_px);
        if (d_px <= angle_radius) {
          maps.angle_x.at(row, col) = float(std::cos(owner->beta));
          maps.angle_y.at(row, col) = float(std::sin(owner->beta));
          maps.angle_mask.at(row, col) = 1.0f;
        }
      }
    }
  }
  return maps;
}

////////////////////////////////////////////////////////////////////////////////
// Corruption

namespace {

// Disk erosion of the foreground; neighbors beyond the grid are ignored.
Grid erode(const Grid& in, double radius_px) {
  int r = int(std::floor(radius_px));
  std::vector<std::pair<int, int>> disk;
  for (int dr = -r; dr <= r; ++dr)
    for (int dc = -r; dc <= r; ++dc)
      if (double(dr) * dr + double(dc) * dc <= radius_px * radius_px + 1e-9)
        disk.push_back({dr, dc});
  const GridSpec& g = in.spec;
  Grid out(g);
#pragma omp parallel for schedule(static)
  for (int row = 0; row < g.height_px; ++row)
    for (int col = 0; col < g.width_px; ++col) {
      float m = in.at(row, col);
      for (auto [dr, dc] : disk) {
        int rr = row + dr, cc = col + dc;
        if (rr < 0 || rr >= g.height_px || cc < 0 || cc >= g.width_px) continue;
        m = std::min(m, in.at(rr, cc));
      }
      out.at(row, col) = m;
    }
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  int r = std::max(1, int(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[i + r] = std::exp(-0.5 * double(i) * i / (sigma * sigma));
    sum += k[i + r];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable Gaussian, zero padding outside the grid.
Grid blur(const Grid& in, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  const int r = int(k.size() / 2);
  const GridSpec& g = in.spec;
  Grid tmp(g), out(g);
#pragma omp parallel for schedule(static)
  for (int row = 0; row < g.height_px; ++row)
    for (int col = 0; col < g.width_px; ++col) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) {
        int cc = col + i;
        if (cc < 0 || cc >= g.width_px) continue;
        acc += k[i + r] * in.at(row, cc);
      }
      tmp.at(row, col) = float(acc);
    }
#pragma omp parallel for schedule(static)
  for (int row = 0; row < g.height_px; ++row)
    for (int col = 0; col < g.width_px; ++col) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) {
        int rr = row + i;
        if (rr < 0 || rr >= g.height_px) continue;
        acc += k[i + r] * tmp.at(rr, col);
      }
      out.at(row, col) = float(acc);
    }
  return out;
}

void add_noise(Grid& grid, double sigma, double lo, double hi, uint64_t seed, uint64_t salt) {
  const GridSpec& g = grid.spec;
#pragma omp parallel for schedule(static)
  for (int row = 0; row < g.height_px; ++row)
    for (int col = 0; col < g.width_px; ++col) {
      uint64_t idx = uint64_t(row) * uint64_t(g.width_px) + uint64_t(col);
      double v = grid.at(row, col) + sigma * gaussian_at(seed, salt, idx);
      grid.at(row, col) = float(std::min(std::max(v, lo), hi));
    }
}

void punch_holes(FeatureMaps& maps, const CorruptionConfig& cfg) {
  const GridSpec& g = maps.spec();
  const uint64_t total = uint64_t(g.width_px) * uint64_t(g.height_px);
  const uint64_t target = uint64_t(std::ceil(std::min(cfg.hole_rate, 1.0) * double(total)));
  Grid* channels[5] = {&maps.seg, &maps.dt, &maps.angle_x, &maps.angle_y, &maps.angle_mask};
  if (target >= total) {
    for (Grid* ch : channels) std::fill(ch->values.begin(), ch->values.end(), 0.0f);
    return;
  }
  Rng rng(derive_stream(cfg.seed, 0x486F6C65ull));  // hole stream
  std::vector<uint8_t> covered(total, 0);
  uint64_t covered_px = 0;
  int lo = std::max(1, cfg.hole_size.lo), hi = std::max(lo, cfg.hole_size.hi);
  for (long guard = 0; covered_px < target && guard < 1000000; ++guard) {
    int w = std::min(rng.uniform_int(lo, hi), g.width_px);
    int h = std::min(rng.uniform_int(lo, hi), g.height_px);
    int c0 = rng.uniform_int(0, g.width_px - w);
    int r0 = rng.uniform_int(0, g.height_px - h);
    for (int row = r0; row < r0 + h; ++row)
      for (int col = c0; col < c0 + w; ++col) {
        uint64_t idx = uint64_t(row) * uint64_t(g.width_px) + uint64_t(col);
        if (!covered[idx]) {
          covered[idx] = 1;
          ++covered_px;
        }
        for (Grid* ch : channels) ch->at(row, col) = 0.0f;
      }
  }
}

void jitter_angles(FeatureMaps& maps, double sigma_deg, uint64_t seed) {
  const GridSpec& g = maps.spec();
  const double sigma = sigma_deg * kPi / 180.0;
#pragma omp parallel for schedule(static)
  for (int row = 0; row < g.height_px; ++row)
    for (int col = 0; col < g.width_px; ++col) {
      if (maps.angle_mask.at(row, col) < 0.5f) continue;
      uint64_t idx = uint64_t(row) * uint64_t(g.width_px) + uint64_t(col);
      double theta = fold_angle(std::atan2(maps.angle_y.at(row, col),
                                           maps.angle_x.at(row, col)));
      theta = fold_angle(theta + sigma * gaussian_at(seed, 0x414E47ull, idx));
      maps.angle_x.at(row, col) = float(std::cos(theta));
      maps.angle_y.at(row, col) = float(std::sin(theta));
    }
}

}  // namespace

FeatureMaps corrupt(const FeatureMaps& maps, const CorruptionConfig& cfg) {
  FeatureMaps out = maps;
  if (cfg.erosion_px > 0.0) out.seg = erode(out.seg, cfg.erosion_px);
  if (cfg.blur_sigma > 0.0) {
    out.seg = blur(out.seg, cfg.blur_sigma);
    out.dt = blur(out.dt, cfg.blur_sigma);
  }
  if (cfg.noise_sigma > 0.0) {
    add_noise(out.seg, cfg.noise_sigma, 0.0, 1.0, cfg.seed, 0x534547ull);
    add_noise(out.dt, cfg.noise_sigma, 0.0, kDtThresholdPx, cfg.seed, 0x4454ull);
  }
  if (cfg.hole_rate > 0.0) punch_holes(out, cfg);
  if (cfg.angle_jitter_deg > 0.0) jitter_angles(out, cfg.angle_jitter_deg, cfg.seed);
  return out;
}

}  // namespace cwmap
