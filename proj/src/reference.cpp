#include "cwmap/reference.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cwmap::reference {

bool point_in_polygon(Point2 p, const Polygon& poly) {
  const size_t n = poly.v.size();
  for (size_t i = 0; i < n; ++i) {
    Point2 a = poly.v[i], b = poly.v[(i + 1) % n];
    if (point_segment_distance(p, a, b) <= 1e-9) return true;
  }
  int winding = 0;
  for (size_t i = 0; i < n; ++i) {
    Point2 a = poly.v[i], b = poly.v[(i + 1) % n];
    if (a.y <= p.y) {
      if (b.y > p.y && cross(b - a, p - a) > 0.0) ++winding;
    } else {
      if (b.y <= p.y && cross(b - a, p - a) < 0.0) --winding;
    }
  }
  return winding != 0;
}

Grid rasterize_polygon(const Polygon& poly, const GridSpec& g) {
  Grid out(g);
  for (int row = 0; row < g.height_px; ++row)
    for (int col = 0; col < g.width_px; ++col) {
      Point2 p = pixel_to_world(row, col, g);
      if (reference::point_in_polygon(p, poly)) out.at(row, col) = 1.0f;
    }
  return out;
}

Grid render_dt(const Scene& scene) {
  std::vector<std::pair<Point2, Point2>> segs;
  for (const CrosswalkGT& gt : scene.crosswalks) {
    const RoadCenterline* road = nullptr;
    for (const RoadCenterline& r : scene.roads)
      if (r.id == gt.road_id) road = &r;
    if (!road) fail(Err::RoadMismatch, "crosswalk references unknown road " + gt.road_id);
    double h = road->width / 2.0;
    Point2 dir{std::cos(gt.beta), std::sin(gt.beta)};
    for (double s : {gt.s1, gt.s2}) {
      Point2 c = polyline_point_at(road->centerline, s);
      segs.push_back({c - h * dir, c + h * dir});
    }
  }
  const GridSpec& g = scene.grid;
  Grid out(g);
  if (segs.empty()) return out;
  Grid dist = brute_force_distance_field(segs, g);
  for (int row = 0; row < g.height_px; ++row)
    for (int col = 0; col < g.width_px; ++col) {
      double d_px = double(dist.at(row, col)) / g.resolution;
      if (d_px < kDtThresholdPx) out.at(row, col) = float(kDtThresholdPx - d_px);
    }
  return out;
}

Grid blur2d(const Grid& in, double sigma) {
  if (!(sigma > 0.0)) return in;
  int r = std::max(1, int(std::ceil(3.0 * sigma)));
  std::vector<double> k1(2 * r + 1);
  double sum = 0.0;
  for (int k = -r; k <= r; ++k) {
    k1[k + r] = std::exp(-0.5 * double(k) * k / (sigma * sigma));
    sum += k1[k + r];
  }
  for (double& w : k1) w /= sum;

  const GridSpec& g = in.spec;
  Grid out(g);
  for (int row = 0; row < g.height_px; ++row)
    for (int col = 0; col < g.width_px; ++col) {
      double acc = 0.0;
      for (int dr = -r; dr <= r; ++dr) {
        int rr = row + dr;
        if (rr < 0 || rr >= g.height_px) continue;
        for (int dc = -r; dc <= r; ++dc) {
          int cc = col + dc;
          if (cc < 0 || cc >= g.width_px) continue;
          acc += k1[dr + r] * k1[dc + r] * double(in.at(rr, cc));
        }
      }
      out.at(row, col) = float(acc);
    }
  return out;
}

EnergyMax maximize_energy_exhaustive(const Accumulator1D& acc, const EnergyConfig& cfg) {
  const std::vector<double>& s = acc.positions;
  const size_t n = s.size();
  if (n < 2 || s.back() - s.front() < cfg.min_width)
    fail(Err::WindowTooShort, "window narrower than min_width");

  const double lam = cfg.lambda_i;
  std::vector<double> f(n), gg(n);
  for (size_t k = 0; k < n; ++k) {
    f[k] = lam * acc.prefix_seg[k] + (1.0 - lam) * acc.slice_dt[k];
    gg[k] = (1.0 - lam) * acc.slice_dt[k] - lam * acc.prefix_seg[k];
  }

  EnergyMax best;
  bool found = false;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      double w = s[j] - s[i];
      if (w < cfg.min_width || w > cfg.max_width) continue;
      const double e = f[j] + gg[i];
      if (!found || e > best.energy) {
        best = {s[i], s[j], e, i, j};
        found = true;
      }
    }
  if (!found) fail(Err::WindowTooShort, "no pair satisfies the width bounds");
  return best;
}

}  // namespace cwmap::reference
