#include "cwmap/geometry.hpp"

#include <algorithm>
#include <string>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace cwmap {

namespace {

constexpr double kEps = 1e-12;

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

int orientation_sign(Point2 a, Point2 b, Point2 c) {
  double d = cross(b - a, c - a);
  double scale = std::max({std::abs(b.x - a.x), std::abs(b.y - a.y),
                           std::abs(c.x - a.x), std::abs(c.y - a.y), 1.0});
  if (std::abs(d) <= 1e-12 * scale * scale) return 0;
  return d > 0 ? 1 : -1;
}

bool on_segment_collinear(Point2 p, Point2 a, Point2 b) {
  return p.x >= std::min(a.x, b.x) - kEps && p.x <= std::max(a.x, b.x) + kEps &&
         p.y >= std::min(a.y, b.y) - kEps && p.y <= std::max(a.y, b.y) + kEps;
}

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  int o1 = orientation_sign(a, b, c);
  int o2 = orientation_sign(a, b, d);
  int o3 = orientation_sign(c, d, a);
  int o4 = orientation_sign(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment_collinear(c, a, b)) return true;
  if (o2 == 0 && on_segment_collinear(d, a, b)) return true;
  if (o3 == 0 && on_segment_collinear(a, c, d)) return true;
  if (o4 == 0 && on_segment_collinear(b, c, d)) return true;
  return false;
}

// Parameter interval of line c + t*d inside an axis-aligned box, slab method.
bool clip_line_to_box(Point2 c, Point2 d, Point2 lo, Point2 hi, double& t0, double& t1) {
  t0 = -1e300;
  t1 = 1e300;
  const double cv[2] = {c.x, c.y};
  const double dv[2] = {d.x, d.y};
  const double lov[2] = {lo.x, lo.y};
  const double hiv[2] = {hi.x, hi.y};
  for (int ax = 0; ax < 2; ++ax) {
    if (std::abs(dv[ax]) < kEps) {
      if (cv[ax] < lov[ax] || cv[ax] > hiv[ax]) return false;
      continue;
    }
    double a = (lov[ax] - cv[ax]) / dv[ax];
    double b = (hiv[ax] - cv[ax]) / dv[ax];
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
  }
  return t0 <= t1;
}

}  // namespace

////////////////////////////////////////////////////////////////////////////////
// Angles

double fold_angle(double t) {
  double r = std::fmod(t, kPi);
  if (r < 0.0) r += kPi;
  if (r >= kPi) r = 0.0;
  return r;
}

double folded_diff(double a, double b) {
  double d = std::abs(fold_angle(a) - fold_angle(b));
  return std::min(d, kPi - d);
}

////////////////////////////////////////////////////////////////////////////////
// World <-> raster transforms

double round_half_up(double v) { return std::floor(v + 0.5); }

PixelCoord world_to_pixel(Point2 p, const GridSpec& g) {
  int col = int(round_half_up((p.x - g.origin.x) / g.resolution));
  int row = int(round_half_up((p.y - g.origin.y) / g.resolution));
  if (col < 0 || col >= g.width_px || row < 0 || row >= g.height_px)
    fail(Err::OutOfBounds, "point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                               ") outside grid footprint");
  return {row, col};
}

Point2 pixel_to_world(int row, int col, const GridSpec& g) {
  if (col < 0 || col >= g.width_px || row < 0 || row >= g.height_px)
    fail(Err::OutOfBounds,
         "pixel (" + std::to_string(row) + ", " + std::to_string(col) + ") outside grid");
  return {g.origin.x + col * g.resolution, g.origin.y + row * g.resolution};
}

bool pixel_in_grid(PixelCoord pc, const GridSpec& g) {
  return pc.col >= 0 && pc.col < g.width_px && pc.row >= 0 && pc.row < g.height_px;
}

////////////////////////////////////////////////////////////////////////////////
// Polygon primitives

double polygon_signed_area(const Polygon& poly) {
  const auto& v = poly.v;
  double s = 0.0;
  for (size_t i = 0, n = v.size(); i < n; ++i) {
    const Point2& a = v[i];
    const Point2& b = v[(i + 1) % n];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

bool point_in_polygon(Point2 p, const Polygon& poly) {
  const auto& v = poly.v;
  const size_t n = v.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    const Point2& a = v[i];
    const Point2& b = v[(i + 1) % n];
    if (point_segment_distance(p, a, b) <= 1e-9) return true;
  }
  // Crossing number against ray toward +x; half-open vertex rule.
  bool inside = false;
  for (size_t i = 0; i < n; ++i) {
    const Point2& a = v[i];
    const Point2& b = v[(i + 1) % n];
    if ((a.y > p.y) != (b.y > p.y)) {
      double xc = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (xc > p.x) inside = !inside;
    }
  }
  return inside;
}

bool polygon_is_convex(const Polygon& poly) {
  const auto& v = poly.v;
  const size_t n = v.size();
  if (n < 3) return false;
  int sign = 0;
  for (size_t i = 0; i < n; ++i) {
    int s = orientation_sign(v[i], v[(i + 1) % n], v[(i + 2) % n]);
    if (s == 0) continue;
    if (sign == 0) sign = s;
    else if (s != sign) return false;
  }
  return true;
}

bool polygon_is_simple(const Polygon& poly) {
  const auto& v = poly.v;
  const size_t n = v.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      // Skip edges sharing a vertex.
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) return false;
    }
  }
  return true;
}

bool convex_polygons_overlap(const Polygon& a, const Polygon& b) {
  const Polygon* polys[2] = {&a, &b};
  for (const Polygon* poly : polys) {
    const auto& v = poly->v;
    for (size_t i = 0, n = v.size(); i < n; ++i) {
      Point2 e = v[(i + 1) % n] - v[i];
      Point2 axis{-e.y, e.x};
      double a_lo = 1e300, a_hi = -1e300, b_lo = 1e300, b_hi = -1e300;
      for (const Point2& p : a.v) {
        double d = dot(p, axis);
        a_lo = std::min(a_lo, d);
        a_hi = std::max(a_hi, d);
      }
      for (const Point2& p : b.v) {
        double d = dot(p, axis);
        b_lo = std::min(b_lo, d);
        b_hi = std::max(b_hi, d);
      }
      double tol = 1e-9 * std::max(1.0, norm(axis));
      if (a_hi <= b_lo + tol || b_hi <= a_lo + tol) return false;
    }
  }
  return true;
}

Polygon convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  const size_t n = pts.size();
  if (n < 3) fail(Err::DegeneratePolygon, "hull of fewer than 3 distinct points");
  std::vector<Point2> h(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (size_t i = n - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  if (h.size() < 3) fail(Err::DegeneratePolygon, "collinear hull input");
  return Polygon{std::move(h)};
}

std::pair<Point2, Point2> polygon_bbox(const Polygon& poly) {
  Point2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const Point2& p : poly.v) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  return {lo, hi};
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  Point2 ab = b - a;
  double len2 = dot(ab, ab);
  if (len2 <= 0.0) return norm(p - a);
  double t = clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

////////////////////////////////////////////////////////////////////////////////
// Polyline primitives

double polyline_length(const Polyline& pl) {
  double s = 0.0;
  for (size_t i = 0; i + 1 < pl.v.size(); ++i) s += norm(pl.v[i + 1] - pl.v[i]);
  return s;
}

Point2 polyline_point_at(const Polyline& pl, double s) {
  const auto& v = pl.v;
  if (v.size() < 2) fail(Err::InvalidInterval, "polyline needs at least 2 vertices");
  if (s <= 0.0) return v.front();
  for (size_t i = 0; i + 1 < v.size(); ++i) {
    double seg = norm(v[i + 1] - v[i]);
    if (s <= seg || i + 2 == v.size()) {
      double t = seg > 0.0 ? clamp(s / seg, 0.0, 1.0) : 0.0;
      return v[i] + t * (v[i + 1] - v[i]);
    }
    s -= seg;
  }
  return v.back();
}

double polyline_chord_angle(const Polyline& pl) {
  if (pl.v.size() < 2) fail(Err::InvalidInterval, "polyline needs at least 2 vertices");
  Point2 d = pl.v.back() - pl.v.front();
  return std::atan2(d.y, d.x);
}

Polygon corridor_polygon(const Polyline& pl, double half_width) {
  const auto& v = pl.v;
  if (v.size() < 2) fail(Err::InvalidInterval, "polyline needs at least 2 vertices");
  if (!(half_width > 0.0)) fail(Err::InvalidInterval, "half_width must be positive");
  const size_t n = v.size();
  std::vector<Point2> left(n), right(n);
  for (size_t i = 0; i < n; ++i) {
    Point2 d_in = i > 0 ? v[i] - v[i - 1] : v[1] - v[0];
    Point2 d_out = i + 1 < n ? v[i + 1] - v[i] : v[n - 1] - v[n - 2];
    double l_in = norm(d_in), l_out = norm(d_out);
    if (l_in > 0) d_in = (1.0 / l_in) * d_in;
    if (l_out > 0) d_out = (1.0 / l_out) * d_out;
    Point2 n_in{-d_in.y, d_in.x}, n_out{-d_out.y, d_out.x};
    Point2 m = n_in + n_out;
    double mlen = norm(m);
    if (mlen < kEps) m = n_out; else m = (1.0 / mlen) * m;
    // Miter length capped at 5x to keep hairpin joins bounded.
    double c = std::max(dot(m, n_out), 0.2);
    Point2 off = (half_width / c) * m;
    left[i] = v[i] + off;
    right[i] = v[i] - off;
  }
  Polygon poly;
  poly.v.reserve(2 * n);
  for (size_t i = 0; i < n; ++i) poly.v.push_back(right[i]);
  for (size_t i = n; i-- > 0;) poly.v.push_back(left[i]);
  if (polygon_signed_area(poly) < 0.0) std::reverse(poly.v.begin(), poly.v.end());
  return poly;
}

std::optional<double> polyline_exit_arclength(const Polyline& pl, const Polygon& poly) {
  const auto& v = pl.v;
  if (v.size() < 2 || poly.v.size() < 3) return std::nullopt;
  double best = -1.0;
  double cum = 0.0;
  for (size_t i = 0; i + 1 < v.size(); ++i) {
    Point2 a = v[i], b = v[i + 1];
    Point2 r = b - a;
    double seg_len = norm(r);
    for (size_t j = 0, m = poly.v.size(); j < m; ++j) {
      Point2 c = poly.v[j], d = poly.v[(j + 1) % m];
      Point2 s = d - c;
      double denom = cross(r, s);
      if (std::abs(denom) < kEps) continue;
      double u = cross(c - a, s) / denom;
      double w = cross(c - a, r) / denom;
      if (u < -1e-9 || u > 1.0 + 1e-9 || w < -1e-9 || w > 1.0 + 1e-9) continue;
      best = std::max(best, cum + clamp(u, 0.0, 1.0) * seg_len);
    }
    cum += seg_len;
  }
  if (best < 0.0) return std::nullopt;
  return best;
}

////////////////////////////////////////////////////////////////////////////////
// Raster operations

Grid rasterize_polygon(const Polygon& poly, const GridSpec& g) {
  Grid mask(g, 0.0f);
  rasterize_polygon_into(poly, mask);
  return mask;
}

void rasterize_polygon_into(const Polygon& poly, Grid& mask) {
  if (std::abs(polygon_signed_area(poly)) < mask.spec.resolution * mask.spec.resolution)
    fail(Err::DegeneratePolygon, "polygon area below one pixel");
  const GridSpec& g = mask.spec;
  auto [lo, hi] = polygon_bbox(poly);
  int c0 = std::max(0, int(std::floor((lo.x - g.origin.x) / g.resolution)) - 1);
  int c1 = std::min(g.width_px - 1, int(std::ceil((hi.x - g.origin.x) / g.resolution)) + 1);
  int r0 = std::max(0, int(std::floor((lo.y - g.origin.y) / g.resolution)) - 1);
  int r1 = std::min(g.height_px - 1, int(std::ceil((hi.y - g.origin.y) / g.resolution)) + 1);
  if (c0 > c1 || r0 > r1) return;
#pragma omp parallel for schedule(static)
  for (int row = r0; row <= r1; ++row) {
    double y = g.origin.y + row * g.resolution;
    for (int col = c0; col <= c1; ++col) {
      Point2 p{g.origin.x + col * g.resolution, y};
      if (point_in_polygon(p, poly)) mask.at(row, col) = 1.0f;
    }
  }
}

Grid brute_force_distance_field(const std::vector<std::pair<Point2, Point2>>& segments,
                                const GridSpec& g) {
  Grid out(g, 0.0f);
  for (int row = 0; row < g.height_px; ++row) {
    for (int col = 0; col < g.width_px; ++col) {
      Point2 p{g.origin.x + col * g.resolution, g.origin.y + row * g.resolution};
      double best = 1e300;
      for (const auto& [a, b] : segments)
        best = std::min(best, point_segment_distance(p, a, b));
      out.at(row, col) = float(segments.empty() ? 0.0 : best);
    }
  }
  return out;
}

std::vector<Point2> sample_slice(Point2 center, double angle, const Polygon& corridor,
                                 const GridSpec& g, double step) {
  if (!(step > 0.0)) fail(Err::InvalidInterval, "step must be positive");
  std::vector<Point2> out;
  if (corridor.v.size() < 3) return out;
  Point2 dir{std::cos(angle), std::sin(angle)};

  // Grid footprint in line parameters.
  Point2 lo{g.origin.x - 0.5 * g.resolution, g.origin.y - 0.5 * g.resolution};
  Point2 hi{g.origin.x + (g.width_px - 0.5) * g.resolution,
            g.origin.y + (g.height_px - 0.5) * g.resolution};
  double gt0, gt1;
  if (!clip_line_to_box(center, dir, lo, hi, gt0, gt1)) return out;

  // Crossing parameters with corridor edges.
  std::vector<double> ts;
  const auto& v = corridor.v;
  for (size_t i = 0, n = v.size(); i < n; ++i) {
    Point2 a = v[i], b = v[(i + 1) % n];
    Point2 e = b - a;
    double denom = cross(dir, e);
    if (std::abs(denom) < kEps) continue;
    double w = cross(a - center, dir) / denom;  // position along edge
    if (w < -1e-9 || w > 1.0 + 1e-9) continue;
    double t = cross(a - center, e) / denom;
    ts.push_back(t);
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end(),
                       [](double a, double b) { return std::abs(a - b) < 1e-9; }),
           ts.end());

  std::vector<std::pair<double, double>> spans;
  if (ts.size() < 2) {
    if (point_in_polygon(center, corridor)) spans.push_back({0.0, 0.0});
  } else {
    for (size_t i = 0; i + 1 < ts.size(); ++i) {
      double mid = 0.5 * (ts[i] + ts[i + 1]);
      if (point_in_polygon(center + mid * dir, corridor))
        spans.push_back({ts[i], ts[i + 1]});
    }
  }

  std::vector<long long> ks;
  for (auto [a, b] : spans) {
    a = std::max(a, gt0);
    b = std::min(b, gt1);
    if (a > b) continue;
    long long k0 = (long long)std::ceil(a / step - 1e-9);
    long long k1 = (long long)std::floor(b / step + 1e-9);
    for (long long k = k0; k <= k1; ++k) ks.push_back(k);
  }
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  out.reserve(ks.size());
  for (long long k : ks) out.push_back(center + (double(k) * step) * dir);
  return out;
}

////////////////////////////////////////////////////////////////////////////////
// Crosswalk shape

Polygon crosswalk_polygon(const Polyline& cl, double s1, double s2, double beta,
                          double half_width) {
  double len = polyline_length(cl);
  if (!(s1 >= 0.0) || !(s1 < s2) || !(s2 <= len + 1e-9))
    fail(Err::InvalidInterval, "need 0 <= s1 < s2 <= centerline length");
  if (!(half_width > 0.0)) fail(Err::InvalidInterval, "half_width must be positive");
  Point2 p1 = polyline_point_at(cl, s1);
  Point2 p2 = polyline_point_at(cl, std::min(s2, len));
  Point2 b{std::cos(beta), std::sin(beta)};
  Polygon poly;
  poly.v = {p1 - half_width * b, p1 + half_width * b, p2 + half_width * b,
            p2 - half_width * b};
  if (polygon_signed_area(poly) < 0.0) std::reverse(poly.v.begin(), poly.v.end());
  return poly;
}

}  // namespace cwmap
