#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "cwmap/error.hpp"

namespace cwmap {

constexpr double kPi = 3.141592653589793238462643383279502884;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

// Row-major raster frame. Pixel (row, col) has its center at
// origin + (col * resolution, row * resolution); row follows y.
struct GridSpec {
  Point2 origin;
  double resolution = 0.04;
  int width_px = 0;
  int height_px = 0;

  bool operator==(const GridSpec& o) const {
    return origin.x == o.origin.x && origin.y == o.origin.y &&
           resolution == o.resolution && width_px == o.width_px &&
           height_px == o.height_px;
  }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

struct PixelCoord {
  int row = 0;
  int col = 0;
};

// Single-channel raster over a GridSpec, binary32 values.
struct Grid {
  GridSpec spec;
  std::vector<float> values;

  Grid() = default;
  explicit Grid(const GridSpec& s, float fill = 0.0f)
      : spec(s), values(size_t(s.width_px) * size_t(s.height_px), fill) {}

  float& at(int row, int col) { return values[size_t(row) * spec.width_px + col]; }
  float at(int row, int col) const { return values[size_t(row) * spec.width_px + col]; }
  size_t size() const { return values.size(); }
};

// Vertices in order; at least 2, no repeated consecutive points.
struct Polyline {
  std::vector<Point2> v;
};

// Simple polygon, CCW vertex order, no closing duplicate.
struct Polygon {
  std::vector<Point2> v;
};

////////////////////////////////////////////////////////////////////////////////
// Angles
//
// Crosswalk boundaries are undirected, so every angle is folded into [0, pi).

double fold_angle(double t);

// Circular distance between folded angles, in [0, pi/2].
double folded_diff(double a, double b);

////////////////////////////////////////////////////////////////////////////////
// World <-> raster transforms
//
// Rounding is half-up (ties toward +inf) on both axes.

double round_half_up(double v);

// Throws OutOfBounds when p lies outside the grid footprint
// [origin - res/2, origin + (n - 1/2) * res] on either axis.
PixelCoord world_to_pixel(Point2 p, const GridSpec& g);

// Center of pixel (row, col). Throws OutOfBounds for invalid indices.
Point2 pixel_to_world(int row, int col, const GridSpec& g);

bool pixel_in_grid(PixelCoord pc, const GridSpec& g);

////////////////////////////////////////////////////////////////////////////////
// Polygon primitives

double polygon_signed_area(const Polygon& poly);

// Boundary points count as inside.
bool point_in_polygon(Point2 p, const Polygon& poly);

bool polygon_is_convex(const Polygon& poly);

// O(n^2) segment test, used by generator validation and tests.
bool polygon_is_simple(const Polygon& poly);

// Strict interior overlap between convex polygons (separating axis test).
// Shared boundary contact does not count as overlap.
bool convex_polygons_overlap(const Polygon& a, const Polygon& b);

Polygon convex_hull(std::vector<Point2> pts);

std::pair<Point2, Point2> polygon_bbox(const Polygon& poly);

// Distance from p to segment [a, b].
double point_segment_distance(Point2 p, Point2 a, Point2 b);

////////////////////////////////////////////////////////////////////////////////
// Polyline primitives

double polyline_length(const Polyline& pl);

// Point at arclength s, clamped to [0, length].
Point2 polyline_point_at(const Polyline& pl, double s);

// Direction angle of the chord from first to last vertex.
double polyline_chord_angle(const Polyline& pl);

// Offset polygon covering the polyline inflated laterally by half_width
// (mitered joins, CCW). Used as the search corridor of a road.
Polygon corridor_polygon(const Polyline& pl, double half_width);

// Arclength of the last crossing of the polyline through the polygon
// boundary, i.e. where a road oriented away from the intersection leaves it.
// nullopt when the polyline never crosses the boundary.
std::optional<double> polyline_exit_arclength(const Polyline& pl, const Polygon& poly);

////////////////////////////////////////////////////////////////////////////////
// Raster operations

// Binary mask: pixel set iff its center lies inside poly (boundary inclusive).
// Throws DegeneratePolygon when |area| < resolution^2.
Grid rasterize_polygon(const Polygon& poly, const GridSpec& g);

// Same, OR-ed into an existing mask restricted to the polygon bbox.
void rasterize_polygon_into(const Polygon& poly, Grid& mask);

// Exact per-pixel distance (world units) to the nearest of the given
// segments. Reference quality, O(pixels * segments); intended for tests.
Grid brute_force_distance_field(const std::vector<std::pair<Point2, Point2>>& segments,
                                const GridSpec& g);

// Sample points along the line through `center` with direction
// (cos angle, sin angle), spaced `step`, at parameters k * step (k integer),
// restricted to the corridor polygon and the grid footprint. Ordered by k.
std::vector<Point2> sample_slice(Point2 center, double angle, const Polygon& corridor,
                                 const GridSpec& g, double step);

////////////////////////////////////////////////////////////////////////////////
// Crosswalk shape

// Quadrilateral whose boundary edges pass through cl(s1) and cl(s2) with
// direction angle beta, each extended +-half_width along that direction.
// CCW. Throws InvalidInterval unless 0 <= s1 < s2 <= length and half_width > 0.
Polygon crosswalk_polygon(const Polyline& cl, double s1, double s2, double beta,
                          double half_width);

}  // namespace cwmap
