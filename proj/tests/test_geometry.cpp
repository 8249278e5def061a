#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cwmap/geometry.hpp"
#include "cwmap/reference.hpp"
#include "cwmap/rng.hpp"

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

Polygon random_hull(Rng& rng, int n_points, double span) {
  std::vector<Point2> pts;
  for (int i = 0; i < n_points; ++i)
    pts.push_back({rng.uniform(0.0, span), rng.uniform(0.0, span)});
  return convex_hull(std::move(pts));
}

int count_set(const Grid& g) {
  int n = 0;
  for (float v : g.values) n += v != 0.0f;
  return n;
}

}  // namespace

TEST_CASE("fold_angle maps into [0, pi) and folded_diff wraps at the fold") {
  CHECK(fold_angle(kPi + 0.3) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(fold_angle(-0.2) == doctest::Approx(kPi - 0.2).epsilon(1e-12));
  CHECK(fold_angle(kPi) == 0.0);
  CHECK(fold_angle(0.0) == 0.0);
  CHECK(folded_diff(0.05, kPi - 0.05) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(folded_diff(0.3, 0.3 + kPi) == doctest::Approx(0.0).epsilon(1e-12));

  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    double a = rng.uniform(-20.0, 20.0);
    double b = rng.uniform(-20.0, 20.0);
    double f = fold_angle(a);
    CHECK(f >= 0.0);
    CHECK(f < kPi);
    double d = folded_diff(a, b);
    CHECK(d >= 0.0);
    CHECK(d <= kPi / 2 + 1e-12);
    CHECK(d == folded_diff(b, a));
  }
}

TEST_CASE("round_half_up sends ties toward positive infinity") {
  CHECK(round_half_up(0.5) == 1.0);
  CHECK(round_half_up(-0.5) == 0.0);
  CHECK(round_half_up(1.5) == 2.0);
  CHECK(round_half_up(-1.5) == -1.0);
  CHECK(round_half_up(2.49) == 2.0);
  CHECK(round_half_up(-2.51) == -3.0);
}

TEST_CASE("pixel round trip is exact for every in-grid pixel") {
  Rng rng(42);
  const double resolutions[] = {0.02, 0.04, 0.1};
  for (int t = 0; t < 1000; ++t) {
    GridSpec g;
    g.origin = {rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0)};
    g.resolution = resolutions[rng.uniform_int(0, 2)];
    g.width_px = rng.uniform_int(1, 200);
    g.height_px = rng.uniform_int(1, 200);
    int row = rng.uniform_int(0, g.height_px - 1);
    int col = rng.uniform_int(0, g.width_px - 1);
    PixelCoord back = world_to_pixel(pixel_to_world(row, col, g), g);
    REQUIRE(back.row == row);
    REQUIRE(back.col == col);
  }
}

TEST_CASE("world_to_pixel rejects points outside the grid footprint") {
  GridSpec g;
  g.origin = {0.0, 0.0};
  g.resolution = 0.04;
  g.width_px = 10;
  g.height_px = 10;
  CHECK(throws_code(Err::OutOfBounds, [&] { world_to_pixel({-1.0, 0.1}, g); }));
  CHECK(throws_code(Err::OutOfBounds, [&] { world_to_pixel({0.1, 5.0}, g); }));
  CHECK(world_to_pixel({0.0, 0.0}, g).row == 0);
  CHECK(world_to_pixel({0.36, 0.36}, g).col == 9);
}

TEST_CASE("pixel_to_world rejects invalid indices") {
  GridSpec g;
  g.origin = {1.0, 2.0};
  g.resolution = 0.04;
  g.width_px = 4;
  g.height_px = 3;
  CHECK(throws_code(Err::OutOfBounds, [&] { pixel_to_world(-1, 0, g); }));
  CHECK(throws_code(Err::OutOfBounds, [&] { pixel_to_world(0, 4, g); }));
  Point2 p = pixel_to_world(2, 3, g);
  CHECK(p.x == doctest::Approx(1.12).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(2.08).epsilon(1e-12));
}

TEST_CASE("polygon_signed_area matches the shoelace formula") {
  Polygon sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  CHECK(polygon_signed_area(sq) == doctest::Approx(1.0).epsilon(1e-15));
  Polygon cw{{{0, 0}, {0, 1}, {1, 1}, {1, 0}}};
  CHECK(polygon_signed_area(cw) == doctest::Approx(-1.0).epsilon(1e-15));
  Polygon tri{{{0, 0}, {4, 0}, {0, 3}}};
  CHECK(polygon_signed_area(tri) == doctest::Approx(6.0).epsilon(1e-15));
}

TEST_CASE("point_in_polygon includes the boundary and matches the winding reference") {
  Polygon sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  CHECK(point_in_polygon({0.5, 0.5}, sq));
  CHECK(point_in_polygon({0.5, 0.0}, sq));
  CHECK(point_in_polygon({1.0, 1.0}, sq));
  CHECK(!point_in_polygon({1.5, 0.5}, sq));
  CHECK(!point_in_polygon({0.5, -0.2}, sq));

  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    Polygon hull = random_hull(rng, 12, 4.0);
    if (hull.v.size() < 3) continue;
    for (int i = 0; i < 100; ++i) {
      Point2 p{rng.uniform(-1.0, 5.0), rng.uniform(-1.0, 5.0)};
      CHECK(point_in_polygon(p, hull) == reference::point_in_polygon(p, hull));
    }
  }
}

TEST_CASE("rasterize_polygon sets exactly the pixels whose centers lie inside") {
  GridSpec g;
  g.origin = {0.0, 0.0};
  g.resolution = 0.04;
  g.width_px = 40;
  g.height_px = 40;

  // 1m x 1m square placed so 25 x 25 pixel centers fall inside.
  Polygon sq{{{0.02, 0.02}, {1.02, 0.02}, {1.02, 1.02}, {0.02, 1.02}}};
  Grid mask = rasterize_polygon(sq, g);

  int oracle = 0;
  for (int r = 0; r < g.height_px; ++r)
    for (int c = 0; c < g.width_px; ++c)
      oracle += reference::point_in_polygon(pixel_to_world(r, c, g), sq);
  CHECK(oracle == 625);
  CHECK(count_set(mask) == oracle);

  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    Polygon hull = random_hull(rng, 10, 1.5);
    if (hull.v.size() < 3 || std::abs(polygon_signed_area(hull)) < 0.01) continue;
    Grid fast = rasterize_polygon(hull, g);
    Grid slow = reference::rasterize_polygon(hull, g);
    REQUIRE(fast.values == slow.values);
  }
}

TEST_CASE("rasterize_polygon_into ORs into the existing mask") {
  GridSpec g;
  g.origin = {0.0, 0.0};
  g.resolution = 0.04;
  g.width_px = 60;
  g.height_px = 60;
  Polygon a{{{0.02, 0.02}, {0.5, 0.02}, {0.5, 0.5}, {0.02, 0.5}}};
  Polygon b{{{1.0, 1.0}, {1.5, 1.0}, {1.5, 1.5}, {1.0, 1.5}}};

  Grid mask(g);
  rasterize_polygon_into(a, mask);
  int na = count_set(mask);
  rasterize_polygon_into(b, mask);
  int nab = count_set(mask);
  CHECK(na == count_set(rasterize_polygon(a, g)));
  CHECK(nab == na + count_set(rasterize_polygon(b, g)));

  // Re-rasterizing a leaves the union unchanged.
  rasterize_polygon_into(a, mask);
  CHECK(count_set(mask) == nab);
}

TEST_CASE("rasterized area converges to the polygon area as resolution shrinks") {
  Rng rng(19);
  Polygon hull = random_hull(rng, 14, 2.0);
  REQUIRE(hull.v.size() >= 3);
  double area = polygon_signed_area(hull);
  REQUIRE(area > 0.1);

  auto raster_area = [&](double res) {
    GridSpec g;
    g.origin = {-0.5, -0.5};
    g.resolution = res;
    g.width_px = int(3.0 / res);
    g.height_px = int(3.0 / res);
    return count_set(rasterize_polygon(hull, g)) * res * res;
  };
  double err_coarse = std::abs(raster_area(0.16) - area);
  double err_fine = std::abs(raster_area(0.02) - area);
  CHECK(err_fine < err_coarse);
  CHECK(err_fine / area < 0.05);
}

TEST_CASE("rasterize_polygon rejects polygons thinner than one pixel of area") {
  GridSpec g;
  g.origin = {0.0, 0.0};
  g.resolution = 0.04;
  g.width_px = 10;
  g.height_px = 10;
  Polygon needle{{{0.0, 0.0}, {0.3, 0.0}, {0.3, 1e-4}, {0.0, 1e-4}}};
  CHECK(throws_code(Err::DegeneratePolygon, [&] { rasterize_polygon(needle, g); }));
}

TEST_CASE("brute_force_distance_field matches hand-computed distances") {
  GridSpec g;
  g.origin = {0.0, 0.0};
  g.resolution = 0.04;
  g.width_px = 50;
  g.height_px = 50;
  std::vector<std::pair<Point2, Point2>> segs{{{0.2, 0.2}, {1.0, 0.2}}};
  Grid d = brute_force_distance_field(segs, g);

  // Pixel (row 15, col 15) sits at (0.6, 0.6): foot of perpendicular.
  CHECK(d.at(15, 15) == doctest::Approx(0.4).epsilon(1e-6));
  // (1.4, 0.2): nearest point is the endpoint.
  CHECK(d.at(5, 35) == doctest::Approx(0.4).epsilon(1e-6));
  // (1.4, 0.6): diagonal to the endpoint.
  CHECK(d.at(15, 35) == doctest::Approx(std::sqrt(0.32)).epsilon(1e-6));
  // On the segment itself.
  CHECK(d.at(5, 15) == doctest::Approx(0.0).epsilon(1e-9));

  // A second segment can only lower distances.
  segs.push_back({{1.8, 1.8}, {1.8, 1.9}});
  Grid d2 = brute_force_distance_field(segs, g);
  for (size_t i = 0; i < d.size(); ++i) CHECK(d2.values[i] <= d.values[i] + 1e-12f);
}

TEST_CASE("brute_force_distance_field is symmetric about a vertical segment") {
  GridSpec g;
  g.origin = {0.0, 0.0};
  g.resolution = 0.04;
  g.width_px = 25;
  g.height_px = 25;
  // Segment on the center column of pixel centers (x = 0.48).
  std::vector<std::pair<Point2, Point2>> segs{{{0.48, 0.1}, {0.48, 0.8}}};
  Grid d = brute_force_distance_field(segs, g);
  for (int r = 0; r < 25; ++r)
    for (int c = 0; c < 25; ++c)
      CHECK(d.at(r, c) == doctest::Approx(d.at(r, 24 - c)).epsilon(1e-10));
}

TEST_CASE("point_segment_distance covers interior, endpoint and degenerate cases") {
  Point2 a{0.2, 0.2}, b{1.0, 0.2};
  CHECK(point_segment_distance({0.6, 0.6}, a, b) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(point_segment_distance({1.4, 0.6}, a, b) ==
        doctest::Approx(std::sqrt(0.32)).epsilon(1e-12));
  CHECK(point_segment_distance({0.6, 0.2}, a, b) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(point_segment_distance({3.0, 4.2}, a, a) == doctest::Approx(std::sqrt(2.8 * 2.8 + 4.0 * 4.0)).epsilon(1e-12));
}

TEST_CASE("convex_hull drops interior points and the overlap test is strict") {
  std::vector<Point2> pts{{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}, {0.5, 0.5}, {1.5, 0.3}};
  Polygon hull = convex_hull(pts);
  CHECK(hull.v.size() == 4);
  CHECK(polygon_is_convex(hull));
  CHECK(polygon_is_simple(hull));
  CHECK(polygon_signed_area(hull) == doctest::Approx(4.0).epsilon(1e-12));
  for (const auto& p : pts) CHECK(point_in_polygon(p, hull));

  Polygon sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  Polygon shifted_half{{{0.5, 0}, {1.5, 0}, {1.5, 1}, {0.5, 1}}};
  Polygon shifted_far{{{3, 0}, {4, 0}, {4, 1}, {3, 1}}};
  Polygon edge_touch{{{1, 0}, {2, 0}, {2, 1}, {1, 1}}};
  CHECK(convex_polygons_overlap(sq, shifted_half));
  CHECK(!convex_polygons_overlap(sq, shifted_far));
  CHECK(!convex_polygons_overlap(sq, edge_touch));
}

TEST_CASE("polyline length, interpolation and chord angle") {
  Polyline pl{{{0, 0}, {3, 0}, {3, 4}}};
  CHECK(polyline_length(pl) == doctest::Approx(7.0).epsilon(1e-15));
  Point2 corner = polyline_point_at(pl, 3.0);
  CHECK(corner.x == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(corner.y == doctest::Approx(0.0).epsilon(1e-12));
  Point2 mid = polyline_point_at(pl, 5.0);
  CHECK(mid.x == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(mid.y == doctest::Approx(2.0).epsilon(1e-12));
  // Clamped to the endpoints.
  Point2 lo = polyline_point_at(pl, -1.0);
  CHECK(lo.x == 0.0);
  Point2 hi = polyline_point_at(pl, 100.0);
  CHECK(hi.y == doctest::Approx(4.0).epsilon(1e-12));

  Polyline diag{{{0, 0}, {1, 1}}};
  CHECK(polyline_chord_angle(diag) == doctest::Approx(kPi / 4).epsilon(1e-12));
}

TEST_CASE("corridor_polygon covers lateral offsets up to the half width") {
  Polyline straight{{{0, 0}, {10, 0}}};
  Polygon cor = corridor_polygon(straight, 1.5);
  CHECK(polygon_is_simple(cor));
  CHECK(polygon_signed_area(cor) == doctest::Approx(30.0).epsilon(1e-9));
  CHECK(point_in_polygon({5.0, 1.49}, cor));
  CHECK(point_in_polygon({5.0, -1.49}, cor));
  CHECK(!point_in_polygon({5.0, 1.51}, cor));

  Polyline bent{{{0, 0}, {5, 0}, {9, 3}}};
  Polygon bcor = corridor_polygon(bent, 1.0);
  CHECK(polygon_is_simple(bcor));
  CHECK(point_in_polygon({2.5, 0.9}, bcor));
  CHECK(point_in_polygon({2.5, -0.9}, bcor));
  // Past the bend, offsets perpendicular to the second leg.
  Point2 dir{4.0 / 5.0, 3.0 / 5.0};
  Point2 n{-dir.y, dir.x};
  Point2 m{7.0, 1.5};
  CHECK(point_in_polygon(m + 0.9 * n, bcor));
  CHECK(point_in_polygon(m + (-0.9) * n, bcor));
}

TEST_CASE("polyline_exit_arclength finds where the road leaves the polygon") {
  Polygon sq{{{-2, -2}, {2, -2}, {2, 2}, {-2, 2}}};
  Polyline ray{{{0, 0}, {10, 0}}};
  auto s = polyline_exit_arclength(ray, sq);
  REQUIRE(s.has_value());
  CHECK(*s == doctest::Approx(2.0).epsilon(1e-9));

  Polyline inside{{{0, 0}, {1, 0}}};
  CHECK(!polyline_exit_arclength(inside, sq).has_value());

  Polyline bent{{{0, 0}, {0, 1}, {5, 1}}};
  auto s2 = polyline_exit_arclength(bent, sq);
  REQUIRE(s2.has_value());
  CHECK(*s2 == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("crosswalk_polygon is a CCW parallelogram through the interval endpoints") {
  Polyline cl{{{0, 0}, {20, 0}}};
  Polygon p = crosswalk_polygon(cl, 2.0, 5.0, kPi / 2, 2.0);
  REQUIRE(p.v.size() == 4);
  CHECK(polygon_is_simple(p));
  CHECK(polygon_is_convex(p));
  CHECK(polygon_signed_area(p) == doctest::Approx(12.0).epsilon(1e-12));

  auto has_corner = [&](double x, double y) {
    for (const auto& v : p.v)
      if (std::abs(v.x - x) < 1e-9 && std::abs(v.y - y) < 1e-9) return true;
    return false;
  };
  CHECK(has_corner(2, -2));
  CHECK(has_corner(2, 2));
  CHECK(has_corner(5, -2));
  CHECK(has_corner(5, 2));

  // Oblique boundary angle: area scales with |sin(beta - theta)|.
  double beta = kPi / 2 + 0.3;
  Polygon q = crosswalk_polygon(cl, 2.0, 5.0, beta, 2.0);
  CHECK(polygon_signed_area(q) ==
        doctest::Approx(3.0 * 4.0 * std::abs(std::sin(beta))).epsilon(1e-12));
  CHECK(polygon_signed_area(q) > 0.0);

  CHECK(throws_code(Err::InvalidInterval, [&] { crosswalk_polygon(cl, 5.0, 2.0, kPi / 2, 2.0); }));
  CHECK(throws_code(Err::InvalidInterval, [&] { crosswalk_polygon(cl, -1.0, 2.0, kPi / 2, 2.0); }));
  CHECK(throws_code(Err::InvalidInterval, [&] { crosswalk_polygon(cl, 2.0, 25.0, kPi / 2, 2.0); }));
  CHECK(throws_code(Err::InvalidInterval, [&] { crosswalk_polygon(cl, 2.0, 5.0, kPi / 2, 0.0); }));
}

TEST_CASE("sample_slice steps at integer multiples of the spacing inside the corridor") {
  GridSpec g;
  g.origin = {-5.0, -5.0};
  g.resolution = 0.04;
  g.width_px = 250;
  g.height_px = 250;

  // 3 m wide corridor: offsets k * 0.04 for |k| <= 37 lie inside.
  Polygon cor{{{-2, -1.5}, {2, -1.5}, {2, 1.5}, {-2, 1.5}}};
  auto pts = sample_slice({0.0, 0.0}, kPi / 2, cor, g, 0.04);
  CHECK(pts.size() == 75);
  for (size_t k = 1; k < pts.size(); ++k) CHECK(pts[k].y > pts[k - 1].y);
  for (const auto& p : pts) {
    CHECK(point_in_polygon(p, cor));
    CHECK(std::abs(p.x) < 1e-9);
  }

  Polygon tiny{{{-0.01, -0.01}, {0.01, -0.01}, {0.01, 0.01}, {-0.01, 0.01}}};
  auto one = sample_slice({0.0, 0.0}, kPi / 2, tiny, g, 0.04);
  CHECK(one.size() == 1);

  // Corridor entirely off the grid footprint.
  Polygon far{{{100, 100}, {101, 100}, {101, 101}, {100, 101}}};
  auto none = sample_slice({100.5, 100.5}, kPi / 2, far, g, 0.04);
  CHECK(none.empty());
}
