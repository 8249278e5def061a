#include "cwmap/inference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include "text_format.hpp"

namespace cwmap {

namespace {

constexpr int kAngleBins = 180;               // 1-degree histogram
constexpr double kDegenerateSliceDeg = 5.0;   // slice vs centerline limit
constexpr double kDedupToleranceDeg = 0.5;

double deg2rad(double d) { return d * kPi / 180.0; }

}  // namespace

std::optional<double> extract_angle_mode(const FeatureMaps& maps, const Polygon& corridor) {
  const GridSpec& g = maps.spec();
  auto [lo, hi] = polygon_bbox(corridor);
  int c0 = std::max(0, int(std::floor((lo.x - g.origin.x) / g.resolution)));
  int c1 = std::min(g.width_px - 1, int(std::ceil((hi.x - g.origin.x) / g.resolution)));
  int r0 = std::max(0, int(std::floor((lo.y - g.origin.y) / g.resolution)));
  int r1 = std::min(g.height_px - 1, int(std::ceil((hi.y - g.origin.y) / g.resolution)));
  if (c0 > c1 || r0 > r1) return std::nullopt;

  const double bin_w = kPi / kAngleBins;
  std::vector<std::array<double, kAngleBins>> row_bins(r1 - r0 + 1);
#pragma omp parallel for schedule(static)
  for (int row = r0; row <= r1; ++row) {
    auto& bins = row_bins[row - r0];
    bins.fill(0.0);
    double y = g.origin.y + row * g.resolution;
    for (int col = c0; col <= c1; ++col) {
      if (maps.angle_mask.at(row, col) < 0.5f) continue;
      float dt = maps.dt.at(row, col);
      if (!(dt > 0.0f)) continue;
      if (!point_in_polygon(Point2{g.origin.x + col * g.resolution, y}, corridor)) continue;
      double theta = fold_angle(std::atan2(double(maps.angle_y.at(row, col)),
                                           double(maps.angle_x.at(row, col))));
      int bin = std::min(kAngleBins - 1, int(theta / bin_w));
      bins[bin] += double(dt);
    }
  }
  // Rows merged in order: the histogram is thread-count independent.
  std::array<double, kAngleBins> bins{};
  for (const auto& rb : row_bins)
    for (int b = 0; b < kAngleBins; ++b) bins[b] += rb[b];

  int best = -1;
  double best_w = 0.0;
  for (int b = 0; b < kAngleBins; ++b)
    if (bins[b] > best_w) {
      best_w = bins[b];
      best = b;
    }
  if (best < 0) return std::nullopt;
  return (best + 0.5) * bin_w;
}

std::vector<double> candidate_angles(const Polyline& centerline, std::optional<double> mode,
                                     const EnergyConfig& cfg, CandidatePolicy policy) {
  std::vector<double> out;
  const bool use_perp = policy == CandidatePolicy::kFull ||
                        policy == CandidatePolicy::kNoOffsets ||
                        policy == CandidatePolicy::kPerpendicularOnly;
  const bool use_mode = policy != CandidatePolicy::kPerpendicularOnly && mode.has_value();
  const bool use_offsets = policy == CandidatePolicy::kFull ||
                           policy == CandidatePolicy::kNoCenterline;

  auto push_unique = [&](double a) {
    a = fold_angle(a);
    for (double b : out)
      if (folded_diff(a, b) < deg2rad(kDedupToleranceDeg)) return;
    out.push_back(a);
  };

  if (use_perp) push_unique(polyline_chord_angle(centerline) + kPi / 2.0);
  if (use_mode) {
    if (use_offsets)
      for (double off : cfg.angle_offsets_deg) push_unique(*mode + deg2rad(off));
    else
      push_unique(*mode);
  }
  return out;
}

Accumulator1D build_accumulator(const FeatureMaps& maps, const RoadCenterline& road,
                                const Polygon& intersection, double beta,
                                const EnergyConfig& cfg) {
  const double dir = polyline_chord_angle(road.centerline);
  if (folded_diff(beta, dir) < deg2rad(kDegenerateSliceDeg))
    fail(Err::SliceDegenerate, "slice angle within 5 degrees of the centerline");

  auto exit_s = polyline_exit_arclength(road.centerline, intersection);
  const double length = polyline_length(road.centerline);
  const double s0 = exit_s.value_or(0.0);
  const double s_end = std::min(s0 + cfg.search_window, length);
  if (s_end <= s0) fail(Err::EmptyCorridor, "no centerline left beyond the intersection");

  const Polygon corridor = corridor_polygon(road.centerline, road.width / 2.0);
  const long n = long((s_end - s0) / cfg.position_step + 1e-9) + 1;

  Accumulator1D acc;
  acc.positions.resize(n);
  acc.slice_seg.resize(n);
  acc.slice_dt.resize(n);
  acc.seg_raw.resize(n);
  acc.prefix_seg.resize(n);

  const GridSpec& g = maps.spec();
  bool any = false;
  for (long k = 0; k < n; ++k) {
    const double s = s0 + k * cfg.position_step;
    acc.positions[k] = s;
    Point2 center = polyline_point_at(road.centerline, s);
    std::vector<Point2> pts = sample_slice(center, beta, corridor, g, cfg.slice_step);
    double seg_sum = 0.0, dt_sum = 0.0;
    long m = 0;
    for (const Point2& p : pts) {
      PixelCoord pc = world_to_pixel(p, g);  // sample_slice stays in the grid
      seg_sum += double(maps.seg.at(pc.row, pc.col));
      dt_sum += double(maps.dt.at(pc.row, pc.col));
      ++m;
    }
    if (m > 0) {
      any = true;
      acc.seg_raw[k] = seg_sum / m;
      acc.slice_seg[k] = (2.0 * seg_sum - m) / m;
      acc.slice_dt[k] = dt_sum / (m * kDtThresholdPx);
    }
    acc.prefix_seg[k] = (k ? acc.prefix_seg[k - 1] : 0.0) +
                        acc.slice_seg[k] * cfg.position_step;
  }
  if (!any) fail(Err::EmptyCorridor, "search window misses the grid");
  return acc;
}

EnergyMax maximize_energy(const Accumulator1D& acc, const EnergyConfig& cfg) {
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

  // For each j the admissible i form a window [lo, hi) that only moves
  // forward; a max-deque over g gives the best i in O(1) amortized.
  std::deque<size_t> dq;
  size_t entered = 0;
  EnergyMax best;
  bool found = false;
  for (size_t j = 0; j < n; ++j) {
    while (entered < j && s[j] - s[entered] >= cfg.min_width) {
      while (!dq.empty() && gg[dq.back()] < gg[entered]) dq.pop_back();
      dq.push_back(entered);
      ++entered;
    }
    while (!dq.empty() && s[j] - s[dq.front()] > cfg.max_width) dq.pop_front();
    if (dq.empty()) continue;
    const size_t i = dq.front();
    const double e = f[j] + gg[i];
    if (!found || e > best.energy ||
        (e == best.energy && (i < best.i || (i == best.i && j < best.j)))) {
      best = {s[i], s[j], e, i, j};
      found = true;
    }
  }
  if (!found) fail(Err::WindowTooShort, "no pair satisfies the width bounds");
  return best;
}

std::vector<CrosswalkPrediction> infer_scene(const Scene& scene, const FeatureMaps& maps,
                                             const EnergyConfig& cfg,
                                             CandidatePolicy policy) {
  if (maps.spec() != scene.grid)
    fail(Err::GridMismatch, "feature maps and scene disagree on the grid");

  const int n_roads = int(scene.roads.size());
  std::vector<CrosswalkPrediction> preds(n_roads);
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < n_roads; ++r) {
    const RoadCenterline& road = scene.roads[r];
    CrosswalkPrediction& pred = preds[r];
    pred.road_id = road.id;

    const Polygon corridor = corridor_polygon(road.centerline, road.width / 2.0);
    std::optional<double> mode = extract_angle_mode(maps, corridor);
    pred.has_mode = mode.has_value();
    pred.mode_angle = mode.value_or(0.0);

    const std::vector<double> betas = candidate_angles(road.centerline, mode, cfg, policy);

    bool found = false;
    EnergyMax best;
    double best_beta = 0.0;
    Accumulator1D best_acc;
    for (double beta : betas) {
      try {
        Accumulator1D acc = build_accumulator(maps, road, scene.intersection, beta, cfg);
        EnergyMax m = maximize_energy(acc, cfg);
        // Ties keep the earlier candidate.
        if (!found || m.energy > best.energy) {
          best = m;
          best_beta = beta;
          best_acc = std::move(acc);
          found = true;
        }
      } catch (const Error& e) {
        if (e.code() != Err::SliceDegenerate && e.code() != Err::EmptyCorridor &&
            e.code() != Err::WindowTooShort)
          throw;
      }
    }
    if (!found) continue;  // present stays false

    pred.s1 = best.s1;
    pred.s2 = best.s2;
    pred.beta = best_beta;
    pred.energy = best.energy;
    pred.polygon = crosswalk_polygon(road.centerline, best.s1, best.s2, best_beta,
                                     road.width / 2.0);
    double raw = 0.0;
    for (size_t k = best.i; k <= best.j; ++k) raw += best_acc.seg_raw[k];
    raw /= double(best.j - best.i + 1);
    pred.present = raw >= cfg.presence_threshold;
  }
  return preds;
}

////////////////////////////////////////////////////////////////////////////////
// Prediction text format

std::string predictions_to_json(const std::vector<CrosswalkPrediction>& preds) {
  std::string o;
  o += "{\n  \"version\": 1,\n  \"predictions\": [";
  for (size_t i = 0; i < preds.size(); ++i) {
    const CrosswalkPrediction& p = preds[i];
    o += i ? ",\n    " : "\n    ";
    o += "{\"road_id\": \"" + p.road_id + "\", \"present\": ";
    o += p.present ? "true" : "false";
    o += ", \"s1\": " + textio::fmt_double(p.s1) + ", \"s2\": " + textio::fmt_double(p.s2) +
         ", \"beta\": " + textio::fmt_double(p.beta) +
         ", \"energy\": " + textio::fmt_double(p.energy) + ", \"has_mode\": ";
    o += p.has_mode ? "true" : "false";
    o += ", \"mode_angle\": " + textio::fmt_double(p.mode_angle) + ", \"polygon\": [";
    for (size_t k = 0; k < p.polygon.v.size(); ++k) {
      if (k) o += ", ";
      o += "[" + textio::fmt_double(p.polygon.v[k].x) + ", " +
           textio::fmt_double(p.polygon.v[k].y) + "]";
    }
    o += "]}";
  }
  o += preds.empty() ? "]\n" : "\n  ]\n";
  o += "}\n";
  return o;
}

std::vector<CrosswalkPrediction> predictions_from_json(const std::string& text) {
  const std::string ctx = "predictions";
  nlohmann::json j = textio::parse(text, ctx);
  if (textio::num_field(j, "version", ctx) != 1.0)
    fail(Err::SchemaVersionMismatch, "predictions version");
  std::vector<CrosswalkPrediction> preds;
  for (const auto& jp : textio::field(j, "predictions", ctx)) {
    CrosswalkPrediction p;
    p.road_id = textio::str_field(jp, "road_id", ctx);
    const auto& present = textio::field(jp, "present", ctx);
    if (!present.is_boolean()) fail(Err::ParseError, ctx + ": 'present' not a boolean");
    p.present = present.get<bool>();
    p.s1 = textio::num_field(jp, "s1", ctx);
    p.s2 = textio::num_field(jp, "s2", ctx);
    p.beta = textio::num_field(jp, "beta", ctx);
    p.energy = textio::num_field(jp, "energy", ctx);
    const auto& has_mode = textio::field(jp, "has_mode", ctx);
    if (!has_mode.is_boolean()) fail(Err::ParseError, ctx + ": 'has_mode' not a boolean");
    p.has_mode = has_mode.get<bool>();
    p.mode_angle = textio::num_field(jp, "mode_angle", ctx);
    for (const auto& pt : textio::field(jp, "polygon", ctx)) {
      if (!pt.is_array() || pt.size() != 2)
        fail(Err::ParseError, ctx + ": polygon point must be [x, y]");
      p.polygon.v.push_back({pt[0].get<double>(), pt[1].get<double>()});
    }
    preds.push_back(std::move(p));
  }
  return preds;
}

void save_predictions(const std::vector<CrosswalkPrediction>& preds,
                      const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Err::IoError, "cannot open " + path + " for writing");
  f << predictions_to_json(preds);
  if (!f) fail(Err::IoError, "write failed on " + path);
}

std::vector<CrosswalkPrediction> load_predictions(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Err::IoError, "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return predictions_from_json(ss.str());
}

}  // namespace cwmap
