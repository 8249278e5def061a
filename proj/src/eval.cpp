#include "cwmap/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cwmap/rng.hpp"

namespace cwmap {

namespace {

constexpr double kHausdorffStep = 0.04;  // meters
constexpr double kAngleTolDeg = 5.0;

std::vector<Point2> sample_segment(Point2 a, Point2 b, double step) {
  double len = norm(b - a);
  long n = long(len / step);
  std::vector<Point2> pts;
  pts.reserve(n + 2);
  Point2 u = len > 0 ? (1.0 / len) * (b - a) : Point2{0, 0};
  for (long k = 0; k <= n; ++k) pts.push_back(a + (k * step) * u);
  if (norm(pts.back() - b) > 1e-9) pts.push_back(b);
  return pts;
}

double directed_hausdorff(const std::vector<Point2>& from, const std::vector<Point2>& to) {
  double worst = 0.0;
  for (const Point2& p : from) {
    double best = 1e300;
    for (const Point2& q : to) best = std::min(best, norm(p - q));
    worst = std::max(worst, best);
  }
  return worst;
}

std::pair<Point2, Point2> boundary_segment(const Polyline& cl, double s, double beta,
                                           double half_width) {
  Point2 c = polyline_point_at(cl, s);
  Point2 d{std::cos(beta), std::sin(beta)};
  return {c - half_width * d, c + half_width * d};
}

const RoadCenterline* find_road(const Scene& scene, const std::string& id) {
  for (const RoadCenterline& r : scene.roads)
    if (r.id == id) return &r;
  return nullptr;
}

}  // namespace

double crosswalk_distance(const CrosswalkPrediction& pred, const CrosswalkGT& gt,
                          const RoadCenterline& road) {
  if (pred.road_id != gt.road_id || pred.road_id != road.id)
    fail(Err::RoadMismatch, "distance between crosswalks of different roads");
  const double h = road.width / 2.0;
  double worst = 0.0;
  const double ss_pred[2] = {pred.s1, pred.s2};
  const double ss_gt[2] = {gt.s1, gt.s2};
  for (int e = 0; e < 2; ++e) {
    auto [pa, pb] = boundary_segment(road.centerline, ss_pred[e], pred.beta, h);
    auto [ga, gb] = boundary_segment(road.centerline, ss_gt[e], gt.beta, h);
    std::vector<Point2> ps = sample_segment(pa, pb, kHausdorffStep);
    std::vector<Point2> gs = sample_segment(ga, gb, kHausdorffStep);
    worst = std::max(worst,
                     std::max(directed_hausdorff(ps, gs), directed_hausdorff(gs, ps)));
  }
  return worst;
}

SceneScore score_scene(const std::vector<CrosswalkPrediction>& preds, const Scene& scene,
                       const std::vector<double>& taus) {
  SceneScore sc;
  sc.pred_hits.assign(taus.size(), 0);
  sc.gt_hits.assign(taus.size(), 0);
  sc.n_gt = int(scene.crosswalks.size());

  for (const CrosswalkPrediction& p : preds) {
    if (!p.present) continue;
    ++sc.n_pred;
    const RoadCenterline* road = find_road(scene, p.road_id);
    if (!road) fail(Err::RoadMismatch, "prediction for unknown road " + p.road_id);
    double best = 1e300;
    const CrosswalkGT* best_gt = nullptr;
    for (const CrosswalkGT& gt : scene.crosswalks) {
      if (gt.road_id != p.road_id) continue;
      double d = crosswalk_distance(p, gt, *road);
      if (d < best) {
        best = d;
        best_gt = &gt;
      }
    }
    for (size_t t = 0; t < taus.size(); ++t)
      if (best < taus[t]) ++sc.pred_hits[t];
    if (best_gt) {
      ++sc.n_angle;
      if (p.has_mode && folded_diff(p.mode_angle, best_gt->beta) <= kAngleTolDeg * kPi / 180.0)
        ++sc.angle_before;
      if (folded_diff(p.beta, best_gt->beta) <= kAngleTolDeg * kPi / 180.0)
        ++sc.angle_after;
    }
  }

  for (const CrosswalkGT& gt : scene.crosswalks) {
    const RoadCenterline* road = find_road(scene, gt.road_id);
    if (!road) fail(Err::RoadMismatch, "ground truth for unknown road " + gt.road_id);
    double best = 1e300;
    for (const CrosswalkPrediction& p : preds) {
      if (!p.present || p.road_id != gt.road_id) continue;
      best = std::min(best, crosswalk_distance(p, gt, *road));
    }
    for (size_t t = 0; t < taus.size(); ++t)
      if (best < taus[t]) ++sc.gt_hits[t];
  }

  sc.iou = scene_iou(preds, scene.crosswalks, scene.grid);
  return sc;
}

MetricsReport aggregate_metrics(const std::vector<SceneScore>& scores,
                                const std::vector<double>& taus) {
  MetricsReport r;
  r.taus = taus;
  r.n_scenes = long(scores.size());
  std::vector<long> pred_hits(taus.size(), 0), gt_hits(taus.size(), 0);
  long n_angle = 0, before = 0, after = 0;
  double iou_sum = 0.0;
  for (const SceneScore& sc : scores) {
    r.n_pred += sc.n_pred;
    r.n_gt += sc.n_gt;
    for (size_t t = 0; t < taus.size(); ++t) {
      pred_hits[t] += sc.pred_hits[t];
      gt_hits[t] += sc.gt_hits[t];
    }
    n_angle += sc.n_angle;
    before += sc.angle_before;
    after += sc.angle_after;
    iou_sum += sc.iou;
  }
  r.no_predictions = r.n_pred == 0;
  r.no_ground_truth = r.n_gt == 0;
  for (size_t t = 0; t < taus.size(); ++t) {
    r.precision.push_back(r.n_pred ? double(pred_hits[t]) / double(r.n_pred) : 1.0);
    r.recall.push_back(r.n_gt ? double(gt_hits[t]) / double(r.n_gt) : 1.0);
  }
  r.mean_iou = scores.empty() ? 1.0 : iou_sum / double(scores.size());
  r.angle_before5 = n_angle ? double(before) / double(n_angle) : 0.0;
  r.angle_after5 = n_angle ? double(after) / double(n_angle) : 0.0;
  return r;
}

std::pair<std::vector<double>, std::vector<double>> precision_recall(
    const std::vector<CrosswalkPrediction>& preds, const Scene& scene,
    const std::vector<double>& taus) {
  MetricsReport r = aggregate_metrics({score_scene(preds, scene, taus)}, taus);
  return {r.precision, r.recall};
}

double scene_iou(const std::vector<CrosswalkPrediction>& preds,
                 const std::vector<CrosswalkGT>& gts, const GridSpec& grid) {
  Grid pred_mask(grid), gt_mask(grid);
  for (const CrosswalkPrediction& p : preds)
    if (p.present) rasterize_polygon_into(p.polygon, pred_mask);
  for (const CrosswalkGT& gt : gts) rasterize_polygon_into(gt.polygon, gt_mask);
  long inter = 0, uni = 0;
  for (size_t i = 0; i < pred_mask.values.size(); ++i) {
    bool a = pred_mask.values[i] > 0.5f;
    bool b = gt_mask.values[i] > 0.5f;
    inter += a && b;
    uni += a || b;
  }
  return uni == 0 ? 1.0 : double(inter) / double(uni);
}

////////////////////////////////////////////////////////////////////////////////
// Ablation runner

namespace {

bool same_corruption(const CorruptionConfig& a, const CorruptionConfig& b) {
  return a.blur_sigma == b.blur_sigma && a.noise_sigma == b.noise_sigma &&
         a.hole_rate == b.hole_rate && a.hole_size.lo == b.hole_size.lo &&
         a.hole_size.hi == b.hole_size.hi && a.erosion_px == b.erosion_px &&
         a.angle_jitter_deg == b.angle_jitter_deg && a.seed == b.seed;
}

}  // namespace

std::vector<std::pair<std::string, MetricsReport>> run_ablation(
    const std::vector<AblationSpec>& specs, const GeneratorConfig& gen,
    uint64_t n_scenes) {
  const size_t n_specs = specs.size();
  std::vector<std::vector<SceneScore>> scores(n_specs);
  for (auto& v : scores) v.resize(n_scenes);

#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < (long long)n_scenes; ++i) {
    Scene scene = generate_scene(gen, uint64_t(i));
    Scene stripped = scene;
    stripped.crosswalks.clear();
    FeatureMaps clean = render_oracle(scene);

    FeatureMaps corrupted;
    const CorruptionConfig* cached_for = nullptr;
    for (size_t s = 0; s < n_specs; ++s) {
      const AblationSpec& spec = specs[s];
      if (!cached_for || !same_corruption(*cached_for, spec.corruption)) {
        CorruptionConfig cc = spec.corruption;
        cc.seed = derive_stream(spec.corruption.seed, uint64_t(i));
        corrupted = corrupt(clean, cc);
        cached_for = &spec.corruption;
      }
      FeatureMaps maps = corrupted;
      if (spec.inject_dt) maps.dt = clean.dt;
      if (spec.inject_seg) maps.seg = clean.seg;
      if (spec.inject_ang) {
        maps.angle_x = clean.angle_x;
        maps.angle_y = clean.angle_y;
        maps.angle_mask = clean.angle_mask;
      }
      auto preds = infer_scene(stripped, maps, spec.energy, spec.policy);
      scores[s][i] = score_scene(preds, scene);
    }
  }

  std::vector<std::pair<std::string, MetricsReport>> out;
  out.reserve(n_specs);
  for (size_t s = 0; s < n_specs; ++s)
    out.push_back({specs[s].name, aggregate_metrics(scores[s])});
  return out;
}

std::vector<AblationSpec> table2_suite(const CorruptionConfig& corruption,
                                       const EnergyConfig& energy) {
  std::vector<AblationSpec> specs;
  auto add = [&](const std::string& name, CandidatePolicy policy, bool dt, bool seg,
                 bool ang) {
    AblationSpec s;
    s.name = name;
    s.policy = policy;
    s.inject_dt = dt;
    s.inject_seg = seg;
    s.inject_ang = ang;
    s.corruption = corruption;
    s.energy = energy;
    specs.push_back(std::move(s));
  };
  add("full", CandidatePolicy::kFull, false, false, false);
  add("no_angle_search", CandidatePolicy::kNoOffsets, false, false, false);
  add("no_centerline_angle", CandidatePolicy::kNoCenterline, false, false, false);
  add("perpendicular_only", CandidatePolicy::kPerpendicularOnly, false, false, false);
  add("oracle_dt", CandidatePolicy::kFull, true, false, false);
  add("oracle_seg", CandidatePolicy::kFull, false, true, false);
  add("oracle_angle", CandidatePolicy::kFull, false, false, true);
  add("oracle_all", CandidatePolicy::kFull, true, true, true);
  return specs;
}

CalibrationResult calibrate_lambda(const GeneratorConfig& gen,
                                   const CorruptionConfig& corruption,
                                   const EnergyConfig& energy, uint64_t n_scenes,
                                   const std::vector<double>& lambdas) {
  std::vector<AblationSpec> specs;
  for (double lam : lambdas) {
    AblationSpec s;
    s.name = "lambda_" + std::to_string(lam);
    s.corruption = corruption;
    s.energy = energy;
    s.energy.lambda_i = lam;
    specs.push_back(std::move(s));
  }
  auto rows = run_ablation(specs, gen, n_scenes);
  CalibrationResult res;
  double best = -1.0;
  for (size_t i = 0; i < rows.size(); ++i) {
    res.table.push_back({lambdas[i], rows[i].second.mean_iou});
    if (rows[i].second.mean_iou > best) {
      best = rows[i].second.mean_iou;
      res.best_lambda = lambdas[i];
    }
  }
  return res;
}

std::string report_table(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::string o = "name";
  const std::vector<double>& taus = rows.empty() ? kDefaultTaus : rows.front().second.taus;
  char buf[64];
  for (double t : taus) {
    std::snprintf(buf, sizeof buf, "\tP@%.2f", t);
    o += buf;
  }
  for (double t : taus) {
    std::snprintf(buf, sizeof buf, "\tR@%.2f", t);
    o += buf;
  }
  o += "\tmIoU\tang5_before\tang5_after\n";
  for (const auto& [name, r] : rows) {
    o += name;
    for (double p : r.precision) {
      std::snprintf(buf, sizeof buf, "\t%.6f", p);
      o += buf;
    }
    for (double rc : r.recall) {
      std::snprintf(buf, sizeof buf, "\t%.6f", rc);
      o += buf;
    }
    std::snprintf(buf, sizeof buf, "\t%.6f\t%.6f\t%.6f\n", r.mean_iou, r.angle_before5,
                  r.angle_after5);
    o += buf;
  }
  return o;
}

}  // namespace cwmap
