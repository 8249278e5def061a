#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cwmap/inference.hpp"

namespace cwmap {

inline const std::vector<double> kDefaultTaus{0.20, 0.40, 0.60, 0.80};

// Discrete symmetric Hausdorff distance between corresponding boundary
// segments (pred s1 vs gt s1, pred s2 vs gt s2; the larger of the two),
// both sampled at 0.04 m. Throws RoadMismatch unless prediction, ground
// truth and road agree on the road id.
double crosswalk_distance(const CrosswalkPrediction& pred, const CrosswalkGT& gt,
                          const RoadCenterline& road);

// Raw per-scene tallies, aggregated by `aggregate_metrics`.
struct SceneScore {
  double iou = 1.0;
  int n_pred = 0;                 // predictions with present = true
  int n_gt = 0;
  std::vector<int> pred_hits;     // per tau: preds within tau of a same-road gt
  std::vector<int> gt_hits;       // per tau: gts with a present pred within tau
  int n_angle = 0;                // present preds on roads that carry a gt
  int angle_before = 0;           // ... whose histogram mode is within 5 deg
  int angle_after = 0;            // ... whose chosen beta is within 5 deg
};

SceneScore score_scene(const std::vector<CrosswalkPrediction>& preds, const Scene& scene,
                       const std::vector<double>& taus = kDefaultTaus);

struct MetricsReport {
  std::vector<double> taus;
  std::vector<double> precision;  // per tau; 1.0 when no predictions (flagged)
  std::vector<double> recall;     // per tau; 1.0 when no ground truth (flagged)
  bool no_predictions = false;
  bool no_ground_truth = false;
  double mean_iou = 0.0;
  double angle_before5 = 0.0;     // fraction within 5 deg before angle search
  double angle_after5 = 0.0;      // ... after
  long n_scenes = 0;
  long n_pred = 0;
  long n_gt = 0;
};

MetricsReport aggregate_metrics(const std::vector<SceneScore>& scores,
                                const std::vector<double>& taus = kDefaultTaus);

// Precision/recall at each tau for a single scene (match = distance
// strictly below tau, same road only).
std::pair<std::vector<double>, std::vector<double>> precision_recall(
    const std::vector<CrosswalkPrediction>& preds, const Scene& scene,
    const std::vector<double>& taus = kDefaultTaus);

// Rasterized IoU between the union of present predictions and the union of
// ground-truth polygons. Both empty counts as 1.0.
double scene_iou(const std::vector<CrosswalkPrediction>& preds,
                 const std::vector<CrosswalkGT>& gts, const GridSpec& grid);

struct AblationSpec {
  std::string name;
  CandidatePolicy policy = CandidatePolicy::kFull;
  bool inject_dt = false;   // overwrite the channel with the clean oracle
  bool inject_seg = false;
  bool inject_ang = false;
  CorruptionConfig corruption;
  EnergyConfig energy;
};

// Shared corrupted evaluation stream: per scene index, generate, render the
// oracle, corrupt with a per-index seed, apply the spec's channel
// injections, infer, score. Deterministic in (specs, gen, n_scenes).
std::vector<std::pair<std::string, MetricsReport>> run_ablation(
    const std::vector<AblationSpec>& specs, const GeneratorConfig& gen,
    uint64_t n_scenes);

// The eight canonical rows: full model, three reduced candidate policies,
// and the four oracle-injection variants.
std::vector<AblationSpec> table2_suite(const CorruptionConfig& corruption,
                                       const EnergyConfig& energy);

struct CalibrationResult {
  double best_lambda = 0.0;
  std::vector<std::pair<double, double>> table;  // (lambda, mean IoU)
};

// Grid search for lambda_i maximizing mean IoU on a held-out stream.
// Ties go to the smaller lambda.
CalibrationResult calibrate_lambda(const GeneratorConfig& gen,
                                   const CorruptionConfig& corruption,
                                   const EnergyConfig& energy, uint64_t n_scenes,
                                   const std::vector<double>& lambdas);

// Tab-separated table, one row per spec: precision and recall at each tau,
// mean IoU, angle-within-5-degree fractions.
std::string report_table(const std::vector<std::pair<std::string, MetricsReport>>& rows);

}  // namespace cwmap
